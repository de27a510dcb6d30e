#pragma once

#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lora_indoor::propagation {

struct WallCounts {
  int brick = 0;  // concrete/brick walls
  int wood = 0;   // wood partitions
};

struct EnvVector {
  double temperature_c = 0.0;
  double humidity_pct = 0.0;
  double pressure_hpa = 0.0;
  double pm25_ugm3 = 0.0;
  double co2_ppm = 0.0;
};

enum class ModelVariant { kMultiWall, kMultiWallEnv };

std::string_view to_string(ModelVariant variant) noexcept;
// Accepts "mw" / "mw-ep" (also "MW" / "MW_EP"); throws kInvalidModel otherwise.
ModelVariant parse_variant(std::string_view text);

// Keys of PathLossModel::wall_loss_db and env_coeffs.
inline constexpr std::string_view kBrick = "brick";
inline constexpr std::string_view kWood = "wood";
inline constexpr std::string_view kCo2 = "co2";
inline constexpr std::string_view kHumidity = "humidity";
inline constexpr std::string_view kPm25 = "pm25";
inline constexpr std::string_view kPressure = "pressure";
inline constexpr std::string_view kTemperature = "temperature";

inline constexpr double kReferenceDistanceM = 1.0;

/// Multi-wall log-distance path-loss model, optionally extended with
/// environmental covariates, a 20 log10(f[MHz]) term and an SNR term.
struct PathLossModel {
  ModelVariant variant = ModelVariant::kMultiWall;
  double intercept_db = 0.0;
  double path_loss_exponent = 2.0;
  std::map<std::string, double, std::less<>> wall_loss_db;
  std::map<std::string, double, std::less<>> env_coeffs;  // multi-wall-env only
  std::optional<double> snr_coeff;                         // multi-wall-env only
  double shadowing_sigma_db = 0.0;
  double reference_distance_m = kReferenceDistanceM;
};

// Throws Error(kInvalidModel) when the invariants of the variant are broken.
void validate(const PathLossModel& model);

/// Fitted coefficients of the campaign's baseline and environmental models.
PathLossModel reference_mw_model();
PathLossModel reference_mw_ep_model();

/// Flat coefficient vector used by the fitter, in the order
/// [intercept, exponent, L_brick, L_wood] and, for the environmental variant,
/// [theta_co2, theta_humidity, theta_pm25, theta_pressure, theta_temperature, k_snr].
std::vector<std::string> parameter_names(ModelVariant variant);
std::size_t parameter_count(ModelVariant variant) noexcept;
std::vector<double> to_parameters(const PathLossModel& model);
PathLossModel from_parameters(ModelVariant variant, std::span<const double> params,
                              double shadowing_sigma_db = 0.0,
                              double reference_distance_m = kReferenceDistanceM);

/// Deterministic multi-wall prediction (shadowing excluded).
double predict_mw(const PathLossModel& model, double distance_m, WallCounts walls);

/// Deterministic environmental prediction (shadowing excluded).
double predict_mw_ep(const PathLossModel& model, double distance_m, WallCounts walls,
                     double freq_mhz, const EnvVector& env, double snr_db);

/// Log-normal shadowing on the linear scale; the dB value is N(mean, sigma^2).
struct ShadowingSpec {
  double sigma_db = 9.0;
  double mean_db = 0.0;
  static constexpr double kXi = 10.0 / std::numbers::ln10;
};

/// Density of the linear-scale shadowing factor eps > 0. Throws kNonPositiveArgument.
double shadowing_pdf(const ShadowingSpec& spec, double eps_linear);

/// `count` dB-domain shadowing draws, reproducible for a given seed.
std::vector<double> sample_shadowing(const ShadowingSpec& spec, std::uint64_t seed,
                                     std::size_t count);

/// Random single-floor scene: walls at U(spacing) intervals, each with its
/// own U(loss) attenuation, swept along a straight line from d0.
struct SceneSpec {
  double reference_distance_m = 1.0;
  double pl0_db = 40.0;
  double exponent = 3.5;
  double sigma_db = 9.0;
  double max_distance_m = 50.0;
  std::size_t points = 500;
  double wall_loss_min_db = 5.0;
  double wall_loss_max_db = 12.0;
  double wall_spacing_min_m = 4.0;
  double wall_spacing_max_m = 10.0;
};

// Two exponent presets: 3.5 (moderate clutter) and 4.0 (heavy obstruction).
SceneSpec indoor_scene_preset();
SceneSpec obstructed_scene_preset();

struct ScenePoint {
  double distance_m = 0.0;
  int walls_crossed = 0;
  double wall_loss_db = 0.0;
  double true_pl_db = 0.0;
  double noisy_pl_db = 0.0;
};

std::vector<ScenePoint> simulate_scene(const SceneSpec& spec, std::uint64_t seed);

}  // namespace lora_indoor::propagation
