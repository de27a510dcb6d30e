#include "lora_indoor/propagation.hpp"

#include <cmath>
#include <random>

#include "lora_indoor/error.hpp"

namespace lora_indoor::propagation {

namespace {

constexpr std::size_t kMwParams = 4;
constexpr std::size_t kMwEpParams = 10;

// Env coefficient order inside the flat parameter vector.
constexpr std::string_view kEnvOrder[] = {kCo2, kHumidity, kPm25, kPressure, kTemperature};

double coefficient(const std::map<std::string, double, std::less<>>& m, std::string_view key) {
  auto it = m.find(key);
  return it == m.end() ? 0.0 : it->second;
}

double structural_terms(const PathLossModel& model, double distance_m, WallCounts walls) {
  if (!(distance_m >= model.reference_distance_m)) {
    throw Error(ErrorCode::kDistanceBelowReference,
                "distance " + std::to_string(distance_m) + " m is below the reference distance");
  }
  if (walls.brick < 0 || walls.wood < 0) {
    throw Error(ErrorCode::kInvalidScene, "wall counts must be non-negative");
  }
  return model.intercept_db +
         10.0 * model.path_loss_exponent * std::log10(distance_m / model.reference_distance_m) +
         walls.brick * coefficient(model.wall_loss_db, kBrick) +
         walls.wood * coefficient(model.wall_loss_db, kWood);
}

// Fixed offset so the shadowing stream never coincides with the wall stream.
constexpr std::uint64_t kShadowingStream = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::string_view to_string(ModelVariant variant) noexcept {
  return variant == ModelVariant::kMultiWall ? "mw" : "mw-ep";
}

ModelVariant parse_variant(std::string_view text) {
  if (text == "mw" || text == "MW") return ModelVariant::kMultiWall;
  if (text == "mw-ep" || text == "MW_EP" || text == "mw_ep") return ModelVariant::kMultiWallEnv;
  throw Error(ErrorCode::kInvalidModel, "unknown model variant '" + std::string(text) + "'");
}

void validate(const PathLossModel& model) {
  if (!(model.path_loss_exponent > 0.0)) {
    throw Error(ErrorCode::kInvalidModel, "path-loss exponent must be positive");
  }
  if (!(model.shadowing_sigma_db >= 0.0)) {
    throw Error(ErrorCode::kInvalidModel, "shadowing sigma must be non-negative");
  }
  if (!(model.reference_distance_m > 0.0)) {
    throw Error(ErrorCode::kInvalidModel, "reference distance must be positive");
  }
  if (model.variant == ModelVariant::kMultiWall &&
      (!model.env_coeffs.empty() || model.snr_coeff.has_value())) {
    throw Error(ErrorCode::kInvalidModel,
                "multi-wall model cannot carry environmental or SNR coefficients");
  }
  if (model.variant == ModelVariant::kMultiWallEnv && !model.snr_coeff.has_value()) {
    throw Error(ErrorCode::kInvalidModel, "environmental model needs an SNR coefficient");
  }
}

PathLossModel reference_mw_model() {
  const double p[] = {31.30, 3.62, 9.74, 2.64};
  return from_parameters(ModelVariant::kMultiWall, p, 10.5786);
}

PathLossModel reference_mw_ep_model() {
  const double p[] = {5.46,      3.20,      8.52,      2.98,      -0.002497,
                      -0.074299, -0.153205, -0.011567, -0.005767, -1.982231};
  return from_parameters(ModelVariant::kMultiWallEnv, p, 8.0357);
}

std::vector<std::string> parameter_names(ModelVariant variant) {
  std::vector<std::string> names = {"intercept_db", "path_loss_exponent", "wall_loss_brick_db",
                                    "wall_loss_wood_db"};
  if (variant == ModelVariant::kMultiWallEnv) {
    for (auto key : kEnvOrder) names.push_back("theta_" + std::string(key));
    names.emplace_back("snr_coeff");
  }
  return names;
}

std::size_t parameter_count(ModelVariant variant) noexcept {
  return variant == ModelVariant::kMultiWall ? kMwParams : kMwEpParams;
}

std::vector<double> to_parameters(const PathLossModel& model) {
  std::vector<double> p = {model.intercept_db, model.path_loss_exponent,
                           coefficient(model.wall_loss_db, kBrick),
                           coefficient(model.wall_loss_db, kWood)};
  if (model.variant == ModelVariant::kMultiWallEnv) {
    for (auto key : kEnvOrder) p.push_back(coefficient(model.env_coeffs, key));
    p.push_back(model.snr_coeff.value_or(0.0));
  }
  return p;
}

PathLossModel from_parameters(ModelVariant variant, std::span<const double> params,
                              double shadowing_sigma_db, double reference_distance_m) {
  if (params.size() != parameter_count(variant)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(parameter_count(variant)) + " coefficients, got " +
                    std::to_string(params.size()));
  }
  PathLossModel model;
  model.variant = variant;
  model.intercept_db = params[0];
  model.path_loss_exponent = params[1];
  model.wall_loss_db.emplace(kBrick, params[2]);
  model.wall_loss_db.emplace(kWood, params[3]);
  if (variant == ModelVariant::kMultiWallEnv) {
    for (std::size_t j = 0; j < std::size(kEnvOrder); ++j) {
      model.env_coeffs.emplace(kEnvOrder[j], params[4 + j]);
    }
    model.snr_coeff = params[9];
  }
  model.shadowing_sigma_db = shadowing_sigma_db;
  model.reference_distance_m = reference_distance_m;
  return model;
}

double predict_mw(const PathLossModel& model, double distance_m, WallCounts walls) {
  if (model.variant != ModelVariant::kMultiWall) {
    throw Error(ErrorCode::kInvalidModel, "predict_mw needs a multi-wall model");
  }
  return structural_terms(model, distance_m, walls);
}

double predict_mw_ep(const PathLossModel& model, double distance_m, WallCounts walls,
                     double freq_mhz, const EnvVector& env, double snr_db) {
  if (model.variant != ModelVariant::kMultiWallEnv) {
    throw Error(ErrorCode::kInvalidModel, "predict_mw_ep needs an environmental model");
  }
  if (!(freq_mhz > 0.0)) {
    throw Error(ErrorCode::kNonPositiveFrequency, "carrier frequency must be positive");
  }
  const auto& c = model.env_coeffs;
  return structural_terms(model, distance_m, walls) + 20.0 * std::log10(freq_mhz) +
         coefficient(c, kCo2) * env.co2_ppm + coefficient(c, kHumidity) * env.humidity_pct +
         coefficient(c, kPm25) * env.pm25_ugm3 + coefficient(c, kPressure) * env.pressure_hpa +
         coefficient(c, kTemperature) * env.temperature_c +
         model.snr_coeff.value_or(0.0) * snr_db;
}

double shadowing_pdf(const ShadowingSpec& spec, double eps_linear) {
  if (!(eps_linear > 0.0)) {
    throw Error(ErrorCode::kNonPositiveArgument, "shadowing factor must be positive");
  }
  if (!(spec.sigma_db > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "shadowing sigma must be positive");
  }
  const double z = (10.0 * std::log10(eps_linear) - spec.mean_db) / spec.sigma_db;
  return ShadowingSpec::kXi / (std::sqrt(2.0 * std::numbers::pi) * spec.sigma_db * eps_linear) *
         std::exp(-0.5 * z * z);
}

std::vector<double> sample_shadowing(const ShadowingSpec& spec, std::uint64_t seed,
                                     std::size_t count) {
  if (!(spec.sigma_db >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "shadowing sigma must be non-negative");
  }
  std::vector<double> out(count, spec.mean_db);
  if (spec.sigma_db == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(spec.mean_db, spec.sigma_db);
  for (auto& v : out) v = normal(rng);
  return out;
}

SceneSpec indoor_scene_preset() { return SceneSpec{}; }

SceneSpec obstructed_scene_preset() {
  SceneSpec spec;
  spec.exponent = 4.0;
  return spec;
}

std::vector<ScenePoint> simulate_scene(const SceneSpec& spec, std::uint64_t seed) {
  if (!(spec.reference_distance_m > 0.0) || !(spec.max_distance_m > spec.reference_distance_m)) {
    throw Error(ErrorCode::kInvalidScene, "scene needs 0 < d0 < max distance");
  }
  if (spec.points < 2) throw Error(ErrorCode::kInvalidScene, "scene needs at least 2 points");
  if (!(spec.wall_spacing_min_m > 0.0) || spec.wall_spacing_max_m < spec.wall_spacing_min_m ||
      spec.wall_loss_max_db < spec.wall_loss_min_db || !(spec.sigma_db >= 0.0) ||
      !(spec.exponent > 0.0)) {
    throw Error(ErrorCode::kInvalidScene, "invalid wall, exponent or shadowing parameters");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> spacing(spec.wall_spacing_min_m, spec.wall_spacing_max_m);
  std::uniform_real_distribution<double> loss(spec.wall_loss_min_db, spec.wall_loss_max_db);
  struct Wall {
    double position_m;
    double loss_db;
  };
  std::vector<Wall> walls;
  for (double pos = spacing(rng); pos < spec.max_distance_m; pos += spacing(rng)) {
    walls.push_back({pos, loss(rng)});
  }

  const auto eps = sample_shadowing({spec.sigma_db, 0.0}, seed ^ kShadowingStream, spec.points);
  std::vector<ScenePoint> out;
  out.reserve(spec.points);
  const double step = (spec.max_distance_m - spec.reference_distance_m) / (spec.points - 1);
  std::size_t crossed = 0;
  double wall_loss = 0.0;
  for (std::size_t i = 0; i < spec.points; ++i) {
    const double d = i + 1 == spec.points ? spec.max_distance_m
                                          : spec.reference_distance_m + step * i;
    while (crossed < walls.size() && walls[crossed].position_m < d) {
      wall_loss += walls[crossed++].loss_db;
    }
    ScenePoint p;
    p.distance_m = d;
    p.walls_crossed = static_cast<int>(crossed);
    p.wall_loss_db = wall_loss;
    p.true_pl_db = spec.pl0_db +
                   10.0 * spec.exponent * std::log10(d / spec.reference_distance_m) + wall_loss;
    p.noisy_pl_db = p.true_pl_db + eps[i];
    out.push_back(p);
  }
  return out;
}

}  // namespace lora_indoor::propagation
