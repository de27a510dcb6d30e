#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lora_indoor/propagation.hpp"

namespace lora_indoor::fitting {

using propagation::ModelVariant;

/// One path-loss measurement with everything either model variant can use.
struct Observation {
  double distance_m = 1.0;
  propagation::WallCounts walls;
  double frequency_mhz = 868.1;
  propagation::EnvVector env;
  double snr_db = 0.0;
  double path_loss_db = 0.0;
};

/// Levenberg-Marquardt settings. An empty `initial_params` selects
/// default_initial_parameters() for the variant.
struct FitConfig {
  std::vector<double> initial_params;
  std::size_t max_iterations = 100'000;
  double rss_tolerance = 1e-10;  // relative RSS change
  double damping_initial = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
  double reference_distance_m = propagation::kReferenceDistanceM;
};

void validate(const FitConfig& config);

/// Starting point: intercept 40 dB, exponent 3.5, 9 dB brick, 3 dB wood,
/// environmental coefficients 0 and SNR coefficient -1.
std::vector<double> default_initial_parameters(ModelVariant variant);

struct FitReport {
  ModelVariant variant = ModelVariant::kMultiWall;
  std::vector<std::string> parameter_names;
  Eigen::VectorXd params;
  Eigen::VectorXd standard_errors;  // sqrt(diag((J^T J)^-1) * RSS/(N-p))
  double rss = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  Eigen::VectorXd residuals;  // observed - predicted, dB
  double shadowing_sigma_db = 0.0;
  double reference_distance_m = propagation::kReferenceDistanceM;

  propagation::PathLossModel model() const;
};

/// Model prediction for every observation (shadowing excluded).
Eigen::VectorXd predict(std::span<const double> params, std::span<const Observation> observations,
                        ModelVariant variant,
                        double reference_distance_m = propagation::kReferenceDistanceM);

/// Residual sum of squares of observed minus predicted path loss.
double rss(std::span<const double> params, std::span<const Observation> observations,
           ModelVariant variant, double reference_distance_m = propagation::kReferenceDistanceM);

/// d(prediction)/d(param), N x p. Both variants are linear in their
/// coefficients, so every column is closed form.
Eigen::MatrixXd jacobian(std::span<const double> params, std::span<const Observation> observations,
                         ModelVariant variant,
                         double reference_distance_m = propagation::kReferenceDistanceM);

/// Damped Gauss-Newton (Levenberg-Marquardt) least-squares fit.
///
/// Throws kUnderdetermined with fewer than p + 1 observations and
/// kSingularNormalEquations when the design is rank deficient. Hitting the
/// iteration cap is reported through `converged`, not an exception.
FitReport fit(std::span<const Observation> observations, ModelVariant variant,
              const FitConfig& config = {});

}  // namespace lora_indoor::fitting
