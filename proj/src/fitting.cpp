#include "lora_indoor/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lora_indoor/error.hpp"

namespace lora_indoor::fitting {

namespace {

void check_inputs(std::span<const double> params, std::span<const Observation> observations,
                  ModelVariant variant) {
  if (params.size() != propagation::parameter_count(variant)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model '" + std::string(propagation::to_string(variant)) + "' takes " +
                    std::to_string(propagation::parameter_count(variant)) +
                    " coefficients, got " + std::to_string(params.size()));
  }
  if (observations.empty()) throw Error(ErrorCode::kEmpty, "no observations");
}

// Design row: prediction = row . params + offset.
void design_row(const Observation& o, ModelVariant variant, double d0, double* row,
                double* offset) {
  if (!(o.distance_m >= d0)) {
    throw Error(ErrorCode::kDistanceBelowReference,
                "observation distance " + std::to_string(o.distance_m) +
                    " m is below the reference distance");
  }
  row[0] = 1.0;
  row[1] = 10.0 * std::log10(o.distance_m / d0);
  row[2] = o.walls.brick;
  row[3] = o.walls.wood;
  *offset = 0.0;
  if (variant == ModelVariant::kMultiWallEnv) {
    if (!(o.frequency_mhz > 0.0)) {
      throw Error(ErrorCode::kNonPositiveFrequency, "carrier frequency must be positive");
    }
    row[4] = o.env.co2_ppm;
    row[5] = o.env.humidity_pct;
    row[6] = o.env.pm25_ugm3;
    row[7] = o.env.pressure_hpa;
    row[8] = o.env.temperature_c;
    row[9] = o.snr_db;
    *offset = 20.0 * std::log10(o.frequency_mhz);
  }
}

struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd offset;
};

Design build_design(std::span<const Observation> observations, ModelVariant variant, double d0) {
  const auto p = static_cast<Eigen::Index>(propagation::parameter_count(variant));
  const auto n = static_cast<Eigen::Index>(observations.size());
  Design d{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  double row[10];
  for (Eigen::Index i = 0; i < n; ++i) {
    design_row(observations[static_cast<std::size_t>(i)], variant, d0, row, &d.offset[i]);
    for (Eigen::Index j = 0; j < p; ++j) d.x(i, j) = row[j];
  }
  return d;
}

Eigen::VectorXd targets(std::span<const Observation> observations) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(observations.size()));
  for (std::size_t i = 0; i < observations.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = observations[i].path_loss_db;
  }
  return y;
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace

void validate(const FitConfig& c) {
  if (c.max_iterations < 1) throw Error(ErrorCode::kInvalidConfig, "max_iterations must be >= 1");
  if (!(c.rss_tolerance > 0.0) || !(c.damping_initial > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "tolerance and initial damping must be positive");
  }
  if (!(c.damping_up > 1.0) || !(c.damping_down > 0.0 && c.damping_down < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "damping factors need up > 1 and 0 < down < 1");
  }
  if (!(c.reference_distance_m > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "reference distance must be positive");
  }
}

std::vector<double> default_initial_parameters(ModelVariant variant) {
  std::vector<double> p = {40.0, 3.5, 9.0, 3.0};
  if (variant == ModelVariant::kMultiWallEnv) {
    p.insert(p.end(), {0.0, 0.0, 0.0, 0.0, 0.0, -1.0});
  }
  return p;
}

propagation::PathLossModel FitReport::model() const {
  return propagation::from_parameters(variant, std::span<const double>(params.data(), params.size()),
                                      shadowing_sigma_db, reference_distance_m);
}

Eigen::VectorXd predict(std::span<const double> params, std::span<const Observation> observations,
                        ModelVariant variant, double reference_distance_m) {
  check_inputs(params, observations, variant);
  const auto d = build_design(observations, variant, reference_distance_m);
  return d.x * as_vector(params) + d.offset;
}

double rss(std::span<const double> params, std::span<const Observation> observations,
           ModelVariant variant, double reference_distance_m) {
  const Eigen::VectorXd r =
      targets(observations) - predict(params, observations, variant, reference_distance_m);
  return r.squaredNorm();
}

Eigen::MatrixXd jacobian(std::span<const double> params, std::span<const Observation> observations,
                         ModelVariant variant, double reference_distance_m) {
  check_inputs(params, observations, variant);
  return build_design(observations, variant, reference_distance_m).x;
}

FitReport fit(std::span<const Observation> observations, ModelVariant variant,
              const FitConfig& config) {
  validate(config);
  const std::size_t p = propagation::parameter_count(variant);
  if (observations.size() < p + 1) {
    throw Error(ErrorCode::kUnderdetermined,
                "fitting " + std::to_string(p) + " coefficients needs at least " +
                    std::to_string(p + 1) + " observations, got " +
                    std::to_string(observations.size()));
  }
  std::vector<double> start =
      config.initial_params.empty() ? default_initial_parameters(variant) : config.initial_params;
  check_inputs(start, observations, variant);

  const double d0 = config.reference_distance_m;
  const Eigen::VectorXd y = targets(observations);
  const auto n = y.size();
  const auto np = static_cast<Eigen::Index>(p);

  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jacobian(start, observations, variant, d0));
    qr.setThreshold(1e-10);
    if (qr.rank() < np) {
      throw Error(ErrorCode::kSingularNormalEquations,
                  "design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                      std::to_string(p) + "); e.g. all observations share one distance");
    }
  }

  // Below this the fit is exact to rounding and relative changes are noise.
  const double exact_floor = 1e-24 * y.squaredNorm() + std::numeric_limits<double>::min();

  Eigen::VectorXd alpha = as_vector(start);
  auto residual_of = [&](const Eigen::VectorXd& a) -> Eigen::VectorXd {
    return y - predict(std::span<const double>(a.data(), a.size()), observations, variant, d0);
  };
  Eigen::VectorXd r = residual_of(alpha);
  double current = r.squaredNorm();

  FitReport report;
  report.variant = variant;
  report.parameter_names = propagation::parameter_names(variant);
  report.reference_distance_m = d0;

  double lambda = config.damping_initial;
  Eigen::MatrixXd augmented(n + np, np);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + np);
  std::size_t iter = 0;
  bool converged = current <= exact_floor;
  while (!converged && iter < config.max_iterations) {
    ++iter;
    // min |J d - r|^2 + lambda |d|^2, i.e. (J^T J + lambda I) d = J^T r, via
    // QR of [J; sqrt(lambda) I] so the normal matrix is never formed.
    augmented.topRows(n) =
        jacobian(std::span<const double>(alpha.data(), alpha.size()), observations, variant, d0);
    augmented.bottomRows(np) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(np, np);
    rhs.head(n) = r;
    const Eigen::VectorXd step = augmented.householderQr().solve(rhs);

    const Eigen::VectorXd trial = alpha + step;
    const Eigen::VectorXd trial_r = residual_of(trial);
    const double trial_rss = trial_r.squaredNorm();
    if (trial_rss < current) {
      const double improvement = current - trial_rss;
      const double previous = current;
      alpha = trial;
      r = trial_r;
      current = trial_rss;
      lambda = std::max(lambda * config.damping_down, std::numeric_limits<double>::min());
      converged = improvement <= config.rss_tolerance * previous || current <= exact_floor;
    } else {
      // A near-undamped step that cannot improve RSS means we sit at the minimum.
      const bool stationary = trial_rss - current <= config.rss_tolerance * current &&
                              lambda <= config.damping_initial;
      lambda *= config.damping_up;
      converged = stationary;
      if (!converged && lambda > 1e20) break;
    }
  }

  report.params = alpha;
  report.iterations = iter;
  report.converged = converged;
  report.residuals = r;
  report.rss = r.squaredNorm();
  const double mean = r.mean();
  report.shadowing_sigma_db = std::sqrt((r.array() - mean).square().mean());

  const Eigen::MatrixXd j =
      jacobian(std::span<const double>(alpha.data(), alpha.size()), observations, variant, d0);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(j);
  const Eigen::MatrixXd rmat = qr.matrixQR().topRows(np).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv = rmat.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(np, np));
  const double sigma2 = report.rss / static_cast<double>(n - np);
  report.standard_errors = (rinv.rowwise().squaredNorm() * sigma2).cwiseSqrt();
  return report;
}

}  // namespace lora_indoor::fitting
