#include "lora_indoor/metrics.hpp"

#include <cmath>
#include <set>

#include "lora_indoor/error.hpp"
#include "lora_indoor/pipeline.hpp"

namespace lora_indoor::metrics {

namespace {

void check_pair(std::span<const double> a, std::span<const double> p) {
  if (a.size() != p.size()) {
    throw Error(ErrorCode::kLengthMismatch, "actual and predicted lengths differ");
  }
  if (a.empty()) throw Error(ErrorCode::kEmpty, "metric of an empty sample");
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

MeanStd summarize(const std::vector<double>& v) {
  MeanStd out;
  out.mean = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(v.size()));
  return out;
}

constexpr std::int64_t kCounterModulus = 1 << 16;

}  // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double ss = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - predicted[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(actual.size()));
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  if (actual.size() < 2) throw Error(ErrorCode::kTooFew, "R^2 needs at least 2 points");
  const double m = mean_of(actual);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - m) * (actual[i] - m);
  }
  if (!(ss_tot > 0.0)) throw Error(ErrorCode::kConstantActual, "R^2 undefined for constant data");
  return 1.0 - ss_res / ss_tot;
}

ResidualStats residual_stats(std::span<const double> residuals) {
  if (residuals.size() < 3) throw Error(ErrorCode::kTooFew, "residual statistics need >= 3 values");
  ResidualStats s;
  s.mean = mean_of(residuals);
  double m2 = 0.0;
  double m3 = 0.0;
  for (double r : residuals) {
    const double d = r - s.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  const auto n = static_cast<double>(residuals.size());
  m2 /= n;
  m3 /= n;
  s.sigma = std::sqrt(m2);
  s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return s;
}

double pdr(std::span<const std::int64_t> frame_counters) {
  if (frame_counters.empty()) throw Error(ErrorCode::kEmpty, "PDR of an empty counter list");
  std::set<std::int64_t> seen;
  std::int64_t offset = 0;
  std::int64_t prev = frame_counters.front();
  for (auto c : frame_counters) {
    if (c < prev) offset += kCounterModulus;
    prev = c;
    seen.insert(c + offset);
  }
  const auto expected = *seen.rbegin() - *seen.begin() + 1;
  return static_cast<double>(seen.size()) / static_cast<double>(expected);
}

EvalReport evaluate(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  std::vector<double> residuals(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) residuals[i] = actual[i] - predicted[i];
  EvalReport report;
  report.n_observations = actual.size();
  report.rmse_db = rmse(actual, predicted);
  report.r2 = r_squared(actual, predicted);
  const auto stats = residual_stats(residuals);
  report.residual_mean_db = stats.mean;
  report.residual_skewness = stats.skewness;
  report.shadowing_sigma_db = stats.sigma;
  return report;
}

EvalReport evaluate(const propagation::PathLossModel& model,
                    std::span<const fitting::Observation> observations) {
  propagation::validate(model);
  std::vector<double> actual;
  std::vector<double> predicted;
  actual.reserve(observations.size());
  predicted.reserve(observations.size());
  for (const auto& o : observations) {
    actual.push_back(o.path_loss_db);
    predicted.push_back(model.variant == propagation::ModelVariant::kMultiWall
                            ? propagation::predict_mw(model, o.distance_m, o.walls)
                            : propagation::predict_mw_ep(model, o.distance_m, o.walls,
                                                         o.frequency_mhz, o.env, o.snr_db));
  }
  return evaluate(actual, predicted);
}

CvReport cross_validate(std::span<const fitting::Observation> observations,
                        propagation::ModelVariant variant, std::size_t folds, std::uint64_t seed,
                        const fitting::FitConfig& config) {
  const auto partition = pipeline::kfold(observations.size(), folds, seed);
  CvReport report;
  std::vector<double> tr_rmse, va_rmse, tr_r2, va_r2;
  for (const auto& fold : partition) {
    std::vector<fitting::Observation> train, validation;
    train.reserve(fold.train.size());
    validation.reserve(fold.validation.size());
    for (auto i : fold.train) train.push_back(observations[i]);
    for (auto i : fold.validation) validation.push_back(observations[i]);

    const auto fitted = fitting::fit(train, variant, config);
    const auto model = fitted.model();
    const auto on_train = evaluate(model, train);
    const auto on_validation = evaluate(model, validation);
    report.folds.push_back({on_train.rmse_db, on_validation.rmse_db, on_train.r2,
                            on_validation.r2, train.size(), validation.size()});
    tr_rmse.push_back(on_train.rmse_db);
    va_rmse.push_back(on_validation.rmse_db);
    tr_r2.push_back(on_train.r2);
    va_r2.push_back(on_validation.r2);
  }
  report.train_rmse_db = summarize(tr_rmse);
  report.validation_rmse_db = summarize(va_rmse);
  report.train_r2 = summarize(tr_r2);
  report.validation_r2 = summarize(va_r2);
  return report;
}

}  // namespace lora_indoor::metrics
