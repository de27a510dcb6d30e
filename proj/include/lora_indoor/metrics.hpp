#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lora_indoor/fitting.hpp"
#include "lora_indoor/propagation.hpp"

namespace lora_indoor::metrics {

double rmse(std::span<const double> actual, std::span<const double> predicted);

/// 1 - SS_res / SS_tot; negative for predictors worse than the mean.
double r_squared(std::span<const double> actual, std::span<const double> predicted);

struct ResidualStats {
  double mean = 0.0;
  double skewness = 0.0;  // biased Fisher-Pearson g1 = m3 / m2^1.5
  double sigma = 0.0;     // population std-dev
};

ResidualStats residual_stats(std::span<const double> residuals);

/// Received / expected frames from a device's frame counters, unwrapping the
/// 16-bit over-the-air counter when it decreases.
double pdr(std::span<const std::int64_t> frame_counters);

struct EvalReport {
  double rmse_db = 0.0;
  double r2 = 0.0;
  double residual_mean_db = 0.0;
  double residual_skewness = 0.0;
  double shadowing_sigma_db = 0.0;
  std::size_t n_observations = 0;
};

EvalReport evaluate(std::span<const double> actual, std::span<const double> predicted);
EvalReport evaluate(const propagation::PathLossModel& model,
                    std::span<const fitting::Observation> observations);

struct FoldMetrics {
  double train_rmse_db = 0.0;
  double validation_rmse_db = 0.0;
  double train_r2 = 0.0;
  double validation_r2 = 0.0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population std-dev across folds
};

struct CvReport {
  std::vector<FoldMetrics> folds;
  MeanStd train_rmse_db;
  MeanStd validation_rmse_db;
  MeanStd train_r2;
  MeanStd validation_r2;
};

/// k-fold cross-validation of the least-squares fit.
CvReport cross_validate(std::span<const fitting::Observation> observations,
                        propagation::ModelVariant variant, std::size_t folds, std::uint64_t seed,
                        const fitting::FitConfig& config = {});

}  // namespace lora_indoor::metrics
