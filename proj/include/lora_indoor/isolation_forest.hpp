#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace lora_indoor::pipeline {

struct IsolationForestConfig {
  std::size_t n_trees = 100;
  std::size_t subsample_size = 256;
  double contamination = 0.01;
  std::uint64_t seed = 42;
};

void validate(const IsolationForestConfig& config);

/// c(n): average unsuccessful-search path length of a binary search tree on
/// n points, used both to normalise scores and to credit unsplit leaves.
double average_path_length(std::size_t n) noexcept;

/// Isolation forest over row-major samples (rows = observations).
class IsolationForest {
 public:
  IsolationForest(const Eigen::MatrixXd& samples, const IsolationForestConfig& config);
  ~IsolationForest();
  IsolationForest(IsolationForest&&) noexcept;
  IsolationForest& operator=(IsolationForest&&) noexcept;

  /// Path length of `x` in one tree, including the c(size) leaf credit.
  double path_length(const Eigen::Ref<const Eigen::RowVectorXd>& x, std::size_t tree) const;

  /// Mean path length over all trees.
  double expected_path_length(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  /// 2^(-E[h(x)] / c(psi)); close to 1 for anomalies, below 0.5 for inliers.
  double score(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  std::vector<double> score_all(const Eigen::MatrixXd& samples) const;

  std::size_t tree_count() const noexcept;
  std::size_t subsample_size() const noexcept { return psi_; }

 private:
  struct Node;
  std::vector<std::unique_ptr<Node>> trees_;
  std::size_t psi_ = 0;
};

struct AnomalyResult {
  std::vector<double> scores;
  std::vector<bool> flags;
};

/// Fits a forest on `samples`, scores them and flags exactly
/// round(contamination * N) highest-scoring rows (ties go to the lower index).
AnomalyResult isolation_forest(const Eigen::MatrixXd& samples, const IsolationForestConfig& config);

}  // namespace lora_indoor::pipeline
