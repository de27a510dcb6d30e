#include "lora_indoor/isolation_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>

#include "lora_indoor/error.hpp"

namespace lora_indoor::pipeline {

namespace {

constexpr double kEulerGamma = 0.5772156649015329;

}  // namespace

struct IsolationForest::Node {
  // Leaf when `left` is null; `size` then holds the number of training points.
  std::unique_ptr<Node> left;
  std::unique_ptr<Node> right;
  Eigen::Index feature = 0;
  double split = 0.0;
  std::size_t size = 0;
};

void validate(const IsolationForestConfig& c) {
  if (c.n_trees < 1) throw Error(ErrorCode::kInvalidConfig, "isolation forest needs >= 1 tree");
  if (c.subsample_size < 2) {
    throw Error(ErrorCode::kInvalidConfig, "isolation forest subsample must be >= 2");
  }
  if (!(c.contamination > 0.0 && c.contamination < 0.5)) {
    throw Error(ErrorCode::kInvalidConfig, "contamination must be in (0, 0.5)");
  }
}

double average_path_length(std::size_t n) noexcept {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double m = static_cast<double>(n - 1);
  return 2.0 * (std::log(m) + kEulerGamma) - 2.0 * m / static_cast<double>(n);
}

IsolationForest::IsolationForest(const Eigen::MatrixXd& samples,
                                 const IsolationForestConfig& config) {
  validate(config);
  const auto n = static_cast<std::size_t>(samples.rows());
  if (n == 0) throw Error(ErrorCode::kEmpty, "isolation forest needs at least one sample");
  psi_ = std::min(config.subsample_size, n);
  const auto height_limit = static_cast<int>(std::ceil(std::log2(std::max<double>(psi_, 2.0))));
  const auto dims = samples.cols();

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> pool(n);
  std::vector<std::size_t> subset(psi_);

  struct Builder {
    const Eigen::MatrixXd& x;
    std::mt19937_64& rng;
    Eigen::Index dims;
    int height_limit;

    std::unique_ptr<Node> build(std::span<std::size_t> rows, int depth) {
      auto node = std::make_unique<Node>();
      node->size = rows.size();
      if (depth >= height_limit || rows.size() <= 1) return node;

      // Only features with spread in this node can split it.
      std::vector<Eigen::Index> candidates;
      std::vector<std::pair<double, double>> ranges;
      for (Eigen::Index f = 0; f < dims; ++f) {
        double lo = x(static_cast<Eigen::Index>(rows[0]), f);
        double hi = lo;
        for (auto r : rows) {
          const double v = x(static_cast<Eigen::Index>(r), f);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (hi > lo) {
          candidates.push_back(f);
          ranges.emplace_back(lo, hi);
        }
      }
      if (candidates.empty()) return node;

      const auto pick = std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng);
      const auto [lo, hi] = ranges[pick];
      node->feature = candidates[pick];
      node->split = std::uniform_real_distribution<double>(lo, hi)(rng);
      if (!(node->split > lo)) node->split = std::nextafter(lo, hi);

      auto mid = std::partition(rows.begin(), rows.end(), [&](std::size_t r) {
        return x(static_cast<Eigen::Index>(r), node->feature) < node->split;
      });
      const auto cut = static_cast<std::size_t>(mid - rows.begin());
      node->left = build(rows.subspan(0, cut), depth + 1);
      node->right = build(rows.subspan(cut), depth + 1);
      return node;
    }
  } builder{samples, rng, dims, height_limit};

  trees_.reserve(config.n_trees);
  for (std::size_t t = 0; t < config.n_trees; ++t) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // Partial Fisher-Yates: the first psi_ entries become the subsample.
    for (std::size_t i = 0; i < psi_; ++i) {
      const auto j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
      std::swap(pool[i], pool[j]);
    }
    std::copy_n(pool.begin(), psi_, subset.begin());
    trees_.push_back(builder.build(subset, 0));
  }
}

IsolationForest::~IsolationForest() = default;
IsolationForest::IsolationForest(IsolationForest&&) noexcept = default;
IsolationForest& IsolationForest::operator=(IsolationForest&&) noexcept = default;

std::size_t IsolationForest::tree_count() const noexcept { return trees_.size(); }

double IsolationForest::path_length(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                    std::size_t tree) const {
  const Node* node = trees_.at(tree).get();
  double depth = 0.0;
  while (node->left) {
    node = x[node->feature] < node->split ? node->left.get() : node->right.get();
    depth += 1.0;
  }
  return depth + average_path_length(node->size);
}

double IsolationForest::expected_path_length(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double total = 0.0;
  for (std::size_t t = 0; t < trees_.size(); ++t) total += path_length(x, t);
  return total / static_cast<double>(trees_.size());
}

double IsolationForest::score(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return std::exp2(-expected_path_length(x) / average_path_length(psi_));
}

std::vector<double> IsolationForest::score_all(const Eigen::MatrixXd& samples) const {
  std::vector<double> out(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = score(samples.row(i));
  }
  return out;
}

AnomalyResult isolation_forest(const Eigen::MatrixXd& samples,
                               const IsolationForestConfig& config) {
  validate(config);
  AnomalyResult result;
  const auto n = static_cast<std::size_t>(samples.rows());
  result.flags.assign(n, false);
  if (n < 2) {
    // Nothing can be isolated from a single point.
    result.scores.assign(n, 0.5);
    return result;
  }

  const IsolationForest forest(samples, config);
  result.scores = forest.score_all(samples);

  const auto k = static_cast<std::size_t>(std::llround(config.contamination * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.scores[a] > result.scores[b];
  });
  for (std::size_t i = 0; i < std::min(k, n); ++i) result.flags[order[i]] = true;
  return result;
}

}  // namespace lora_indoor::pipeline
