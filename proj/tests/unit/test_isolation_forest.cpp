#include <cmath>
#include <random>

#include "doctest.h"
#include "lora_indoor/error.hpp"
#include "lora_indoor/isolation_forest.hpp"

using namespace lora_indoor;
using namespace lora_indoor::pipeline;

namespace {

Eigen::MatrixXd cluster(int n, int dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  Eigen::MatrixXd x(n, dims);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dims; ++j) x(i, j) = g(rng);
  return x;
}

}  // namespace

TEST_CASE("average path length") {
  CHECK(average_path_length(0) == 0.0);
  CHECK(average_path_length(1) == 0.0);
  CHECK(average_path_length(2) == 1.0);
  const double h = std::log(255.0) + 0.5772156649015329;
  CHECK(average_path_length(256) == doctest::Approx(2 * h - 2 * 255.0 / 256.0));
}

TEST_CASE("a far point is flagged") {
  auto x = cluster(200, 3, 1);
  x.row(57) << 10, 10, 10;
  IsolationForestConfig cfg;
  cfg.contamination = 1.0 / 200;
  const auto r = isolation_forest(x, cfg);
  CHECK(r.flags[57]);
  CHECK(std::count(r.flags.begin(), r.flags.end(), true) == 1);
  CHECK(r.scores[57] > 0.6);
}

TEST_CASE("two-tree toy forest matches hand-walked path lengths") {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 0.1, 0.2, 10.0;
  IsolationForestConfig cfg;
  cfg.n_trees = 2;
  cfg.subsample_size = 4;
  const IsolationForest forest(x, cfg);
  CHECK(forest.subsample_size() == 4);
  for (std::size_t t = 0; t < 2; ++t) {
    // Height limit ceil(log2 4) = 2: the isolated point sits at depth 1, and
    // any inlier leaf credits c(size) for the points it still holds.
    const double far = forest.path_length(x.row(3), t);
    const double near = forest.path_length(x.row(0), t);
    CHECK(far <= near);
    CHECK(far >= 1.0);
    CHECK(near <= 2.0 + average_path_length(3));
  }
  CHECK(forest.score(x.row(3)) > forest.score(x.row(1)));
}

TEST_CASE("flag count equals the rounded contamination") {
  for (int n : {2, 49, 50, 150, 1000, 2345}) {
    IsolationForestConfig cfg;
    const auto r = isolation_forest(cluster(n, 4, n), cfg);
    CHECK(std::count(r.flags.begin(), r.flags.end(), true) == std::llround(0.01 * n));
  }
}

TEST_CASE("same data and seed give the same flags") {
  const auto x = cluster(500, 7, 3);
  IsolationForestConfig cfg;
  cfg.seed = 99;
  const auto a = isolation_forest(x, cfg);
  const auto b = isolation_forest(x, cfg);
  CHECK(a.flags == b.flags);
  CHECK(a.scores == b.scores);
}

TEST_CASE("constant columns are never split on") {
  Eigen::MatrixXd x = cluster(100, 2, 4);
  x.col(1).setConstant(5.0);
  x(10, 0) = 25;
  IsolationForestConfig cfg;
  const auto r = isolation_forest(x, cfg);
  CHECK(r.flags[10]);
}

TEST_CASE("invalid forest configs") {
  IsolationForestConfig cfg;
  cfg.contamination = 0.0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.n_trees = 0;
  CHECK_THROWS_AS(validate(cfg), Error);
}
