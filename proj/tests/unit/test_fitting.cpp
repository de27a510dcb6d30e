#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "lora_indoor/error.hpp"
#include "lora_indoor/fitting.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace lora_indoor;
using namespace lora_indoor::fitting;

namespace {

const std::vector<double> kTruth{40, 3.5, 9, 3};
const std::vector<double> kEpTruth{12.0, 3.1, 8.0, 2.5, -0.003, -0.07, -0.15, -0.012, -0.006, -1.9};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kInvalidConfig;
}

}  // namespace

TEST_CASE("rss") {
  auto obs = synth::mw_scene(50, 0.0, 1);
  CHECK(rss(kTruth, obs, ModelVariant::kMultiWall) == doctest::Approx(0.0).epsilon(1e-20));
  std::vector<Observation> one{obs[0]};
  one[0].path_loss_db += 2.0;
  CHECK(rss(kTruth, one, ModelVariant::kMultiWall) == doctest::Approx(4.0));
  for (auto& o : obs) o.path_loss_db += 0.5;
  CHECK(rss(kTruth, obs, ModelVariant::kMultiWall) == doctest::Approx(50 * 0.25));
  CHECK(code_of([&] { rss(std::vector<double>{1, 2, 3}, obs, ModelVariant::kMultiWall); }) ==
        ErrorCode::kDimensionMismatch);
}

TEST_CASE("jacobian columns and finite differences") {
  const auto obs = synth::mw_ep_scene(40, kEpTruth, 3.0, 2);
  for (auto v : {ModelVariant::kMultiWall, ModelVariant::kMultiWallEnv}) {
    std::vector<double> p = v == ModelVariant::kMultiWall ? kTruth : kEpTruth;
    const auto j = jacobian(p, obs, v);
    REQUIRE(j.rows() == 40);
    REQUIRE(static_cast<std::size_t>(j.cols()) == p.size());
    CHECK((j.col(0).array() == 1.0).all());
    for (std::size_t k = 0; k < p.size(); ++k) {
      auto hi = p, lo = p;
      const double h = 1e-4 * std::max(1.0, std::abs(p[k]));
      hi[k] += h;
      lo[k] -= h;
      const Eigen::VectorXd fd = (predict(hi, obs, v) - predict(lo, obs, v)) / (2 * h);
      CHECK((fd - j.col(static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
  std::vector<Observation> at_ref(1);
  CHECK(jacobian(kTruth, at_ref, ModelVariant::kMultiWall)(0, 1) == 0.0);
}

TEST_CASE("zero-noise scene is recovered exactly") {
  const auto obs = synth::mw_scene(500, 0.0, 3);
  const auto r = fit(obs, ModelVariant::kMultiWall);
  CHECK(r.converged);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(r.params[k] - kTruth[k]) < 1e-6);
  CHECK(r.rss < 1e-12);
}

TEST_CASE("fit agrees with a one-shot least-squares solve") {
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    const auto obs = synth::mw_ep_scene(300, kEpTruth, 7.0, seed);
    for (auto v : {ModelVariant::kMultiWall, ModelVariant::kMultiWallEnv}) {
      const auto r = fit(obs, v);
      const auto x = jacobian(default_initial_parameters(v), obs, v);
      Eigen::VectorXd y(static_cast<Eigen::Index>(obs.size()));
      for (std::size_t i = 0; i < obs.size(); ++i) {
        y[static_cast<Eigen::Index>(i)] =
            obs[i].path_loss_db - (v == ModelVariant::kMultiWallEnv ? 20 * std::log10(obs[i].frequency_mhz) : 0.0);
      }
      const auto ref = oracle::normal_equations(x, y);
      CHECK((r.params - ref).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(r.shadowing_sigma_db == doctest::Approx(std::sqrt(r.rss / obs.size())).epsilon(1e-12));
    }
  }
}

TEST_CASE("noisy scene is recovered within three standard errors") {
  const auto obs = synth::mw_scene(10'000, 9.0, 8);
  const auto r = fit(obs, ModelVariant::kMultiWall);
  CHECK(r.converged);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(r.params[k] - kTruth[k]) <= 3 * r.standard_errors[k]);
  CHECK(std::abs(r.shadowing_sigma_db / 9.0 - 1.0) < 0.05);
}

TEST_CASE("fit is deterministic and shift-covariant") {
  auto obs = synth::mw_ep_scene(200, kEpTruth, 5.0, 9);
  const auto a = fit(obs, ModelVariant::kMultiWallEnv);
  const auto b = fit(obs, ModelVariant::kMultiWallEnv);
  CHECK(a.params == b.params);
  CHECK(a.standard_errors == b.standard_errors);
  CHECK(a.rss == b.rss);
  CHECK(a.iterations == b.iterations);
  for (auto& o : obs) o.path_loss_db += 6.5;
  const auto c = fit(obs, ModelVariant::kMultiWallEnv);
  CHECK(c.params[0] - a.params[0] == doctest::Approx(6.5).epsilon(1e-9));
  for (int k = 1; k < c.params.size(); ++k) CHECK(std::abs(c.params[k] - a.params[k]) < 1e-9);
}

TEST_CASE("fitted model reproduces the fit") {
  const auto obs = synth::mw_ep_scene(200, kEpTruth, 5.0, 10);
  const auto r = fit(obs, ModelVariant::kMultiWallEnv);
  const auto m = r.model();
  CHECK(m.shadowing_sigma_db == r.shadowing_sigma_db);
  const auto& o = obs[17];
  CHECK(propagation::predict_mw_ep(m, o.distance_m, o.walls, o.frequency_mhz, o.env, o.snr_db) ==
        doctest::Approx(o.path_loss_db - r.residuals[17]).epsilon(1e-12));
}

TEST_CASE("fit preconditions") {
  const auto obs = synth::mw_scene(4, 0.0, 11);
  CHECK(code_of([&] { fit(obs, ModelVariant::kMultiWall); }) == ErrorCode::kUnderdetermined);
  std::vector<Observation> flat(10);  // every row at d0 without walls
  for (auto& o : flat) o.path_loss_db = 40;
  CHECK(code_of([&] { fit(flat, ModelVariant::kMultiWall); }) == ErrorCode::kSingularNormalEquations);
  FitConfig bad;
  bad.damping_up = 0.5;
  CHECK(code_of([&] { fit(synth::mw_scene(20, 1, 1), ModelVariant::kMultiWall, bad); }) ==
        ErrorCode::kInvalidConfig);
}

TEST_CASE("iteration cap is reported, not thrown") {
  FitConfig cfg;
  cfg.max_iterations = 1;
  cfg.initial_params = {0, 0, 0, 0};
  const auto r = fit(synth::mw_scene(100, 9.0, 12), ModelVariant::kMultiWall, cfg);
  CHECK(r.iterations == 1);
  CHECK_FALSE(r.converged);
}
