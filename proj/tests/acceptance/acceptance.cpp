// Acceptance checks, one line per criterion.
//
//   acceptance                 desk suite (criteria 1-7, synthetic half of 9)
//   acceptance --dataset       published-dataset checks (8, dataset half of 9);
//                              needs LORA_INDOOR_DATASET, exits 77 without it

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "lora_indoor/adr.hpp"
#include "lora_indoor/fitting.hpp"
#include "lora_indoor/link_budget.hpp"
#include "lora_indoor/lora_phy.hpp"
#include "lora_indoor/metrics.hpp"
#include "lora_indoor/pipeline.hpp"
#include "lora_indoor/propagation.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace lora_indoor;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& what) {
  fmt::print("[{}] {} {}\n", ok ? "PASS" : "FAIL", id, what);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void criterion_1() {
  phy::RadioConfig c;
  c.sf = 7;
  c.bw_hz = 125'000;
  c.payload_bytes = 18;
  c.crc_on = true;
  c.implicit_header = true;
  c.low_dr_opt = false;
  c.cr_index = 1;
  c.preamble_symbols = 8;
  const double ts = phy::symbol_duration(c), toa = phy::time_on_air(c);
  const int n = phy::payload_symbols(c);
  const bool ok = std::abs(ts - 1.024e-3) < 1e-6 && n == 33 && std::abs(toa - 46.336e-3) < 1e-6;
  report("1", ok, fmt::format("PHY exactness: T_sym={:.6f} ms, N_payload={}, ToA={:.6f} ms", ts * 1e3, n,
                              toa * 1e3));
}

void criterion_2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240301);
  std::uniform_real_distribution<double> rssi(-140, -20), snr(-25, 20);
  double worst_diff = 0.0, worst_rel = 0.0;
  for (int i = 0; i < 100'000; ++i) {
    const double r = rssi(rng), s = snr(rng);
    const double e = link::esp(r, s), n = link::noise_power(r, s);
    worst_diff = std::max(worst_diff, std::abs(e - n - s));
    const double lin = std::pow(10.0, e / 10) + std::pow(10.0, n / 10);
    worst_rel = std::max(worst_rel, std::abs(lin / std::pow(10.0, r / 10) - 1.0));
  }
  const double secs = seconds_since(t0);
  report("2", worst_diff <= 1e-9 && worst_rel <= 1e-9 && secs < 1.0,
         fmt::format("link-budget identities over 1e5 pairs: max |esp-n-snr|={:.2e} dB, max rel power "
                     "error={:.2e}, {:.3f} s",
                     worst_diff, worst_rel, secs));
}

void criterion_3() {
  const link::LinkBudgetParams p;
  const double lo = link::experimental_path_loss(p, -128), hi = link::experimental_path_loss(p, -28);
  bool ok = std::abs(lo - 145.26) < 1e-12 && std::abs(hi - 45.26) < 1e-12 &&
            std::abs(link::link_budget_offset_db(p) - 17.26) < 1e-12;
  for (double r = -140; r <= -20; r += 0.1) ok = ok && std::abs(link::experimental_path_loss(p, r) - (17.26 - r)) < 1e-12;
  report("3", ok, fmt::format("exp_pl offset 17.26 dB: exp_pl(-128)={:.2f}, exp_pl(-28)={:.2f}", lo, hi));
}

void criterion_4() {
  const propagation::ShadowingSpec spec{9.0, 0.0};
  const double u = 12.0 * 9.0 / 10.0 * std::log(10.0);
  const double total = oracle::integrate_positive_axis(
      [&](double e) { return propagation::shadowing_pdf(spec, e); }, -u, u, 64, 1e-10);
  const auto draws = propagation::sample_shadowing(spec, 42, 1'000'000);
  const auto m = oracle::moments(draws);
  const bool ok = std::abs(total - 1.0) <= 1e-6 && std::abs(m.sd - 9.0) <= 0.05 && std::abs(m.skew) < 0.02;
  report("4", ok, fmt::format("shadowing law: PDF integral={:.9f}, sample sigma={:.4f} dB, g1={:+.4f}", total,
                              m.sd, m.skew));
}

void criterion_5() {
  const auto t0 = Clock::now();
  const std::vector<double> truth{40, 3.5, 9, 3};
  const auto clean = fitting::fit(synth::mw_scene(500, 0.0, 5), propagation::ModelVariant::kMultiWall);
  double exact_err = 0.0;
  for (int k = 0; k < 4; ++k) exact_err = std::max(exact_err, std::abs(clean.params[k] - truth[k]));

  // Against a one-shot solve on several full-rank datasets of both variants.
  double oracle_err = 0.0;
  const std::vector<double> ep{12.0, 3.1, 8.0, 2.5, -0.003, -0.07, -0.15, -0.012, -0.006, -1.9};
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto obs = synth::mw_ep_scene(400, ep, 8.0, seed);
    for (auto v : {propagation::ModelVariant::kMultiWall, propagation::ModelVariant::kMultiWallEnv}) {
      const auto r = fitting::fit(obs, v);
      const auto x = fitting::jacobian(fitting::default_initial_parameters(v), obs, v);
      Eigen::VectorXd y(static_cast<Eigen::Index>(obs.size()));
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const double freq_term =
            v == propagation::ModelVariant::kMultiWallEnv ? 20.0 * std::log10(obs[i].frequency_mhz) : 0.0;
        y[static_cast<Eigen::Index>(i)] = obs[i].path_loss_db - freq_term;
      }
      oracle_err = std::max(oracle_err, (r.params - oracle::normal_equations(x, y)).cwiseAbs().maxCoeff());
    }
  }

  const auto noisy = fitting::fit(synth::mw_scene(10'000, 9.0, 2024), propagation::ModelVariant::kMultiWall);
  double worst_z = 0.0;
  for (int k = 0; k < 4; ++k) worst_z = std::max(worst_z, std::abs(noisy.params[k] - truth[k]) / noisy.standard_errors[k]);
  const double sigma_rel = std::abs(noisy.shadowing_sigma_db / 9.0 - 1.0);
  const double secs = seconds_since(t0);
  const bool ok = exact_err <= 1e-6 && oracle_err <= 1e-6 && worst_z <= 3.0 && sigma_rel <= 0.05 && secs < 10.0;
  report("5", ok,
         fmt::format("fitter oracle: zero-noise max error={:.2e}, LM vs one-shot solve={:.2e}, noisy max "
                     "|z|={:.2f} SE, sigma_hat={:.3f} dB, {:.2f} s",
                     exact_err, oracle_err, worst_z, noisy.shadowing_sigma_db, secs));
}

void criterion_6() {
  adr::AdrState s;
  s.current_sf = 7;
  s.fade_margin_db = 10;
  for (double v : {2.0, 9.5, -1.0}) s = adr::record_snr(s, v);
  const double margin = adr::snr_margin(s);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> snr(-25, 20);
  std::uniform_int_distribution<int> sf(7, 12), power(0, 14), steps(1, 40);
  bool clamps = true;
  for (int walk = 0; walk < 10'000; ++walk) {
    adr::AdrState w;
    w.current_sf = sf(rng);
    w.min_sf = std::uniform_int_distribution<int>(7, w.current_sf)(rng);
    w.current_power_dbm = power(rng);
    for (int i = steps(rng); i > 0; --i) {
      w = adr::record_snr(w, snr(rng));
      w = adr::adr_step(w).state;
      clamps = clamps && w.current_sf >= w.min_sf && w.current_sf <= 12 && w.current_power_dbm <= w.max_power_dbm;
    }
  }
  report("6", std::abs(margin - 7.0) < 1e-12 && clamps,
         fmt::format("ADR: snr_margin={:.1f} dB, SF/power clamps held over 1e4 random walks: {}", margin,
                     clamps ? "yes" : "no"));
}

std::string run_and_serialise(const fs::path& input) {
  auto result = pipeline::run_pipeline(pipeline::ingest(input, {.defer_non_finite = true}), pipeline::PipelineConfig{});
  std::ostringstream os;
  pipeline::write_csv(os, result.cleaned);
  os << "--\n";
  for (auto i : result.partition.train) os << i << '\n';
  os << "--\n";
  for (auto i : result.partition.test) os << i << '\n';
  return os.str();
}

void criterion_7() {
  // 4 devices x (2400 usable + 50 retransmissions + 50 SF11/12) = 1e4 rows.
  const auto csv = synth::measurement_csv(4, 2400, 50, 50, 77);
  const auto dir = fs::temp_directory_path() / fmt::format("lora_indoor_acceptance_{}", ::getpid());
  fs::create_directories(dir);
  const auto input = dir / "synthetic.csv";
  std::ofstream(input, std::ios::binary) << csv.text;

  const auto first = run_and_serialise(input);
  const bool identical = first == run_and_serialise(input);

  const auto ingested = pipeline::ingest(input, {.defer_non_finite = true});
  const auto kept = pipeline::dedup_retransmissions(ingested.records);
  std::set<std::pair<std::string, std::string>> all, survivors, dropped;
  for (const auto& r : ingested.records) all.insert({r.device_id, r.time});
  for (const auto& r : kept) survivors.insert({r.device_id, r.time});
  for (const auto& k : all)
    if (!survivors.count(k)) dropped.insert(k);
  const bool dedup_ok = dropped == csv.duplicates;

  const auto result = pipeline::run_pipeline(ingested, pipeline::PipelineConfig{});
  const auto n = result.counts.after_non_finite;
  const auto expected_flags = static_cast<std::size_t>(std::llround(0.01 * static_cast<double>(n)));
  fs::remove_all(dir);
  report("7", csv.rows == 10'000 && identical && dedup_ok && result.counts.anomalies == expected_flags,
         fmt::format("pipeline determinism: {} rows, byte-identical reruns: {}, dedup dropped {} of {} "
                     "constructed duplicates (exact set: {}), IF flagged {} of N={} (expected {})",
                     csv.rows, identical ? "yes" : "no", dropped.size(), csv.duplicates.size(),
                     dedup_ok ? "yes" : "no", result.counts.anomalies, n, expected_flags));
}

void criterion_9_synthetic() {
  const auto obs = synth::mw_scene(10'000, 9.0, 99);
  const auto cv = metrics::cross_validate(obs, propagation::ModelVariant::kMultiWall, 5, 42);
  const double rel = std::abs(cv.validation_rmse_db.mean / 9.0 - 1.0);
  report("9a", rel <= 0.02,
         fmt::format("cross-validation on synthetic data: fold-mean RMSE={:.4f} dB vs injected 9 dB ({:.2f}%), "
                     "fold std={:.4f} dB",
                     cv.validation_rmse_db.mean, rel * 100, cv.validation_rmse_db.std));
}

int dataset_scale() {
  const char* path = std::getenv("LORA_INDOOR_DATASET");
  if (!path || !fs::exists(path)) {
    fmt::print("[SKIP] 8 dataset-scale reproduction: set LORA_INDOOR_DATASET to the published CSV\n");
    fmt::print("[SKIP] 9b cross-validation on the published dataset: same dataset required\n");
    return 77;
  }
  const auto result = pipeline::run_pipeline(pipeline::ingest(fs::path(path), {.defer_non_finite = true}),
                                             pipeline::PipelineConfig{});
  auto select = [&](const std::vector<std::size_t>& idx) {
    std::vector<fitting::Observation> out;
    for (auto i : idx) out.push_back(pipeline::to_observation(result.cleaned[i]));
    return out;
  };
  const auto train = select(result.partition.train), test = select(result.partition.test);
  fmt::print("       rows read {}, cleaned {}, rejected at ingest {}\n", result.counts.rows_read,
             result.counts.cleaned, result.counts.rows_read - result.counts.ingested);

  const auto mw = fitting::fit(train, propagation::ModelVariant::kMultiWall);
  const auto ep = fitting::fit(train, propagation::ModelVariant::kMultiWallEnv);
  const auto mw_eval = metrics::evaluate(mw.model(), test);
  const auto ep_eval = metrics::evaluate(ep.model(), test);
  bool signs = mw.params[1] >= 2.8 && mw.params[1] <= 4.0 && ep.params[1] >= 2.8 && ep.params[1] <= 4.0;
  for (const auto& p : {mw.params, ep.params})
    for (int k = 0; k < 4; ++k) signs = signs && p[k] > 0;
  for (int k = 4; k < ep.params.size(); ++k) signs = signs && ep.params[k] < 0;
  const bool ok = mw_eval.rmse_db >= 10.0 && mw_eval.rmse_db <= 11.2 && mw_eval.r2 >= 0.66 && mw_eval.r2 <= 0.72 &&
                  ep_eval.rmse_db >= 7.5 && ep_eval.rmse_db <= 8.6 && ep_eval.r2 >= 0.79 && ep_eval.r2 <= 0.85 &&
                  signs;
  report("8", ok,
         fmt::format("dataset-scale reproduction: MW RMSE={:.3f} dB R2={:.4f} n={:.3f}; MW-EP RMSE={:.3f} dB "
                     "R2={:.4f} n={:.3f}; signs/ranges ok: {}",
                     mw_eval.rmse_db, mw_eval.r2, mw.params[1], ep_eval.rmse_db, ep_eval.r2, ep.params[1],
                     signs ? "yes" : "no"));

  const auto all = pipeline::to_observations(result.cleaned);
  const auto cv_mw = metrics::cross_validate(all, propagation::ModelVariant::kMultiWall, 5, 42);
  const auto cv_ep = metrics::cross_validate(all, propagation::ModelVariant::kMultiWallEnv, 5, 42);
  report("9b", cv_mw.validation_rmse_db.std < 0.2 && cv_ep.validation_rmse_db.std < 0.2,
         fmt::format("cross-validation on the published dataset: fold RMSE std MW={:.4f} dB, MW-EP={:.4f} dB",
                     cv_mw.validation_rmse_db.std, cv_ep.validation_rmse_db.std));
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1 && std::string(argv[1]) == "--dataset") return dataset_scale();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  fmt::print("[SKIP] 8 dataset-scale reproduction: runs separately (acceptance --dataset)\n");
  criterion_9_synthetic();
  fmt::print("[SKIP] 9b cross-validation on the published dataset: runs separately (acceptance --dataset)\n");
  fmt::print("{} failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
