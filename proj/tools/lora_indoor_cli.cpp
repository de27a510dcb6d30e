// lora-indoor: command-line front end for the LoRaWAN indoor propagation toolkit.
//
// Exit codes: 0 success, 1 domain error, 2 usage error. Results go to stdout
// or the named files; diagnostics and (unless redirected) the run manifest go
// to stderr.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "lora_indoor/adr.hpp"
#include "lora_indoor/error.hpp"
#include "lora_indoor/fitting.hpp"
#include "lora_indoor/json_io.hpp"
#include "lora_indoor/link_budget.hpp"
#include "lora_indoor/lora_phy.hpp"
#include "lora_indoor/metrics.hpp"
#include "lora_indoor/pipeline.hpp"
#include "lora_indoor/propagation.hpp"

namespace fs = std::filesystem;
using lora_indoor::Error;
using lora_indoor::ErrorCode;
using lora_indoor::io::Json;

namespace {

constexpr const char* kOutputDirEnv = "LORA_INDOOR_OUTPUT_DIR";

// Relative output paths are placed under $LORA_INDOOR_OUTPUT_DIR when set.
fs::path output_path(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) return fs::path(dir) / p;
  }
  return p;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

class RunManifest {
 public:
  explicit RunManifest(std::string command) {
    json_["command"] = std::move(command);
    json_["tool_version"] = LORA_INDOOR_VERSION;
    json_["inputs"] = Json::array();
    json_["seeds"] = Json::object();
    json_["config_digests"] = Json::object();
    json_["outputs"] = Json::array();
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    json_["started_unix_s"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
  }

  void input(const fs::path& p) {
    json_["inputs"].push_back(Json{{"path", p.string()}, {"digest", lora_indoor::io::file_digest(p)}});
  }
  void config(const std::string& name, const fs::path& p) {
    json_["config_digests"][name] = lora_indoor::io::file_digest(p);
  }
  void seed(const std::string& name, std::uint64_t value) { json_["seeds"][name] = value; }
  void output(const fs::path& p) { json_["outputs"].push_back(p.string()); }
  Json& extra() { return json_; }

  // Written to `target` when given, otherwise as one line on stderr.
  void emit(const std::optional<fs::path>& target) {
    if (target) {
      ensure_parent(*target);
      lora_indoor::io::write_json_file(*target, json_);
    } else {
      std::cerr << "manifest: " << json_.dump() << '\n';
    }
  }

 private:
  Json json_;
};

std::optional<fs::path> manifest_target(const std::string& flag) {
  if (flag.empty()) return std::nullopt;
  return output_path(flag);
}

void write_text(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::kUnreadableSource, "cannot write '" + p.string() + "'");
  out << text;
}

lora_indoor::propagation::EnvVector env_from_json(const Json& j) {
  lora_indoor::propagation::EnvVector env;
  auto get = [&](std::initializer_list<const char*> keys, double& out) {
    for (const char* k : keys) {
      if (auto it = j.find(k); it != j.end()) {
        out = it->get<double>();
        return;
      }
    }
  };
  get({"temperature", "temperature_c"}, env.temperature_c);
  get({"humidity", "humidity_pct"}, env.humidity_pct);
  get({"pressure", "pressure_hpa"}, env.pressure_hpa);
  get({"pm25", "pm25_ugm3"}, env.pm25_ugm3);
  get({"co2", "co2_ppm"}, env.co2_ppm);
  return env;
}

std::vector<lora_indoor::fitting::Observation> load_observations(const fs::path& path,
                                                                 RunManifest& manifest) {
  manifest.input(path);
  auto ingested = lora_indoor::pipeline::ingest(path);
  for (const auto& r : ingested.rejections) {
    std::cerr << fmt::format("warning: {}:{} rejected ({}: {})\n", path.string(), r.line, r.reason,
                             r.detail);
  }
  return lora_indoor::pipeline::to_observations(ingested.records);
}

std::string format_share_csv(const std::vector<lora_indoor::pipeline::ObservationRecord>& records,
                             const lora_indoor::pipeline::SplitResult& split) {
  const auto all = lora_indoor::pipeline::daily_share(records);
  const auto train = lora_indoor::pipeline::daily_share(records, split.train);
  const auto test = lora_indoor::pipeline::daily_share(records, split.test);
  auto at = [](const std::map<std::string, double>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : it->second;
  };
  std::string out = "date,all_pct,train_pct,test_pct\n";
  for (const auto& [day, pct] : all) {
    out += fmt::format("{},{},{},{}\n", day, pct, at(train, day), at(test, day));
  }
  return out;
}

std::vector<lora_indoor::pipeline::ObservationRecord> select(
    const std::vector<lora_indoor::pipeline::ObservationRecord>& records,
    const std::vector<std::size_t>& indices) {
  std::vector<lora_indoor::pipeline::ObservationRecord> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(records[i]);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LoRaWAN indoor propagation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", LORA_INDOOR_VERSION);
  std::string manifest_flag;
  app.add_option("--manifest", manifest_flag, "Write the run manifest to this file")
      ->capture_default_str();

  // airtime
  lora_indoor::phy::RadioConfig radio;
  radio.crc_on = false;
  auto* airtime = app.add_subcommand("airtime", "Symbol time, payload symbols and time on air");
  airtime->add_option("--sf", radio.sf, "Spreading factor (7-12)")->capture_default_str();
  airtime->add_option("--bw", radio.bw_hz, "Bandwidth in Hz")->capture_default_str();
  airtime->add_option("--cr", radio.cr_index, "Coding-rate index n in 4/(4+n)")->capture_default_str();
  airtime->add_option("--payload", radio.payload_bytes, "Payload size in bytes")->capture_default_str();
  airtime->add_option("--preamble", radio.preamble_symbols, "Preamble symbols")->capture_default_str();
  airtime->add_flag("--crc", radio.crc_on, "CRC enabled");
  airtime->add_flag("--implicit-header", radio.implicit_header, "Implicit header (H=1)");
  airtime->add_flag("--low-dr-opt", radio.low_dr_opt, "Low data-rate optimisation (DE=1)");

  // duty-cycle
  std::string schedule_path;
  double duty_limit = lora_indoor::phy::kDefaultDutyCycleLimit;
  auto* duty = app.add_subcommand("duty-cycle", "Hourly airtime of a transmission schedule");
  duty->add_option("--schedule", schedule_path,
                   "JSON-lines schedule: one {\"config\": {...}, \"count\": n} per line")
      ->required();
  duty->add_option("--limit", duty_limit, "Regulatory duty-cycle limit")->capture_default_str();

  // link-budget
  double rssi = 0.0, snr = 0.0;
  std::optional<int> lb_sf;
  std::string lb_params_path, lb_thresholds_path;
  auto* lb = app.add_subcommand("link-budget", "ESP, noise power and experimental path loss");
  lb->add_option("--rssi", rssi, "RSSI in dBm")->required();
  lb->add_option("--snr", snr, "SNR in dB")->required();
  lb->add_option("--sf", lb_sf, "Spreading factor for the reception check");
  lb->add_option("--params", lb_params_path, "Link-budget parameter JSON");
  lb->add_option("--thresholds", lb_thresholds_path, "Per-SF threshold override JSON");

  // adr-sim
  std::string trace_path;
  lora_indoor::adr::AdrState adr_state;
  auto* adr_sim = app.add_subcommand("adr-sim", "Replay an SNR trace through the ADR procedure");
  adr_sim->add_option("--trace", trace_path, "One SNR value (dB) per line")->required();
  adr_sim->add_option("--sf", adr_state.current_sf, "Initial SF")->capture_default_str();
  adr_sim->add_option("--power", adr_state.current_power_dbm, "Initial power (dBm)")->capture_default_str();
  adr_sim->add_option("--min-sf", adr_state.min_sf, "Lowest SF allowed")->capture_default_str();
  adr_sim->add_option("--fade-margin", adr_state.fade_margin_db, "Fade margin M (dB)")->capture_default_str();
  adr_sim->add_option("--power-step", adr_state.power_step_db, "Power step (dB)")->capture_default_str();
  adr_sim->add_option("--max-power", adr_state.max_power_dbm, "Maximum power (dBm)")->capture_default_str();
  adr_sim->add_option("--window", adr_state.history_capacity, "SNR history length")->capture_default_str();

  // predict
  std::string model_path, env_json;
  double distance = 1.0, freq = 868.1, pred_snr = 0.0;
  int brick = 0, wood = 0;
  auto* predict = app.add_subcommand("predict", "Deterministic path loss from a model file");
  predict->add_option("--model", model_path, "Model JSON")->required();
  predict->add_option("--distance", distance, "Distance in m")->required();
  predict->add_option("--brick", brick, "Brick/concrete walls")->capture_default_str();
  predict->add_option("--wood", wood, "Wood partitions")->capture_default_str();
  predict->add_option("--freq", freq, "Carrier frequency in MHz")->capture_default_str();
  predict->add_option("--env-json", env_json, "Environment as inline JSON or a JSON file");
  predict->add_option("--snr", pred_snr, "SNR in dB")->capture_default_str();

  // simulate
  auto scene = lora_indoor::propagation::indoor_scene_preset();
  std::uint64_t sim_seed = 42;
  std::string sim_out, sim_preset;
  auto* simulate = app.add_subcommand("simulate", "Random multi-wall scene with shadowing (CSV)");
  simulate->add_option("--preset", sim_preset, "indoor (n=3.5) or obstructed (n=4.0)")
      ->check(CLI::IsMember({"indoor", "obstructed"}));
  simulate->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
  simulate->add_option("--max-distance", scene.max_distance_m, "Sweep end (m)")->capture_default_str();
  simulate->add_option("--sigma", scene.sigma_db, "Shadowing sigma (dB)")->capture_default_str();
  simulate->add_option("--exponent", scene.exponent, "Path-loss exponent")->capture_default_str();
  simulate->add_option("--pl0", scene.pl0_db, "Path loss at d0 (dB)")->capture_default_str();
  simulate->add_option("--points", scene.points, "Sweep points")->capture_default_str();
  simulate->add_option("--out", sim_out, "CSV output file (default stdout)");

  // pipeline run
  std::string pl_input, pl_out_dir = "pipeline-out";
  lora_indoor::pipeline::PipelineConfig pl_config;
  auto* pipeline = app.add_subcommand("pipeline", "Data cleaning and splitting pipeline");
  pipeline->require_subcommand(1);
  auto* pipeline_run = pipeline->add_subcommand("run", "Run every stage on a measurement CSV");
  pipeline_run->add_option("--input", pl_input, "Measurement CSV")->required();
  pipeline_run->add_option("--out-dir", pl_out_dir, "Output directory")->capture_default_str();
  pipeline_run->add_option("--seed", pl_config.split.seed, "Split seed")->capture_default_str();
  pipeline_run->add_option("--forest-seed", pl_config.anomaly.forest.seed, "Isolation-forest seed")
      ->capture_default_str();
  pipeline_run->add_option("--contamination", pl_config.anomaly.forest.contamination,
                           "Anomaly fraction per device")
      ->capture_default_str();
  pipeline_run->add_option("--trees", pl_config.anomaly.forest.n_trees, "Isolation trees")
      ->capture_default_str();
  pipeline_run->add_option("--subsample", pl_config.anomaly.forest.subsample_size,
                           "Isolation-tree subsample size")
      ->capture_default_str();
  pipeline_run->add_option("--window", pl_config.dedup_window_s, "Dedup window (s)")
      ->capture_default_str();
  pipeline_run->add_option("--test-fraction", pl_config.split.test_fraction, "Test share")
      ->capture_default_str();

  // fit
  std::string fit_variant = "mw", fit_input, fit_config_path, fit_out, fit_report;
  auto* fit = app.add_subcommand("fit", "Levenberg-Marquardt fit of a path-loss model");
  fit->add_option("--variant", fit_variant, "mw or mw-ep")
      ->check(CLI::IsMember({"mw", "mw-ep"}))
      ->capture_default_str();
  fit->add_option("--input", fit_input, "Cleaned measurement CSV")->required();
  fit->add_option("--config", fit_config_path, "Fit config JSON");
  fit->add_option("--out", fit_out, "Model JSON output");
  fit->add_option("--report", fit_report, "Fit report JSON output (default stdout)");

  // evaluate
  std::string ev_model, ev_input, ev_report;
  auto* evaluate = app.add_subcommand("evaluate", "RMSE, R^2 and residual statistics of a model");
  evaluate->add_option("--model", ev_model, "Model JSON")->required();
  evaluate->add_option("--input", ev_input, "Measurement CSV")->required();
  evaluate->add_option("--report", ev_report, "Report JSON output (default stdout)");

  // cross-validate
  std::string cv_variant = "mw-ep", cv_input, cv_config_path, cv_report;
  std::size_t cv_folds = 5;
  std::uint64_t cv_seed = 42;
  auto* cv = app.add_subcommand("cross-validate", "k-fold cross-validation of a model variant");
  cv->add_option("--variant", cv_variant, "mw or mw-ep")
      ->check(CLI::IsMember({"mw", "mw-ep"}))
      ->capture_default_str();
  cv->add_option("--input", cv_input, "Cleaned measurement CSV")->required();
  cv->add_option("--folds", cv_folds, "Number of folds")->capture_default_str();
  cv->add_option("--seed", cv_seed, "Shuffle seed")->capture_default_str();
  cv->add_option("--config", cv_config_path, "Fit config JSON");
  cv->add_option("--report", cv_report, "Report JSON output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  std::cout.precision(17);
  try {
    if (*airtime) {
      RunManifest manifest("airtime");
      const Json out{{"t_symbol_ms", lora_indoor::phy::symbol_duration(radio) * 1e3},
                     {"n_payload", lora_indoor::phy::payload_symbols(radio)},
                     {"toa_ms", lora_indoor::phy::time_on_air(radio) * 1e3},
                     {"bit_rate_bps", lora_indoor::phy::bit_rate(radio)}};
      std::cout << out.dump() << '\n';
      manifest.emit(manifest_target(manifest_flag));
    } else if (*duty) {
      RunManifest manifest("duty-cycle");
      manifest.input(schedule_path);
      std::ifstream in(schedule_path);
      if (!in) throw Error(ErrorCode::kUnreadableSource, "cannot open '" + schedule_path + "'");
      std::vector<lora_indoor::phy::ScheduleEntry> schedule;
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
          j = Json::parse(line);
        } catch (const Json::parse_error& e) {
          throw Error(ErrorCode::kInvalidConfig, std::string("bad schedule line: ") + e.what());
        }
        const Json& cfg = j.contains("config") ? j.at("config") : j;
        schedule.push_back({lora_indoor::io::radio_config_from_json(cfg), j.value("count", 0.0)});
      }
      std::cout << lora_indoor::io::to_json(lora_indoor::phy::duty_cycle(schedule, duty_limit)).dump()
                << '\n';
      manifest.emit(manifest_target(manifest_flag));
    } else if (*lb) {
      RunManifest manifest("link-budget");
      lora_indoor::link::LinkBudgetParams params;
      auto table = lora_indoor::link::default_thresholds();
      if (!lb_params_path.empty()) {
        params = lora_indoor::io::link_budget_from_json(lora_indoor::io::read_json_file(lb_params_path));
        manifest.config("params", lb_params_path);
      }
      if (!lb_thresholds_path.empty()) {
        table = lora_indoor::io::thresholds_from_json(
            lora_indoor::io::read_json_file(lb_thresholds_path));
        manifest.config("thresholds", lb_thresholds_path);
      }
      const double esp = lora_indoor::link::esp(rssi, snr);
      Json out{{"esp_dbm", esp},
               {"noise_dbm", lora_indoor::link::noise_power(rssi, snr)},
               {"exp_pl_db", lora_indoor::link::experimental_path_loss(params, rssi)},
               {"receivable", nullptr}};
      if (lb_sf) out["receivable"] = lora_indoor::link::receivable(esp, snr, *lb_sf, table);
      std::cout << out.dump() << '\n';
      manifest.emit(manifest_target(manifest_flag));
    } else if (*adr_sim) {
      RunManifest manifest("adr-sim");
      manifest.input(trace_path);
      lora_indoor::adr::validate(adr_state);
      std::ifstream in(trace_path);
      if (!in) throw Error(ErrorCode::kUnreadableSource, "cannot open '" + trace_path + "'");
      std::string line;
      std::size_t index = 0;
      auto state = adr_state;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        double value = 0.0;
        try {
          value = std::stod(line);
        } catch (const std::exception&) {
          throw Error(ErrorCode::kInvalidConfig, "bad SNR value '" + line + "'");
        }
        state = lora_indoor::adr::record_snr(std::move(state), value);
        const auto step = lora_indoor::adr::adr_step(state);
        if (step.unspecified_case) {
          std::cerr << fmt::format(
              "warning: step {}: margin {:.2f} dB <= 0 at SF{} above min SF; holding\n", index,
              step.margin_db, state.current_sf);
        }
        state = step.state;
        std::cout << Json{{"index", index},
                          {"snr_db", value},
                          {"margin_db", step.margin_db},
                          {"decision", std::string(lora_indoor::adr::to_string(step.decision))},
                          {"sf", state.current_sf},
                          {"power_dbm", state.current_power_dbm}}
                         .dump()
                  << '\n';
        ++index;
      }
      manifest.emit(manifest_target(manifest_flag));
    } else if (*predict) {
      RunManifest manifest("predict");
      const auto model = lora_indoor::io::model_from_json(lora_indoor::io::read_json_file(model_path));
      manifest.config("model", model_path);
      double pl = 0.0;
      if (model.variant == lora_indoor::propagation::ModelVariant::kMultiWall) {
        pl = lora_indoor::propagation::predict_mw(model, distance, {brick, wood});
      } else {
        Json env = Json::object();
        if (!env_json.empty()) {
          if (fs::exists(env_json)) {
            env = lora_indoor::io::read_json_file(env_json);
          } else {
            try {
              env = Json::parse(env_json);
            } catch (const Json::parse_error& e) {
              throw Error(ErrorCode::kInvalidConfig, std::string("bad --env-json: ") + e.what());
            }
          }
        }
        pl = lora_indoor::propagation::predict_mw_ep(model, distance, {brick, wood}, freq,
                                                     env_from_json(env), pred_snr);
      }
      std::cout << Json{{"variant", std::string(lora_indoor::propagation::to_string(model.variant))},
                        {"path_loss_db", pl}}
                       .dump()
                << '\n';
      manifest.emit(manifest_target(manifest_flag));
    } else if (*simulate) {
      RunManifest manifest("simulate");
      manifest.seed("scene", sim_seed);
      if (sim_preset == "obstructed" && simulate->count("--exponent") == 0) {
        scene.exponent = lora_indoor::propagation::obstructed_scene_preset().exponent;
      }
      const auto points = lora_indoor::propagation::simulate_scene(scene, sim_seed);
      std::string csv = "distance,true_pl,noisy_pl,walls_crossed\n";
      for (const auto& p : points) {
        csv += fmt::format("{},{},{},{}\n", p.distance_m, p.true_pl_db, p.noisy_pl_db, p.walls_crossed);
      }
      if (sim_out.empty()) {
        std::cout << csv;
      } else {
        const auto path = output_path(sim_out);
        write_text(path, csv);
        manifest.output(path);
      }
      manifest.emit(manifest_target(manifest_flag));
    } else if (*pipeline) {
      RunManifest manifest("pipeline run");
      manifest.input(pl_input);
      manifest.seed("split", pl_config.split.seed);
      manifest.seed("isolation_forest", pl_config.anomaly.forest.seed);
      const auto out_dir = output_path(pl_out_dir);
      fs::create_directories(out_dir);

      auto ingested = lora_indoor::pipeline::ingest(fs::path(pl_input), {.defer_non_finite = true});
      auto result = lora_indoor::pipeline::run_pipeline(std::move(ingested), pl_config);

      auto write_records = [&](const std::string& name,
                               const std::vector<lora_indoor::pipeline::ObservationRecord>& rows) {
        std::ostringstream os;
        lora_indoor::pipeline::write_csv(os, rows);
        write_text(out_dir / name, os.str());
        manifest.output(out_dir / name);
      };
      write_records("cleaned.csv", result.cleaned);
      write_records("train.csv", select(result.cleaned, result.partition.train));
      write_records("test.csv", select(result.cleaned, result.partition.test));
      write_text(out_dir / "daily_share.csv", format_share_csv(result.cleaned, result.partition));
      manifest.output(out_dir / "daily_share.csv");
      std::string rej = "line,stage,reason,detail\n";
      for (const auto& r : result.rejections) {
        rej += fmt::format("{},{},{},\"{}\"\n", r.line, r.stage, r.reason, r.detail);
      }
      write_text(out_dir / "rejections.csv", rej);
      manifest.output(out_dir / "rejections.csv");

      const auto& c = result.counts;
      Json stages{{"rows_read", c.rows_read},     {"ingested", c.ingested},
                  {"after_dedup", c.after_dedup}, {"after_sf_filter", c.after_sf_filter},
                  {"after_non_finite", c.after_non_finite}, {"anomalies", c.anomalies},
                  {"cleaned", c.cleaned},         {"train", c.train},
                  {"test", c.test}};
      Json per_device = Json::object();
      for (const auto& [dev, n] : result.anomalies_per_device) per_device[dev] = n;
      auto& m = manifest.extra();
      m["stage_counts"] = stages;
      m["anomalies_per_device"] = per_device;
      m["flags"] = Json{{"contamination", pl_config.anomaly.forest.contamination},
                        {"n_trees", pl_config.anomaly.forest.n_trees},
                        {"subsample_size", pl_config.anomaly.forest.subsample_size},
                        {"dedup_window_s", pl_config.dedup_window_s},
                        {"excluded_sf", pl_config.excluded_sf},
                        {"test_fraction", pl_config.split.test_fraction}};
      m["derived_column_violations"] = result.audit.size();
      for (const auto& v : result.audit) {
        std::cerr << fmt::format("warning: row {} {}: stored {} vs recomputed {}\n", v.index, v.field,
                                 v.stored, v.recomputed);
      }
      std::cout << stages.dump() << '\n';
      manifest.emit(manifest_flag.empty() ? std::optional<fs::path>(out_dir / "manifest.json")
                                          : manifest_target(manifest_flag));
    } else if (*fit) {
      RunManifest manifest("fit");
      lora_indoor::fitting::FitConfig config;
      if (!fit_config_path.empty()) {
        config = lora_indoor::io::fit_config_from_json(lora_indoor::io::read_json_file(fit_config_path));
        manifest.config("fit", fit_config_path);
      }
      const auto observations = load_observations(fit_input, manifest);
      const auto variant = lora_indoor::propagation::parse_variant(fit_variant);
      const auto report = lora_indoor::fitting::fit(observations, variant, config);
      if (!report.converged) {
        std::cerr << fmt::format("warning: no convergence after {} iterations\n", report.iterations);
      }
      if (!fit_out.empty()) {
        const auto path = output_path(fit_out);
        ensure_parent(path);
        lora_indoor::io::write_json_file(path, lora_indoor::io::to_json(report.model()));
        manifest.output(path);
      }
      const auto report_json = lora_indoor::io::to_json(report);
      if (!fit_report.empty()) {
        const auto path = output_path(fit_report);
        ensure_parent(path);
        lora_indoor::io::write_json_file(path, report_json);
        manifest.output(path);
      } else {
        std::cout << report_json.dump(2) << '\n';
      }
      manifest.emit(manifest_target(manifest_flag));
    } else if (*evaluate) {
      RunManifest manifest("evaluate");
      const auto model = lora_indoor::io::model_from_json(lora_indoor::io::read_json_file(ev_model));
      manifest.config("model", ev_model);
      const auto observations = load_observations(ev_input, manifest);
      const auto report = lora_indoor::io::to_json(lora_indoor::metrics::evaluate(model, observations));
      if (!ev_report.empty()) {
        const auto path = output_path(ev_report);
        ensure_parent(path);
        lora_indoor::io::write_json_file(path, report);
        manifest.output(path);
      } else {
        std::cout << report.dump(2) << '\n';
      }
      manifest.emit(manifest_target(manifest_flag));
    } else if (*cv) {
      RunManifest manifest("cross-validate");
      manifest.seed("kfold", cv_seed);
      lora_indoor::fitting::FitConfig config;
      if (!cv_config_path.empty()) {
        config = lora_indoor::io::fit_config_from_json(lora_indoor::io::read_json_file(cv_config_path));
        manifest.config("fit", cv_config_path);
      }
      const auto observations = load_observations(cv_input, manifest);
      const auto report = lora_indoor::metrics::cross_validate(
          observations, lora_indoor::propagation::parse_variant(cv_variant), cv_folds, cv_seed, config);
      auto out = lora_indoor::io::to_json(report);
      out["variant"] = cv_variant;
      out["folds_requested"] = cv_folds;
      out["seed"] = cv_seed;
      if (!cv_report.empty()) {
        const auto path = output_path(cv_report);
        ensure_parent(path);
        lora_indoor::io::write_json_file(path, out);
        manifest.output(path);
      } else {
        std::cout << out.dump(2) << '\n';
      }
      manifest.emit(manifest_target(manifest_flag));
    }
  } catch (const Error& e) {
    std::cerr << "error [" << lora_indoor::to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
