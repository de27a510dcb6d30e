#include <fstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lora_indoor/adr.hpp"
#include "lora_indoor/error.hpp"
#include "lora_indoor/fitting.hpp"
#include "lora_indoor/isolation_forest.hpp"
#include "lora_indoor/json_io.hpp"
#include "lora_indoor/link_budget.hpp"
#include "lora_indoor/lora_phy.hpp"
#include "lora_indoor/metrics.hpp"
#include "lora_indoor/pipeline.hpp"
#include "lora_indoor/propagation.hpp"

namespace py = pybind11;
using namespace lora_indoor;

namespace {

// Models cross the boundary as the same JSON dicts the CLI reads and writes.
py::object to_py(const io::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

io::Json from_py(const py::object& o) {
  return io::Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LoRaWAN indoor propagation toolkit";
  m.attr("__version__") = LORA_INDOOR_VERSION;

  py::register_exception<Error>(m, "LoraIndoorError", PyExc_ValueError);

  // PHY
  py::class_<phy::RadioConfig>(m, "RadioConfig")
      .def(py::init([](int sf, double bw_hz, int cr_index, int preamble_symbols, int payload_bytes, bool crc_on,
                       bool implicit_header, bool low_dr_opt) {
             return phy::RadioConfig{sf, bw_hz, cr_index, preamble_symbols, payload_bytes, crc_on,
                                     implicit_header, low_dr_opt};
           }),
           py::arg("sf") = 7, py::arg("bw_hz") = 125000.0, py::arg("cr_index") = 1, py::arg("preamble_symbols") = 8,
           py::arg("payload_bytes") = 18, py::arg("crc_on") = true, py::arg("implicit_header") = false,
           py::arg("low_dr_opt") = false)
      .def_readwrite("sf", &phy::RadioConfig::sf)
      .def_readwrite("bw_hz", &phy::RadioConfig::bw_hz)
      .def_readwrite("cr_index", &phy::RadioConfig::cr_index)
      .def_readwrite("preamble_symbols", &phy::RadioConfig::preamble_symbols)
      .def_readwrite("payload_bytes", &phy::RadioConfig::payload_bytes)
      .def_readwrite("crc_on", &phy::RadioConfig::crc_on)
      .def_readwrite("implicit_header", &phy::RadioConfig::implicit_header)
      .def_readwrite("low_dr_opt", &phy::RadioConfig::low_dr_opt);
  m.def("symbol_duration", &phy::symbol_duration, "Symbol time in seconds.");
  m.def("bit_rate", &phy::bit_rate, "Raw bit rate in bit/s.");
  m.def("payload_symbols", &phy::payload_symbols);
  m.def("time_on_air", &phy::time_on_air, "Time on air in seconds.");
  m.def(
      "duty_cycle",
      [](const std::vector<std::pair<phy::RadioConfig, double>>& schedule, double limit) {
        std::vector<phy::ScheduleEntry> entries;
        for (const auto& [cfg, n] : schedule) entries.push_back({cfg, n});
        return to_py(io::to_json(phy::duty_cycle(entries, limit)));
      },
      py::arg("schedule"), py::arg("limit") = phy::kDefaultDutyCycleLimit,
      "Hourly airtime of [(RadioConfig, transmissions_per_hour), ...] as a dict.");

  // Link budget
  m.def("esp", &link::esp, py::arg("rssi_dbm"), py::arg("snr_db"));
  m.def("noise_power", &link::noise_power, py::arg("rssi_dbm"), py::arg("snr_db"));
  m.def(
      "experimental_path_loss",
      [](double rssi, const py::object& params) {
        const auto p = params.is_none() ? link::LinkBudgetParams{} : io::link_budget_from_json(from_py(params));
        return link::experimental_path_loss(p, rssi);
      },
      py::arg("rssi_dbm"), py::arg("params") = py::none());
  m.def(
      "receivable", [](double esp, double snr, int sf) { return link::receivable(esp, snr, sf); },
      py::arg("esp_dbm"), py::arg("snr_db"), py::arg("sf"));

  // ADR
  py::class_<adr::AdrState>(m, "AdrState")
      .def(py::init<>())
      .def_readwrite("current_sf", &adr::AdrState::current_sf)
      .def_readwrite("current_power_dbm", &adr::AdrState::current_power_dbm)
      .def_readwrite("history_capacity", &adr::AdrState::history_capacity)
      .def_readwrite("fade_margin_db", &adr::AdrState::fade_margin_db)
      .def_readwrite("power_step_db", &adr::AdrState::power_step_db)
      .def_readwrite("max_power_dbm", &adr::AdrState::max_power_dbm)
      .def_readwrite("min_sf", &adr::AdrState::min_sf)
      .def_property_readonly("snr_history",
                             [](const adr::AdrState& s) { return std::vector<double>(s.snr_history.begin(), s.snr_history.end()); })
      .def("record_snr", [](const adr::AdrState& s, double v) { return adr::record_snr(s, v); })
      .def("snr_margin", [](const adr::AdrState& s) { return adr::snr_margin(s); })
      .def("step", [](const adr::AdrState& s) {
        const auto r = adr::adr_step(s);
        return py::make_tuple(r.state, std::string(adr::to_string(r.decision)), r.margin_db, r.unspecified_case);
      }, "Returns (new_state, decision, margin_db, unspecified_case).");

  // Propagation
  m.def("reference_model", [](const std::string& variant) {
    return to_py(io::to_json(propagation::parse_variant(variant) == propagation::ModelVariant::kMultiWall
                                 ? propagation::reference_mw_model()
                                 : propagation::reference_mw_ep_model()));
  }, py::arg("variant"));
  m.def(
      "predict",
      [](const py::object& model, double distance, int brick, int wood, double freq, const py::dict& env,
         double snr) {
        const auto mdl = io::model_from_json(from_py(model));
        if (mdl.variant == propagation::ModelVariant::kMultiWall) {
          return propagation::predict_mw(mdl, distance, {brick, wood});
        }
        propagation::EnvVector e;
        auto get = [&](const char* k, double& out) {
          if (env.contains(k)) out = env[k].cast<double>();
        };
        get("temperature", e.temperature_c);
        get("humidity", e.humidity_pct);
        get("pressure", e.pressure_hpa);
        get("pm25", e.pm25_ugm3);
        get("co2", e.co2_ppm);
        return propagation::predict_mw_ep(mdl, distance, {brick, wood}, freq, e, snr);
      },
      py::arg("model"), py::arg("distance_m"), py::arg("brick") = 0, py::arg("wood") = 0,
      py::arg("freq_mhz") = 868.1, py::arg("env") = py::dict(), py::arg("snr_db") = 0.0);
  m.def("shadowing_pdf", [](double sigma, double eps) { return propagation::shadowing_pdf({sigma, 0.0}, eps); },
        py::arg("sigma_db"), py::arg("eps_linear"));
  m.def(
      "sample_shadowing",
      [](double sigma, std::uint64_t seed, std::size_t count) {
        const auto v = propagation::sample_shadowing({sigma, 0.0}, seed, count);
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
      },
      py::arg("sigma_db"), py::arg("seed"), py::arg("count"));
  m.def(
      "simulate_scene",
      [](std::uint64_t seed, double exponent, double sigma, double max_distance, std::size_t points) {
        auto spec = propagation::indoor_scene_preset();
        spec.exponent = exponent;
        spec.sigma_db = sigma;
        spec.max_distance_m = max_distance;
        spec.points = points;
        const auto pts = propagation::simulate_scene(spec, seed);
        Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), 4);
        for (std::size_t i = 0; i < pts.size(); ++i) {
          out.row(static_cast<Eigen::Index>(i)) << pts[i].distance_m, pts[i].true_pl_db, pts[i].noisy_pl_db,
              pts[i].walls_crossed;
        }
        return out;
      },
      py::arg("seed") = 42, py::arg("exponent") = 3.5, py::arg("sigma_db") = 9.0, py::arg("max_distance_m") = 50.0,
      py::arg("points") = 500, "Columns: distance, true PL, noisy PL, walls crossed.");

  // Fitting and metrics on cleaned CSV files
  m.def(
      "fit_csv",
      [](const std::filesystem::path& path, const std::string& variant) {
        const auto obs = pipeline::to_observations(pipeline::ingest(path).records);
        const auto report = fitting::fit(obs, propagation::parse_variant(variant));
        auto out = io::to_json(report);
        out["model"] = io::to_json(report.model());
        return to_py(out);
      },
      py::arg("path"), py::arg("variant") = "mw", "Fit report dict with a 'model' entry.");
  m.def(
      "evaluate_csv",
      [](const py::object& model, const std::filesystem::path& path) {
        const auto obs = pipeline::to_observations(pipeline::ingest(path).records);
        return to_py(io::to_json(metrics::evaluate(io::model_from_json(from_py(model)), obs)));
      },
      py::arg("model"), py::arg("path"));
  m.def(
      "cross_validate_csv",
      [](const std::filesystem::path& path, const std::string& variant, std::size_t folds, std::uint64_t seed) {
        const auto obs = pipeline::to_observations(pipeline::ingest(path).records);
        return to_py(io::to_json(metrics::cross_validate(obs, propagation::parse_variant(variant), folds, seed)));
      },
      py::arg("path"), py::arg("variant") = "mw-ep", py::arg("folds") = 5, py::arg("seed") = 42);
  m.def("rmse", [](const std::vector<double>& a, const std::vector<double>& p) { return metrics::rmse(a, p); });
  m.def("r_squared",
        [](const std::vector<double>& a, const std::vector<double>& p) { return metrics::r_squared(a, p); });
  m.def("pdr", [](const std::vector<std::int64_t>& c) { return metrics::pdr(c); });

  // Pipeline
  m.def(
      "isolation_forest",
      [](const Eigen::MatrixXd& x, double contamination, std::size_t n_trees, std::size_t subsample,
         std::uint64_t seed) {
        const auto r = pipeline::isolation_forest(x, {n_trees, subsample, contamination, seed});
        return py::make_tuple(r.scores, std::vector<bool>(r.flags.begin(), r.flags.end()));
      },
      py::arg("x"), py::arg("contamination") = 0.01, py::arg("n_trees") = 100, py::arg("subsample_size") = 256,
      py::arg("seed") = 42, "Returns (scores, flags).");
  m.def(
      "run_pipeline",
      [](const std::filesystem::path& input, const std::filesystem::path& out_dir, std::uint64_t seed,
         double contamination) {
        pipeline::PipelineConfig cfg;
        cfg.split.seed = seed;
        cfg.anomaly.forest.contamination = contamination;
        const auto r = pipeline::run_pipeline(pipeline::ingest(input, {.defer_non_finite = true}), cfg);
        std::filesystem::create_directories(out_dir);
        auto write = [&](const char* name, const std::vector<std::size_t>* idx) {
          std::vector<pipeline::ObservationRecord> rows;
          if (idx) {
            for (auto i : *idx) rows.push_back(r.cleaned[i]);
          }
          std::ofstream os(out_dir / name, std::ios::binary);
          pipeline::write_csv(os, idx ? rows : r.cleaned);
        };
        write("cleaned.csv", nullptr);
        write("train.csv", &r.partition.train);
        write("test.csv", &r.partition.test);
        const auto& c = r.counts;
        py::dict counts;
        counts["rows_read"] = c.rows_read;
        counts["ingested"] = c.ingested;
        counts["after_dedup"] = c.after_dedup;
        counts["after_sf_filter"] = c.after_sf_filter;
        counts["after_non_finite"] = c.after_non_finite;
        counts["anomalies"] = c.anomalies;
        counts["cleaned"] = c.cleaned;
        counts["train"] = c.train;
        counts["test"] = c.test;
        return counts;
      },
      py::arg("input"), py::arg("out_dir"), py::arg("seed") = 42, py::arg("contamination") = 0.01,
      "Runs every stage and writes cleaned/train/test CSVs; returns the stage counts.");
}
