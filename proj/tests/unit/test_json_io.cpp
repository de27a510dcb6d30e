#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lora_indoor/error.hpp"
#include "lora_indoor/json_io.hpp"

using namespace lora_indoor;
using io::Json;

TEST_CASE("model round trip") {
  for (const auto& m : {propagation::reference_mw_model(), propagation::reference_mw_ep_model()}) {
    const auto back = io::model_from_json(Json::parse(io::to_json(m).dump()));
    CHECK(propagation::to_parameters(back) == propagation::to_parameters(m));
    CHECK(back.variant == m.variant);
    CHECK(back.shadowing_sigma_db == m.shadowing_sigma_db);
  }
}

TEST_CASE("bad model JSON") {
  auto code = [](const Json& j) {
    try {
      io::model_from_json(j);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kEmpty;
  };
  CHECK(code(Json::array()) == ErrorCode::kInvalidConfig);
  CHECK(code(Json{{"variant", "mw"}}) == ErrorCode::kInvalidModel);
  auto j = io::to_json(propagation::reference_mw_model());
  j["variant"] = "cost231";
  CHECK(code(j) == ErrorCode::kInvalidModel);
}

TEST_CASE("configs") {
  const auto p = io::link_budget_from_json(Json{{"tx_power_dbm", 10}});
  CHECK(p.tx_power_dbm == 10);
  CHECK(p.rx_antenna_gain_dbi == 3);
  const auto t = io::thresholds_from_json(Json::parse(R"({"thresholds":[{"sf":7,"snr_req_db":-6}]})"));
  CHECK(t[0].snr_req_db == -6);
  CHECK(t[0].sensitivity_dbm == -123);
  CHECK_THROWS_AS(io::thresholds_from_json(Json::parse(R"({"thresholds":[{"sf":5}]})")), Error);
  const auto c = io::radio_config_from_json(Json{{"sf", 9}, {"payload_bytes", 20}});
  CHECK(c.sf == 9);
  CHECK_THROWS_AS(io::radio_config_from_json(Json{{"sf", 14}}), Error);
  const auto f = io::fit_config_from_json(Json{{"max_iterations", 50}});
  CHECK(f.max_iterations == 50);
}

TEST_CASE("files and digests") {
  const auto dir = std::filesystem::temp_directory_path() / "lora_indoor_json_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.json";
  io::write_json_file(path, io::to_json(propagation::reference_mw_model()));
  const auto d1 = io::file_digest(path);
  CHECK(d1.size() == 16);
  CHECK(io::read_json_file(path)["variant"] == "mw");
  io::write_json_file(path, io::to_json(propagation::reference_mw_ep_model()));
  CHECK(io::file_digest(path) != d1);
  CHECK(io::file_digest(dir / "missing") == "");
  std::ofstream(dir / "bad.json") << "{nope";
  CHECK_THROWS_AS(io::read_json_file(dir / "bad.json"), Error);
  std::filesystem::remove_all(dir);
}
