#include "lora_indoor/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <tuple>

#include <fmt/format.h>

#include "lora_indoor/error.hpp"

namespace lora_indoor::pipeline {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

enum class Parse { kOk, kMissing, kNonFinite, kBad };

Parse parse_double(std::string_view text, double& out) {
  if (text.empty()) return Parse::kMissing;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "nan" || lowered == "none" || lowered == "null" || lowered == "na") {
      return Parse::kMissing;
    }
    return Parse::kBad;
  }
  if (std::isnan(out)) return Parse::kMissing;
  return std::isfinite(out) ? Parse::kOk : Parse::kNonFinite;
}

// Integral field that may have been exported as "12.0".
Parse parse_integer(std::string_view text, std::int64_t& out) {
  double v = 0.0;
  const auto status = parse_double(text, v);
  if (status != Parse::kOk) return status;
  if (v != std::floor(v) || std::fabs(v) > 9.0e15) return Parse::kBad;
  out = static_cast<std::int64_t>(v);
  return Parse::kOk;
}

std::string_view reason_of(Parse p) {
  switch (p) {
    case Parse::kMissing: return "missing-value";
    case Parse::kNonFinite: return "non-finite";
    case Parse::kBad: return "parse-error";
    case Parse::kOk: break;
  }
  return "ok";
}

std::string civil_date(double time_s) {
  using namespace std::chrono;
  const auto days = static_cast<int>(std::floor(time_s / 86400.0));
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

bool all_finite(const ObservationRecord& r) {
  for (double v : {r.time_s, r.co2_ppm, r.humidity_pct, r.pm25_ugm3, r.pressure_hpa,
                   r.temperature_c, r.rssi_dbm, r.snr_db, r.frequency_mhz, r.toa_s, r.distance_m,
                   r.exp_pl_db, r.n_power_dbm, r.esp_dbm}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "time",  "device_id", "co2",       "humidity", "pm25",     "pressure", "temperature",
      "rssi",  "snr",       "SF",        "frequency", "f_count", "p_count",  "toa",
      "distance", "c_walls", "w_walls",  "exp_pl",   "n_power",  "esp"};
  return columns;
}

bool parse_timestamp(std::string_view text, double& seconds) {
  text = trim(text);
  // YYYY-MM-DD[ T]hh:mm:ss
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T') ||
      text[13] != ':' || text[16] != ':') {
    return false;
  }
  auto field = [&](std::size_t pos, std::size_t len, int& out) {
    const auto* b = text.data() + pos;
    const auto [ptr, ec] = std::from_chars(b, b + len, out);
    return ec == std::errc() && ptr == b + len;
  };
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!field(0, 4, y) || !field(5, 2, mo) || !field(8, 2, d) || !field(11, 2, h) ||
      !field(14, 2, mi) || !field(17, 2, s)) {
    return false;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return false;
  double frac = 0.0;
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    std::size_t end = pos + 1;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    if (end == pos + 1) return false;
    std::string digits = "0" + std::string(text.substr(pos, end - pos));
    frac = std::stod(digits);
    pos = end;
  }
  // Remaining text may only be a zone designator (Z, +hh:mm, -hhmm); ignored.
  if (pos < text.size()) {
    const char c = text[pos];
    if (c != 'Z' && c != '+' && c != '-' && c != ' ') return false;
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  seconds = static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + s + frac;
  return true;
}

IngestResult ingest(std::istream& in, const IngestOptions& options) {
  IngestResult result;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedHeader, "input has no header line");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_fields(line);
  const auto& names = csv_columns();
  std::vector<std::size_t> col(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    auto it = std::find(header.begin(), header.end(), names[k]);
    if (it == header.end()) {
      throw Error(ErrorCode::kMalformedHeader, "missing required column '" + names[k] + "'");
    }
    col[k] = static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t width = header.size();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++result.rows_read;
    const auto f = split_fields(line);
    auto reject = [&](std::string_view reason, std::string detail) {
      result.rejections.push_back({line_no, "ingest", std::string(reason), std::move(detail)});
    };
    if (f.size() != width) {
      reject("malformed-row", fmt::format("expected {} fields, got {}", width, f.size()));
      continue;
    }
    auto text = [&](std::size_t k) { return f[col[k]]; };

    ObservationRecord r;
    r.time = std::string(text(0));
    if (r.time.empty()) {
      reject("missing-value", "time");
      continue;
    }
    if (!parse_timestamp(r.time, r.time_s)) {
      reject("parse-error", "time '" + r.time + "'");
      continue;
    }
    r.device_id = std::string(text(1));
    if (r.device_id.empty()) {
      reject("missing-value", "device_id");
      continue;
    }

    bool ok = true;
    // Fields the counter logic and geometry depend on are always strict.
    auto strict_int = [&](std::size_t k, std::int64_t& out) {
      if (!ok) return;
      const auto status = parse_integer(text(k), out);
      if (status != Parse::kOk) {
        reject(reason_of(status), names[k]);
        ok = false;
      }
    };
    auto number = [&](std::size_t k, double& out) {
      if (!ok) return;
      const auto status = parse_double(text(k), out);
      if (status == Parse::kOk) return;
      if (status != Parse::kBad && options.defer_non_finite) {
        if (status == Parse::kMissing) out = kNaN;
        return;
      }
      reject(reason_of(status), names[k]);
      ok = false;
    };

    std::int64_t sf = 0, c_walls = 0, w_walls = 0;
    number(2, r.co2_ppm);
    number(3, r.humidity_pct);
    number(4, r.pm25_ugm3);
    number(5, r.pressure_hpa);
    number(6, r.temperature_c);
    number(7, r.rssi_dbm);
    number(8, r.snr_db);
    strict_int(9, sf);
    number(10, r.frequency_mhz);
    strict_int(11, r.f_count);
    strict_int(12, r.p_count);
    number(13, r.toa_s);
    number(14, r.distance_m);
    strict_int(15, c_walls);
    strict_int(16, w_walls);
    number(17, r.exp_pl_db);
    number(18, r.n_power_dbm);
    number(19, r.esp_dbm);
    if (!ok) continue;
    r.sf = static_cast<int>(sf);
    r.c_walls = static_cast<int>(c_walls);
    r.w_walls = static_cast<int>(w_walls);

    // NaN comparisons are false, so deferred missing values pass these checks.
    std::string range_error;
    if (sf < 7 || sf > 12) range_error = "SF";
    else if (r.distance_m <= 0.0) range_error = "distance";
    else if (c_walls < 0 || w_walls < 0) range_error = "wall count";
    else if (r.humidity_pct < 0.0 || r.humidity_pct > 100.0) range_error = "humidity";
    else if (r.co2_ppm <= 0.0) range_error = "co2";
    else if (r.pm25_ugm3 < 0.0) range_error = "pm25";
    else if (r.frequency_mhz <= 0.0) range_error = "frequency";
    if (!range_error.empty()) {
      reject("out-of-range", range_error);
      continue;
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUnreadableSource, "cannot open '" + path.string() + "'");
  return ingest(in, options);
}

void write_csv(std::ostream& out, const std::vector<ObservationRecord>& records) {
  const auto& names = csv_columns();
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.time,
                       r.device_id, r.co2_ppm, r.humidity_pct, r.pm25_ugm3, r.pressure_hpa,
                       r.temperature_c, r.rssi_dbm, r.snr_db, r.sf, r.frequency_mhz, r.f_count,
                       r.p_count, r.toa_s, r.distance_m, r.c_walls, r.w_walls, r.exp_pl_db,
                       r.n_power_dbm, r.esp_dbm);
  }
}

bool canonical_less(const ObservationRecord& a, const ObservationRecord& b) {
  auto key = [](const ObservationRecord& r) {
    return std::tie(r.device_id, r.time_s, r.f_count, r.time, r.sf, r.rssi_dbm, r.snr_db,
                    r.frequency_mhz, r.p_count, r.co2_ppm, r.humidity_pct, r.pm25_ugm3,
                    r.pressure_hpa, r.temperature_c, r.toa_s, r.distance_m, r.c_walls, r.w_walls,
                    r.exp_pl_db, r.n_power_dbm, r.esp_dbm);
  };
  return key(a) < key(b);
}

std::vector<ObservationRecord> dedup_retransmissions(std::vector<ObservationRecord> records,
                                                     double window_s) {
  std::stable_sort(records.begin(), records.end(), canonical_less);
  std::vector<ObservationRecord> out;
  out.reserve(records.size());
  for (auto& r : records) {
    if (!out.empty()) {
      const auto& last = out.back();
      if (last.device_id == r.device_id && last.f_count == r.f_count &&
          r.time_s - last.time_s <= window_s) {
        continue;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ObservationRecord> filter_sf(std::vector<ObservationRecord> records,
                                         const std::set<int>& excluded) {
  std::erase_if(records, [&](const ObservationRecord& r) { return excluded.contains(r.sf); });
  return records;
}

std::vector<ObservationRecord> remove_non_finite(std::vector<ObservationRecord> records,
                                                 std::vector<Rejection>* log) {
  std::vector<ObservationRecord> out;
  out.reserve(records.size());
  for (auto& r : records) {
    if (all_finite(r)) {
      out.push_back(std::move(r));
    } else if (log) {
      log->push_back({0, "non-finite", "missing-value", r.device_id + " @ " + r.time});
    }
  }
  return out;
}

const std::vector<Feature>& default_features() {
  static const std::vector<Feature> f = {Feature::kCo2,         Feature::kHumidity, Feature::kPm25,
                                         Feature::kPressure,    Feature::kTemperature,
                                         Feature::kRssi,        Feature::kSnr};
  return f;
}

std::string_view to_string(Feature feature) noexcept {
  switch (feature) {
    case Feature::kCo2: return "co2";
    case Feature::kHumidity: return "humidity";
    case Feature::kPm25: return "pm25";
    case Feature::kPressure: return "pressure";
    case Feature::kTemperature: return "temperature";
    case Feature::kRssi: return "rssi";
    case Feature::kSnr: return "snr";
  }
  return "";
}

double feature_value(const ObservationRecord& r, Feature feature) noexcept {
  switch (feature) {
    case Feature::kCo2: return r.co2_ppm;
    case Feature::kHumidity: return r.humidity_pct;
    case Feature::kPm25: return r.pm25_ugm3;
    case Feature::kPressure: return r.pressure_hpa;
    case Feature::kTemperature: return r.temperature_c;
    case Feature::kRssi: return r.rssi_dbm;
    case Feature::kSnr: return r.snr_db;
  }
  return 0.0;
}

Eigen::MatrixXd feature_matrix(const std::vector<ObservationRecord>& records,
                               const std::vector<Feature>& features) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(records.size()),
                    static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t j = 0; j < features.size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          feature_value(records[i], features[j]);
    }
  }
  return x;
}

StandardScaler StandardScaler::fit(const Eigen::MatrixXd& x, ZeroVariance policy) {
  if (x.rows() < 2) throw Error(ErrorCode::kTooFewRecords, "standardization needs >= 2 rows");
  StandardScaler s;
  s.mean = x.colwise().mean();
  s.scale = ((x.rowwise() - s.mean).array().square().colwise().mean()).sqrt();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (s.scale[j] > 0.0) continue;
    if (policy == ZeroVariance::kError) {
      throw Error(ErrorCode::kZeroVarianceFeature,
                  "feature column " + std::to_string(j) + " has zero variance");
    }
    s.scale[j] = 1.0;
  }
  return s;
}

Eigen::MatrixXd StandardScaler::transform(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean).array().rowwise() / scale.array();
}

Standardized standardize(const Eigen::MatrixXd& x) {
  auto scaler = StandardScaler::fit(x);
  return {scaler.transform(x), std::move(scaler)};
}

AnomalyFilterResult reject_anomalies(const std::vector<ObservationRecord>& records,
                                     const AnomalyFilterConfig& config) {
  validate(config.forest);
  std::map<std::string, std::vector<std::size_t>> by_device;
  for (std::size_t i = 0; i < records.size(); ++i) by_device[records[i].device_id].push_back(i);

  std::vector<bool> flagged(records.size(), false);
  AnomalyFilterResult result;
  for (const auto& [device, rows] : by_device) {
    std::size_t count = 0;
    if (rows.size() >= 2) {
      std::vector<ObservationRecord> subset;
      subset.reserve(rows.size());
      for (auto i : rows) subset.push_back(records[i]);
      const auto x = feature_matrix(subset, config.features);
      const auto scaled =
          StandardScaler::fit(x, StandardScaler::ZeroVariance::kUnitScale).transform(x);
      const auto anomalies = isolation_forest(scaled, config.forest);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (anomalies.flags[k]) {
          flagged[rows[k]] = true;
          ++count;
        }
      }
    }
    result.flagged_per_device[device] = count;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    (flagged[i] ? result.flagged : result.kept).push_back(records[i]);
  }
  return result;
}

void validate(const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "test fraction must be in (0, 1)");
  }
  if (spec.folds < 2) throw Error(ErrorCode::kInvalidConfig, "need at least 2 folds");
}

SplitResult split(std::size_t record_count, const SplitSpec& spec) {
  validate(spec);
  if (record_count < 2) throw Error(ErrorCode::kTooFewRecords, "split needs at least 2 records");
  auto n_test = static_cast<std::size_t>(
      std::ceil(spec.test_fraction * static_cast<double>(record_count) - 1e-9));
  n_test = std::clamp<std::size_t>(n_test, 1, record_count - 1);

  const auto perm = permutation(record_count, spec.seed);
  SplitResult out;
  out.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

std::map<std::string, double> daily_share(const std::vector<ObservationRecord>& records,
                                          const std::vector<std::size_t>& indices) {
  std::map<std::string, double> share;
  if (indices.empty()) return share;
  for (auto i : indices) share[civil_date(records.at(i).time_s)] += 1.0;
  for (auto& [day, v] : share) v = 100.0 * v / static_cast<double>(indices.size());
  return share;
}

std::map<std::string, double> daily_share(const std::vector<ObservationRecord>& records) {
  std::vector<std::size_t> all(records.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return daily_share(records, all);
}

std::vector<Fold> kfold(std::size_t record_count, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::kInvalidConfig, "need at least 2 folds");
  if (record_count < folds) {
    throw Error(ErrorCode::kTooFewRecords,
                fmt::format("{} records cannot fill {} folds", record_count, folds));
  }
  const auto perm = permutation(record_count, seed);
  std::vector<Fold> out(folds);
  std::size_t start = 0;
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t size = record_count / folds + (k < record_count % folds ? 1 : 0);
    auto& fold = out[k];
    fold.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(start),
                           perm.begin() + static_cast<std::ptrdiff_t>(start + size));
    std::sort(fold.validation.begin(), fold.validation.end());
    fold.train.reserve(record_count - size);
    std::size_t v = 0;
    for (std::size_t i = 0; i < record_count; ++i) {
      if (v < fold.validation.size() && fold.validation[v] == i) {
        ++v;
      } else {
        fold.train.push_back(i);
      }
    }
    start += size;
  }
  return out;
}

std::vector<AuditViolation> audit_derived_columns(const std::vector<ObservationRecord>& records,
                                                  const link::LinkBudgetParams& params,
                                                  double tolerance_db) {
  std::vector<AuditViolation> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto check = [&](const char* field, double stored, double recomputed) {
      if (std::isfinite(stored) && std::isfinite(recomputed) &&
          std::fabs(stored - recomputed) >= tolerance_db) {
        out.push_back({i, field, stored, recomputed});
      }
    };
    check("exp_pl", r.exp_pl_db, link::experimental_path_loss(params, r.rssi_dbm));
    check("esp", r.esp_dbm, link::esp(r.rssi_dbm, r.snr_db));
    check("n_power", r.n_power_dbm, link::noise_power(r.rssi_dbm, r.snr_db));
  }
  return out;
}

fitting::Observation to_observation(const ObservationRecord& r) {
  fitting::Observation o;
  o.distance_m = r.distance_m;
  o.walls = {r.c_walls, r.w_walls};
  o.frequency_mhz = r.frequency_mhz;
  o.env = {r.temperature_c, r.humidity_pct, r.pressure_hpa, r.pm25_ugm3, r.co2_ppm};
  o.snr_db = r.snr_db;
  o.path_loss_db = r.exp_pl_db;
  return o;
}

std::vector<fitting::Observation> to_observations(const std::vector<ObservationRecord>& records) {
  std::vector<fitting::Observation> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(to_observation(r));
  return out;
}

PipelineResult run_pipeline(IngestResult ingested, const PipelineConfig& config) {
  PipelineResult result;
  result.counts.rows_read = ingested.rows_read;
  result.counts.ingested = ingested.records.size();
  result.rejections = std::move(ingested.rejections);

  auto records = dedup_retransmissions(std::move(ingested.records), config.dedup_window_s);
  result.counts.after_dedup = records.size();
  records = filter_sf(std::move(records), config.excluded_sf);
  result.counts.after_sf_filter = records.size();
  records = remove_non_finite(std::move(records), &result.rejections);
  result.counts.after_non_finite = records.size();

  auto filtered = reject_anomalies(records, config.anomaly);
  result.counts.anomalies = filtered.flagged.size();
  result.anomalies_per_device = std::move(filtered.flagged_per_device);
  result.cleaned = std::move(filtered.kept);
  result.counts.cleaned = result.cleaned.size();

  if (result.cleaned.size() >= 2) {
    result.partition = split(result.cleaned.size(), config.split);
  } else {
    validate(config.split);
  }
  result.counts.train = result.partition.train.size();
  result.counts.test = result.partition.test.size();
  result.audit = audit_derived_columns(result.cleaned, config.link_budget);
  return result;
}

}  // namespace lora_indoor::pipeline
