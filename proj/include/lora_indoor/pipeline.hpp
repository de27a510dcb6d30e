#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lora_indoor/fitting.hpp"
#include "lora_indoor/isolation_forest.hpp"
#include "lora_indoor/link_budget.hpp"

namespace lora_indoor::pipeline {

/// One row of the measurement CSV. `time_s` is the naive local wall-clock
/// time in seconds since 1970-01-01 (no time-zone or DST adjustment);
/// `time` keeps the original text for output.
struct ObservationRecord {
  std::string time;
  double time_s = 0.0;
  std::string device_id;
  double co2_ppm = 0.0;
  double humidity_pct = 0.0;
  double pm25_ugm3 = 0.0;
  double pressure_hpa = 0.0;
  double temperature_c = 0.0;
  double rssi_dbm = 0.0;
  double snr_db = 0.0;
  int sf = 7;
  double frequency_mhz = 0.0;
  std::int64_t f_count = 0;
  std::int64_t p_count = 0;
  double toa_s = 0.0;
  double distance_m = 0.0;
  int c_walls = 0;
  int w_walls = 0;
  double exp_pl_db = 0.0;
  double n_power_dbm = 0.0;
  double esp_dbm = 0.0;
};

/// Column names of the measurement CSV, in canonical output order.
const std::vector<std::string>& csv_columns();

/// Parses "YYYY-MM-DD hh:mm:ss[.fff]" (also with 'T'); a trailing zone
/// designator is ignored. Returns false on malformed input.
bool parse_timestamp(std::string_view text, double& seconds);

struct Rejection {
  std::size_t line = 0;  // 1-based line in the source (header is line 1)
  std::string stage;
  std::string reason;  // missing-value, non-finite, parse-error, out-of-range, malformed-row
  std::string detail;
};

struct IngestOptions {
  // Keep rows whose numeric fields are empty/NaN/inf so a later
  // remove_non_finite() pass can drop them. Identity, counter and SF fields
  // must still parse.
  bool defer_non_finite = false;
};

struct IngestResult {
  std::vector<ObservationRecord> records;
  std::vector<Rejection> rejections;
  std::size_t rows_read = 0;
};

/// Reads the CSV. Throws kMalformedHeader if a required column is missing and
/// kUnreadableSource if the file cannot be opened.
IngestResult ingest(std::istream& in, const IngestOptions& options = {});
IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options = {});

void write_csv(std::ostream& out, const std::vector<ObservationRecord>& records);

/// Total order used for the canonical (device, time) arrangement.
bool canonical_less(const ObservationRecord& a, const ObservationRecord& b);

/// Per device in time order, drops a record repeating the previous kept
/// record's frame counter within `window_s` seconds. Output is sorted by
/// (device, time).
std::vector<ObservationRecord> dedup_retransmissions(std::vector<ObservationRecord> records,
                                                     double window_s = 2.0);

std::vector<ObservationRecord> filter_sf(std::vector<ObservationRecord> records,
                                         const std::set<int>& excluded = {11, 12});

/// Drops records with any non-finite numeric field, logging each drop.
std::vector<ObservationRecord> remove_non_finite(std::vector<ObservationRecord> records,
                                                 std::vector<Rejection>* log = nullptr);

/// Isolation-forest features, in this order.
enum class Feature { kCo2, kHumidity, kPm25, kPressure, kTemperature, kRssi, kSnr };
const std::vector<Feature>& default_features();
std::string_view to_string(Feature feature) noexcept;
double feature_value(const ObservationRecord& record, Feature feature) noexcept;
Eigen::MatrixXd feature_matrix(const std::vector<ObservationRecord>& records,
                               const std::vector<Feature>& features);

/// z = (x - mean) / scale per column, scale being the population std-dev.
struct StandardScaler {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  enum class ZeroVariance { kError, kUnitScale };
  static StandardScaler fit(const Eigen::MatrixXd& x, ZeroVariance policy = ZeroVariance::kError);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
};

struct Standardized {
  Eigen::MatrixXd scaled;
  StandardScaler scaler;
};

/// Needs >= 2 rows; throws kZeroVarianceFeature for a constant column.
Standardized standardize(const Eigen::MatrixXd& x);

struct AnomalyFilterConfig {
  IsolationForestConfig forest;
  std::vector<Feature> features = default_features();
};

struct AnomalyFilterResult {
  std::vector<ObservationRecord> kept;
  std::vector<ObservationRecord> flagged;
  std::map<std::string, std::size_t> flagged_per_device;
};

/// Scales and runs a separate isolation forest for each device.
AnomalyFilterResult reject_anomalies(const std::vector<ObservationRecord>& records,
                                     const AnomalyFilterConfig& config);

struct SplitSpec {
  double test_fraction = 0.20;
  std::size_t folds = 5;
  std::uint64_t seed = 42;
};

void validate(const SplitSpec& spec);

struct SplitResult {
  std::vector<std::size_t> train;  // ascending indices into the input
  std::vector<std::size_t> test;
};

/// Uniform random partition with ceil(test_fraction * N) test rows.
SplitResult split(std::size_t record_count, const SplitSpec& spec);

/// Percentage of the selected rows falling on each calendar day ("YYYY-MM-DD").
std::map<std::string, double> daily_share(const std::vector<ObservationRecord>& records,
                                          const std::vector<std::size_t>& indices);
std::map<std::string, double> daily_share(const std::vector<ObservationRecord>& records);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Shuffled partition into `folds` validation sets whose sizes differ by at
/// most one; the first N mod folds sets take the extra row.
std::vector<Fold> kfold(std::size_t record_count, std::size_t folds, std::uint64_t seed);

struct AuditViolation {
  std::size_t index = 0;
  std::string field;  // exp_pl, esp, n_power
  double stored = 0.0;
  double recomputed = 0.0;
};

/// Checks exp_pl, esp and n_power against the link-budget formulas.
std::vector<AuditViolation> audit_derived_columns(const std::vector<ObservationRecord>& records,
                                                  const link::LinkBudgetParams& params = {},
                                                  double tolerance_db = 0.01);

fitting::Observation to_observation(const ObservationRecord& record);
std::vector<fitting::Observation> to_observations(const std::vector<ObservationRecord>& records);

struct PipelineConfig {
  double dedup_window_s = 2.0;
  std::set<int> excluded_sf = {11, 12};
  AnomalyFilterConfig anomaly;
  SplitSpec split;
  link::LinkBudgetParams link_budget;
};

struct StageCounts {
  std::size_t rows_read = 0;
  std::size_t ingested = 0;
  std::size_t after_dedup = 0;
  std::size_t after_sf_filter = 0;
  std::size_t after_non_finite = 0;
  std::size_t anomalies = 0;
  std::size_t cleaned = 0;
  std::size_t train = 0;
  std::size_t test = 0;
};

struct PipelineResult {
  std::vector<ObservationRecord> cleaned;  // canonical (device, time) order
  SplitResult partition;
  StageCounts counts;
  std::vector<Rejection> rejections;
  std::map<std::string, std::size_t> anomalies_per_device;
  std::vector<AuditViolation> audit;
};

/// Fixed order: dedup, SF filter, non-finite removal, per-device anomaly
/// rejection, train/test split. `ingested` must come from ingest() with
/// defer_non_finite set; its rejections are carried into the result.
PipelineResult run_pipeline(IngestResult ingested, const PipelineConfig& config);

}  // namespace lora_indoor::pipeline
