#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radf/detectors.hpp"
#include "radf/mselect.hpp"
#include "radf/rca.hpp"

namespace radf {

/// Opt-in "All" synthesis: for one metric, collapse one dimension to the
/// reserved value "All" by summing (or averaging) the slices.
struct AggregateSpec {
  std::string dimension;
  std::string func = "sum";  // sum | mean
};

struct SourceDescriptor {
  std::string path;
  std::string format = "csv";  // csv | jsonl
  std::string timestamp_column = "timestamp";
  std::string value_column = "value";
  std::string metric_column;          // empty: every row belongs to metric_name
  std::string metric_name = "metric";
  std::vector<std::string> dimension_columns;
  /// Missing values spanning at most this many points are linearly
  /// interpolated; longer gaps are dropped.
  int max_gap = 3;
  std::map<std::string, AggregateSpec> aggregates;  // metric -> spec
};

enum class StageKind { Preprocess, Detect, Rca, Postprocess };

const char* to_string(StageKind s);

struct PreprocessStage {
  std::string smoother = "rolling_median";  // rolling_median | moving_average
  int window = 5;
};

struct DetectStage {
  /// true: per-key automatic model selection; false: the explicit ensemble.
  bool auto_select = true;
  EnsembleConfig ensemble;
};

struct RcaStage {
  MetricKey target;
  RcaMethod method = RcaMethod::Pearson;
  int lag_window = 0;
  /// Empty: cross-dimension candidates (same metric, other dimension values).
  std::vector<MetricKey> candidates;
};

struct SinkConfig {
  std::string results_file;
  std::string rca_file;
  std::string alert_file;
  std::string alert_webhook;  // http://host[:port]/path
};

struct PipelineConfig {
  SourceDescriptor input;
  std::vector<StageKind> stage_order;
  std::optional<PreprocessStage> preprocess;
  std::optional<DetectStage> detect;
  std::optional<RcaStage> rca;
  bool postprocess = false;
  SinkConfig sinks;
  std::uint64_t seed = 0;
  std::string mode = "batch";  // batch | streaming
  int workers = 0;             // 0: runtime default
};

/// Parses and fully validates a JSON config. Unknown keys are errors.
/// Stage-order and alert-requires-detect rules are enforced here, never at
/// runtime.
PipelineConfig load_config(const std::string& path);

/// JSON file holding one detect block ({"mode":"ensemble","members":[...]}).
EnsembleConfig load_ensemble(const std::string& path);

/// JSON file mapping "stable"/"unstable"/"trend" to detect blocks.
ClassMapping load_mapping(const std::string& path);

struct RecordedIssue {
  std::string key;  // empty for file-level issues
  std::string message;
};

struct IngestResult {
  SeriesCollection collection;
  std::vector<RecordedIssue> issues;
};

/// Groups rows by MetricKey, sorts per-key timestamps, rejects duplicates
/// (recorded), repairs short gaps, and synthesizes configured aggregates.
IngestResult ingest(const SourceDescriptor& src);

struct KeyResult {
  MetricKey key;
  TimeSeries processed;  // input after the preprocess stage, if any
  ScoreSeries scores;
  VerdictSeries verdicts;
  std::string detector_id;
  std::string error;  // non-empty: this key failed; other keys unaffected
};

struct DayCount {
  MetricKey key;
  std::int64_t day_start_ms = 0;
  long anomalies = 0;
};

struct PipelineResult {
  std::vector<KeyResult> keys;  // sorted by key
  std::optional<RcaReport> rca;
  std::vector<DayCount> day_counts;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<RecordedIssue> issues;
  std::vector<std::string> sink_errors;

  bool any_key_failed() const;
};

PipelineResult run_pipeline(const PipelineConfig& cfg, const SeriesCollection& data);

/// Writes the configured sinks; delivery failures are recorded on the result,
/// never thrown.
void emit(const SinkConfig& sinks, PipelineResult& result);

/// ingest + run_pipeline (batch or streaming per cfg.mode) + emit.
PipelineResult run_from_config(const PipelineConfig& cfg);

/// Stable FNV-1a hash of the canonical config serialization.
std::uint64_t config_hash(const PipelineConfig& cfg);

}  // namespace radf
