#pragma once

#include <string>
#include <vector>

#include "radf/detectors.hpp"

namespace radf {

/// One evaluated (series, detector) pair. Metrics are NaN when status is not
/// "ok" (degenerate labels or a per-series error; recorded, never fatal).
struct BenchmarkRow {
  std::string dataset;
  std::string series_id;
  std::string detector_id;
  double auc = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double vus_roc = 0.0;
  double vus_pr = 0.0;
  double runtime_ms = 0.0;
  std::string status = "ok";  // ok | degenerate | error:<what>
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;

  /// Comma-separated table, one row per series, header included. Runtime is
  /// wall-clock and therefore excluded when `include_runtime` is false (used
  /// by the byte-identical determinism contract).
  std::string to_csv(bool include_runtime = true) const;
  /// Aggregate means per dataset over rows with status "ok".
  std::string summary() const;
};

/// Labeled dataset file: header `timestamp,value,label`, label in {0,1}.
struct LabeledSeries {
  TimeSeries series;
  std::vector<std::uint8_t> labels;
};

LabeledSeries load_labeled_csv(const std::string& path);

/// Evaluates the ensemble on every *.csv under dataset_dir (non-recursive).
/// Per-series work fans out across threads; rows are merged in sorted
/// series-id order so the report is deterministic.
BenchmarkReport benchmark_run(const std::string& dataset_dir, const EnsembleConfig& ensemble,
                              int buffer_L);

BenchmarkReport benchmark_run(const std::string& dataset_dir, const DetectorConfig& detector,
                              int buffer_L);

}  // namespace radf
