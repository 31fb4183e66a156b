#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "radf/detectors.hpp"

namespace radf {

struct StreamRecord {
  MetricKey key;
  std::int64_t timestamp = 0;
  double value = 0.0;
};

struct StreamVerdict {
  MetricKey key;
  std::int64_t timestamp = 0;
  double value = 0.0;
  double score = 0.0;
  std::uint8_t verdict = 0;
};

struct StreamIssue {
  MetricKey key;
  std::int64_t timestamp = 0;
  std::string message;
};

struct StreamEngineOptions {
  /// Points buffered per key before fitting. 0: the detector's registry
  /// minimum. Batch replay tests set this to the batch training length.
  std::size_t warmup = 0;
  /// Refit on the trailing window when CUSUM fires on it.
  bool refit_on_changepoint = false;
  double cusum_threshold = 5.0;
};

/// Per-key streaming state machine: buffer until warm-up, fit once on the
/// prefix, then one verdict per arriving record with bounded per-record work.
/// The fit emits catch-up verdicts for the buffered prefix, so a streaming
/// replay of a batch file reproduces the batch verdicts exactly for
/// replay-equivalent detectors.
class StreamEngine {
public:
  StreamEngine(DetectorConfig cfg, StreamEngineOptions opts = {});
  ~StreamEngine();
  StreamEngine(StreamEngine&&) noexcept;
  StreamEngine& operator=(StreamEngine&&) noexcept;

  /// Usually 0 or 1 verdicts; warmup+1 at the record that completes warm-up.
  /// Out-of-order or duplicate timestamps are recorded, not thrown.
  std::vector<StreamVerdict> push(const StreamRecord& rec);

  const std::vector<StreamIssue>& issues() const;
  long refit_count() const;

private:
  struct KeyState;
  DetectorConfig cfg_;
  StreamEngineOptions opts_;
  double tau_ = 0.0;
  std::map<MetricKey, std::unique_ptr<KeyState>> keys_;
  std::vector<StreamIssue> issues_;
  long refits_ = 0;
};

/// Drives a whole record stream through one engine; convenience for the
/// pipeline's streaming mode and for tests.
std::vector<StreamVerdict> run_streaming(const DetectorConfig& cfg,
                                         const std::vector<StreamRecord>& records,
                                         StreamEngineOptions opts, std::vector<StreamIssue>* issues);

}  // namespace radf
