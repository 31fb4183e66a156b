#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "radf/errors.hpp"

namespace radf {

/// Ordered (timestamp, value) samples for one metric/dimension combination.
/// Timestamps are epoch milliseconds, strictly increasing; values are finite.
struct TimeSeries {
  std::vector<std::int64_t> timestamps;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }

  /// Throws InvalidSeries if any type invariant is violated.
  void validate() const;
};

/// Metric name plus an ordered dimension map identifying one series.
/// The reserved dimension value "All" denotes the aggregate series.
struct MetricKey {
  std::string metric;
  std::vector<std::pair<std::string, std::string>> dimensions;

  bool operator==(const MetricKey&) const = default;
  bool operator<(const MetricKey& other) const;

  /// "metric[dim=val,...]" or just "metric" when there are no dimensions.
  std::string to_string() const;
  static MetricKey parse(const std::string& text);
};

using SeriesCollection = std::map<MetricKey, TimeSeries>;

/// Per-point anomaly scores S(x), aligned with the scored series.
struct ScoreSeries {
  MetricKey key;
  std::vector<std::int64_t> timestamps;
  std::vector<double> scores;
  /// Points before this index were inside the training prefix.
  std::size_t train_end = 0;
};

/// Per-point binary verdicts A(x).
struct VerdictSeries {
  MetricKey key;
  std::vector<std::int64_t> timestamps;
  std::vector<std::uint8_t> verdicts;
  std::string source;
  std::size_t train_end = 0;
};

enum class SeriesClass { Stable, Unstable, Trend };

const char* to_string(SeriesClass c);

/// Index where the underlying distribution shifts, with shift evidence.
struct ChangePoint {
  std::size_t index = 0;
  std::int64_t timestamp = 0;
  double statistic = 0.0;
};

/// Restricts both series to the intersection of their timestamps.
/// Throws EmptyIntersection when no timestamps are shared.
std::pair<TimeSeries, TimeSeries> align(const TimeSeries& a, const TimeSeries& b);

/// Contiguous subsequence [start_index, start_index + len).
TimeSeries slice_window(const TimeSeries& s, std::size_t start_index, std::size_t len);

}  // namespace radf
