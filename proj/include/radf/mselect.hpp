#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radf/detectors.hpp"
#include "radf/time_series.hpp"

namespace radf {

struct TrendTestResult {
  /// Minimum Pearson correlation between the smoothed series and the time
  /// index, taken over the full series and three contiguous thirds; a real
  /// trend must be consistent across the whole span.
  double coefficient = 0.0;
  /// OLS slope of the variance-standardized smoothed values against the
  /// normalized index t in [0,1].
  double slope = 0.0;
  bool is_trend = false;
};

struct AdfResult {
  double statistic = 0.0;
  int lags_used = 0;
  /// Rejection at the 5% level (constant-only asymptotic critical value).
  bool reject_nonstationarity = false;
};

struct Recommendation {
  SeriesClass series_class = SeriesClass::Stable;
  EnsembleConfig ensemble;
  /// Trend series get the fitted OLS line subtracted before detection.
  bool detrend = false;
  std::string rationale;
};

/// Class -> ensemble mapping; must cover all three classes.
struct ClassMapping {
  EnsembleConfig stable;
  EnsembleConfig unstable;
  EnsembleConfig trend;
  static ClassMapping defaults();
};

int default_smooth_window(std::size_t n);
int default_adf_max_lag(std::size_t n);

/// The Algorithm-1 trend decision: coefficient > 0.6 AND |slope| > 0.01,
/// both strict.
bool trend_gate(double coefficient, double slope);

TrendTestResult trend_test(const TimeSeries& s, int smooth_window);

/// ADF regression with constant, no time trend; lag order chosen by minimum
/// AIC over 0..max_lag on a common sample.
AdfResult adf_test(const TimeSeries& s, int max_lag);

SeriesClass classify(const TimeSeries& s);

Recommendation recommend(const TimeSeries& s, const ClassMapping& mapping = ClassMapping::defaults());

/// Subtracts the trend_test OLS line (fitted on the smoothed series).
TimeSeries detrend(const TimeSeries& s, int smooth_window);

/// Exhaustive candidate evaluation by F1 on a chronological split: fit on the
/// first 70%, evaluate on the rest. Ties break toward fewer parameters, then
/// registry order.
DetectorConfig select_with_labels(const TimeSeries& s, const std::vector<std::uint8_t>& labels,
                                  const std::vector<DetectorConfig>& candidates);

}  // namespace radf
