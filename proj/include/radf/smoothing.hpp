#pragma once

#include <vector>

#include "radf/time_series.hpp"

namespace radf {

/// Centered rolling median; windows are clipped at the series edges.
/// `window` must be odd and no larger than the series length.
TimeSeries rolling_median(const TimeSeries& s, int window);

/// Centered moving average with edge-clipped windows.
TimeSeries moving_average(const TimeSeries& s, int window);

/// Replaces each point by the median of all points sharing its phase
/// (index mod period). Requires at least two full periods.
TimeSeries cyclic_subseries_smooth(const TimeSeries& s, int period);

enum class SmootherKind { RollingMedian, MovingAverage, CyclicSubseries };

struct SmootherConfig {
  SmootherKind kind = SmootherKind::RollingMedian;
  int window = 5;  // period for CyclicSubseries
};

TimeSeries apply_smoother(const TimeSeries& s, const SmootherConfig& cfg);

/// Pointwise mean of the member smoother outputs.
TimeSeries ensemble_smooth(const TimeSeries& s, const std::vector<SmootherConfig>& members);

}  // namespace radf
