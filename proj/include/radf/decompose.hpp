#pragma once

#include "radf/time_series.hpp"

namespace radf {

/// Additive decomposition: trend + seasonal + residual reconstructs the input.
struct Decomposition {
  TimeSeries trend;
  TimeSeries seasonal;
  TimeSeries residual;
};

/// Moving-average trend, phase-mean seasonal (re-centered to zero),
/// residual remainder. Even periods use the half-weight endpoint convention;
/// edge windows are clipped and renormalized.
Decomposition classical_decompose(const TimeSeries& s, int period);

/// Seasonal-trend decomposition via iterated loess. The seasonal component
/// comes from cyclic-subseries loess, the trend from loess on the
/// deseasonalized series. With robust=true, bisquare weights from the
/// residuals down-weight outliers across up to 10 outer iterations.
Decomposition stl_decompose(const TimeSeries& s, int period, int inner_iters = 2,
                            bool robust = false);

/// Degree-1 local regression with tricube weights over the q nearest
/// neighbours; prior_weights (robustness weights) may be empty.
std::vector<double> loess_smooth(const std::vector<double>& y, int span,
                                 const std::vector<double>& prior_weights = {});

}  // namespace radf
