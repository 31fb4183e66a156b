#pragma once

#include <Eigen/Dense>
#include <vector>

#include "radf/time_series.hpp"

namespace radf {

/// Two-sided CUSUM on standardized values. Values are standardized by a
/// running pre-change baseline: the leading min(30, n/4) points of the
/// current segment seed the mean/std estimate, and later quiet points (both
/// sums at zero) keep refining it. After a detection both sums reset and the
/// baseline is re-estimated from the points that follow. The default drift
/// of 1.0 keeps the in-control false-alarm rate low enough that a 5-sigma
/// level shift is the first thing flagged on series of a few hundred points.
std::vector<ChangePoint> cusum_changepoints(const TimeSeries& s, double threshold,
                                            double drift = 1.0);

/// Binary segmentation under a Gaussian mean-shift cost with a per-split
/// penalty. Recursion stops when the best gain falls below the penalty or
/// max_cps splits have been made. Multivariate input sums the per-coordinate
/// cost; rows are time steps.
std::vector<ChangePoint> binseg_changepoints(const Eigen::MatrixXd& X, double penalty,
                                             int max_cps,
                                             const std::vector<std::int64_t>& timestamps = {});

std::vector<ChangePoint> binseg_changepoints(const TimeSeries& s, double penalty, int max_cps);

}  // namespace radf
