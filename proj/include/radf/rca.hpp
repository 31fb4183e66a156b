#pragma once

#include <optional>
#include <string>
#include <vector>

#include "radf/detectors.hpp"
#include "radf/time_series.hpp"

namespace radf {

enum class RcaMethod { Pearson, Euclidean, Dtw, Granger };

const char* to_string(RcaMethod m);
RcaMethod rca_method_from_string(const std::string& name);

struct Attribution {
  MetricKey candidate;
  bool link = false;
  double p_target = 0.0;
  double p_conditional = 0.0;
  double strength = 0.0;
  RcaMethod method = RcaMethod::Pearson;
  /// Candidate had zero detected anomalies; p_conditional recorded as 0.
  bool no_candidate_anomalies = false;
};

struct RcaReport {
  MetricKey target;
  /// Sorted by (link desc, strength desc, key asc).
  std::vector<Attribution> attributions;
  std::int64_t generated_at = 0;

  /// One attribution per line: target, candidate, method, p_target,
  /// p_conditional, link, strength.
  std::string to_text() const;
};

/// Fraction of points with verdict 1.
double anomaly_prob(const VerdictSeries& v);

/// Fraction of candidate-anomaly timestamps t with a target anomaly in
/// [t, t + lag_window].
double conditional_anomaly_prob(const VerdictSeries& target, const VerdictSeries& candidate,
                                int lag_window);

/// Eq-style link: p_conditional strictly greater than p_target.
Attribution causal_link(const VerdictSeries& target, const VerdictSeries& candidate,
                        int lag_window);

double pearson(const TimeSeries& a, const TimeSeries& b);

/// l2 distance of the z-normalized vectors.
double euclidean(const TimeSeries& a, const TimeSeries& b);

/// Dynamic-programming alignment cost, absolute-difference local cost,
/// optional Sakoe-Chiba band; inputs are z-normalized first.
double dtw(const TimeSeries& a, const TimeSeries& b, std::optional<int> band = std::nullopt);

struct GrangerResult {
  double f_stat = 0.0;
  double p_value = 1.0;
  bool causal = false;
};

/// Nested F-test: does adding the candidate's lags improve the target's
/// autoregressive fit.
GrangerResult granger(const TimeSeries& candidate, const TimeSeries& target, int max_lag,
                      double alpha = 0.05);

double method_strength(RcaMethod method, const TimeSeries& target, const TimeSeries& candidate,
                       int lag_window);

RcaReport cross_dimension_rca(const SeriesCollection& collection, const MetricKey& target,
                              const EnsembleConfig& ensemble, RcaMethod method, int lag_window);

RcaReport cross_metric_rca(const SeriesCollection& collection, const MetricKey& target,
                           const std::vector<MetricKey>& candidates,
                           const EnsembleConfig& ensemble, RcaMethod method, int lag_window);

}  // namespace radf
