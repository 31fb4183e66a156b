#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "radf/time_series.hpp"

namespace radf {

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

ConfusionCounts confusion(const VerdictSeries& verdicts, const std::vector<std::uint8_t>& labels);

/// 0/0 cases yield 0 for each of precision, recall, f1.
std::tuple<double, double, double> precision_recall_f1(const ConfusionCounts& c);

/// Rank-based (Mann-Whitney) AUC; ties contribute 1/2.
double roc_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

/// Continuous-label generalization: each point carries positive mass w in
/// [0,1] and negative mass 1-w.
double weighted_roc_auc(const std::vector<double>& scores, const std::vector<double>& weights);
double weighted_average_precision(const std::vector<double>& scores,
                                  const std::vector<double>& weights);

/// Extends each anomaly run with a linearly decaying positive weight over
/// `ell` points on each side (1 inside, descending to 0 across the buffer).
std::vector<double> buffered_label_weights(const std::vector<std::uint8_t>& labels, int ell);

/// Trapezoidal mean over buffer lengths 0..L of the buffered-label ROC area.
/// L == 0 reduces to roc_auc exactly.
double vus_roc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels, int L);
double vus_pr(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels, int L);

}  // namespace radf
