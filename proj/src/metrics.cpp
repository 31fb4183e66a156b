#include "radf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace radf {

ConfusionCounts confusion(const VerdictSeries& verdicts, const std::vector<std::uint8_t>& labels) {
  if (verdicts.verdicts.size() != labels.size()) throw MisalignedInputs();
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool pred = verdicts.verdicts[i] != 0, truth = labels[i] != 0;
    if (pred && truth) ++c.tp;
    else if (pred && !truth) ++c.fp;
    else if (!pred && truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::tuple<double, double, double> precision_recall_f1(const ConfusionCounts& c) {
  double p = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
  double r = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
  double f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  return {p, r, f1};
}

namespace {

// Indices sorted by descending score, grouped into ties.
struct ScoreGroups {
  std::vector<std::size_t> order;
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) into order
};

ScoreGroups group_by_score(const std::vector<double>& scores) {
  ScoreGroups g;
  g.order.resize(scores.size());
  std::iota(g.order.begin(), g.order.end(), 0);
  std::stable_sort(g.order.begin(), g.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t i = 0;
  while (i < g.order.size()) {
    std::size_t j = i;
    while (j < g.order.size() && scores[g.order[j]] == scores[g.order[i]]) ++j;
    g.groups.emplace_back(i, j);
    i = j;
  }
  return g;
}

}  // namespace

double weighted_roc_auc(const std::vector<double>& scores, const std::vector<double>& weights) {
  if (scores.size() != weights.size()) throw MisalignedInputs();
  double pos = 0.0, neg = 0.0;
  for (double w : weights) {
    pos += w;
    neg += 1.0 - w;
  }
  if (pos <= 0.0 || neg <= 0.0) throw DegenerateLabels();

  ScoreGroups g = group_by_score(scores);
  double cum_neg = 0.0, num = 0.0;
  for (auto [b, e] : g.groups) {
    double pg = 0.0, ng = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      pg += weights[g.order[k]];
      ng += 1.0 - weights[g.order[k]];
    }
    // Positives in this group beat all lower-scored negatives, tie at 1/2
    // with same-score negatives.
    double neg_below = neg - cum_neg - ng;
    num += pg * (neg_below + 0.5 * ng);
    cum_neg += ng;
  }
  return num / (pos * neg);
}

double weighted_average_precision(const std::vector<double>& scores,
                                  const std::vector<double>& weights) {
  if (scores.size() != weights.size()) throw MisalignedInputs();
  double pos = 0.0, neg = 0.0;
  for (double w : weights) {
    pos += w;
    neg += 1.0 - w;
  }
  if (pos <= 0.0 || neg <= 0.0) throw DegenerateLabels();

  ScoreGroups g = group_by_score(scores);
  double cum_pos = 0.0, cum_neg = 0.0, ap = 0.0, prev_recall = 0.0;
  for (auto [b, e] : g.groups) {
    for (std::size_t k = b; k < e; ++k) {
      cum_pos += weights[g.order[k]];
      cum_neg += 1.0 - weights[g.order[k]];
    }
    double recall = cum_pos / pos;
    double precision = cum_pos / (cum_pos + cum_neg);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

double roc_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size()) throw MisalignedInputs();
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) w[i] = labels[i] ? 1.0 : 0.0;
  return weighted_roc_auc(scores, w);
}

std::vector<double> buffered_label_weights(const std::vector<std::uint8_t>& labels, int ell) {
  const std::size_t n = labels.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = labels[i] ? 1.0 : 0.0;
  if (ell <= 0) return w;
  for (std::size_t i = 0; i < n; ++i) {
    if (!labels[i]) continue;
    bool left_edge = i == 0 || !labels[i - 1];
    bool right_edge = i + 1 == n || !labels[i + 1];
    for (int d = 1; d <= ell; ++d) {
      double v = 1.0 - static_cast<double>(d) / (ell + 1);
      if (left_edge && i >= static_cast<std::size_t>(d))
        w[i - d] = std::max(w[i - d], v);
      if (right_edge && i + d < n) w[i + d] = std::max(w[i + d], v);
    }
  }
  return w;
}

namespace {

template <typename AreaFn>
double vus(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels, int L,
           AreaFn area) {
  if (L < 0) throw InvalidParams("buffer must be >= 0");
  if (L == 0) return area(scores, buffered_label_weights(labels, 0));
  double sum = 0.0;
  for (int ell = 0; ell <= L; ++ell) {
    double a = area(scores, buffered_label_weights(labels, ell));
    sum += (ell == 0 || ell == L) ? 0.5 * a : a;
  }
  return sum / L;
}

}  // namespace

double vus_roc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels, int L) {
  return vus(scores, labels, L, weighted_roc_auc);
}

double vus_pr(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels, int L) {
  return vus(scores, labels, L, weighted_average_precision);
}

}  // namespace radf
