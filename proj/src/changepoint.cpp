#include "radf/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radf {

std::vector<ChangePoint> cusum_changepoints(const TimeSeries& s, double threshold,
                                            double drift) {
  if (!(threshold > 0.0)) throw InvalidParams("threshold must be > 0");
  if (drift < 0.0) throw InvalidParams("drift must be >= 0");
  const std::size_t n = s.size();
  if (n < 2) throw SeriesTooShort();

  std::vector<ChangePoint> cps;
  std::size_t seg_start = 0;
  while (n - seg_start >= 2) {
    std::size_t base_len = std::min<std::size_t>(30, std::max<std::size_t>(2, (n - seg_start) / 4));
    base_len = std::min(base_len, n - seg_start);

    // Running pre-change baseline: the initial base_len points seed the
    // estimate, after which every already-seen segment point refines it.
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::size_t i = seg_start; i < seg_start + base_len; ++i) {
      sum += s.values[i];
      sum2 += s.values[i] * s.values[i];
      ++count;
    }

    double gp = 0.0, gn = 0.0;
    bool fired = false;
    for (std::size_t i = seg_start; i < n; ++i) {
      double mean = sum / static_cast<double>(count);
      double var = std::max(0.0, sum2 / static_cast<double>(count) - mean * mean);
      double sd = std::max(std::sqrt(var), 1e-12 * std::max(1.0, std::abs(mean)));
      double z = (s.values[i] - mean) / sd;
      gp = std::max(0.0, gp + z - drift);
      gn = std::max(0.0, gn - z - drift);
      if (gp > threshold || gn > threshold) {
        cps.push_back({i, s.timestamps[i], std::max(gp, gn)});
        seg_start = i + 1;
        fired = true;
        break;
      }
      // Fold the point into the baseline only while both sums are quiet, so
      // an onset in progress does not contaminate the pre-change estimate.
      if (i >= seg_start + base_len && gp == 0.0 && gn == 0.0) {
        sum += s.values[i];
        sum2 += s.values[i] * s.values[i];
        ++count;
      }
    }
    if (!fired) break;
  }
  return cps;
}

namespace {

// Summed per-coordinate Gaussian cost of [lo, hi) via prefix sums.
struct SegmentCost {
  // prefix[i] = column-wise sums over rows [0, i); prefix2 likewise for squares.
  Eigen::MatrixXd prefix, prefix2;

  explicit SegmentCost(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows(), m = X.cols();
    prefix = Eigen::MatrixXd::Zero(n + 1, m);
    prefix2 = Eigen::MatrixXd::Zero(n + 1, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      prefix.row(i + 1) = prefix.row(i) + X.row(i);
      prefix2.row(i + 1) = prefix2.row(i) + X.row(i).cwiseProduct(X.row(i));
    }
  }

  double operator()(Eigen::Index lo, Eigen::Index hi) const {
    const double len = static_cast<double>(hi - lo);
    if (len <= 0) return 0.0;
    double cost = 0.0;
    for (Eigen::Index c = 0; c < prefix.cols(); ++c) {
      double sum = prefix(hi, c) - prefix(lo, c);
      double sum2 = prefix2(hi, c) - prefix2(lo, c);
      cost += sum2 - sum * sum / len;
    }
    return cost;
  }
};

struct Split {
  Eigen::Index lo, hi, at;
  double gain;
};

Split best_split(const SegmentCost& cost, Eigen::Index lo, Eigen::Index hi) {
  Split best{lo, hi, lo, -std::numeric_limits<double>::infinity()};
  if (hi - lo < 2) return best;
  const double whole = cost(lo, hi);
  for (Eigen::Index t = lo + 1; t < hi; ++t) {
    double gain = whole - cost(lo, t) - cost(t, hi);
    if (gain > best.gain) best = {lo, hi, t, gain};
  }
  return best;
}

}  // namespace

std::vector<ChangePoint> binseg_changepoints(const Eigen::MatrixXd& X, double penalty,
                                             int max_cps,
                                             const std::vector<std::int64_t>& timestamps) {
  if (!(penalty >= 0.0)) throw InvalidParams("penalty must be >= 0");
  if (X.rows() < 4) throw SeriesTooShort();

  SegmentCost cost(X);
  std::vector<Split> candidates{best_split(cost, 0, X.rows())};
  std::vector<ChangePoint> cps;
  while (static_cast<int>(cps.size()) < max_cps) {
    auto it = std::max_element(candidates.begin(), candidates.end(),
                               [](const Split& a, const Split& b) { return a.gain < b.gain; });
    if (it == candidates.end() || !(it->gain >= penalty) ||
        !std::isfinite(it->gain))
      break;
    Split s = *it;
    candidates.erase(it);
    std::int64_t ts = timestamps.empty() ? static_cast<std::int64_t>(s.at)
                                         : timestamps[static_cast<std::size_t>(s.at)];
    cps.push_back({static_cast<std::size_t>(s.at), ts, s.gain});
    candidates.push_back(best_split(cost, s.lo, s.at));
    candidates.push_back(best_split(cost, s.at, s.hi));
  }
  std::sort(cps.begin(), cps.end(),
            [](const ChangePoint& a, const ChangePoint& b) { return a.index < b.index; });
  return cps;
}

std::vector<ChangePoint> binseg_changepoints(const TimeSeries& s, double penalty, int max_cps) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(s.size()), 1);
  for (std::size_t i = 0; i < s.size(); ++i) X(static_cast<Eigen::Index>(i), 0) = s.values[i];
  return binseg_changepoints(X, penalty, max_cps, s.timestamps);
}

}  // namespace radf
