#include "radf/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace radf {

namespace {

// Centered weighted moving average with edge-clipped, renormalized windows.
// Even windows use the classical half-weight endpoint convention.
std::vector<double> centered_ma(const std::vector<double>& y, int window) {
  const int n = static_cast<int>(y.size());
  std::vector<double> w;
  if (window % 2 == 1) {
    w.assign(window, 1.0);
  } else {
    w.assign(window + 1, 1.0);
    w.front() = w.back() = 0.5;
  }
  const int h = static_cast<int>(w.size()) / 2;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0, wsum = 0.0;
    for (int k = -h; k <= h; ++k) {
      int j = i + k;
      if (j < 0 || j >= n) continue;
      double wk = w[k + h];
      sum += wk * y[j];
      wsum += wk;
    }
    out[i] = sum / wsum;
  }
  return out;
}

double tricube(double u) {
  double a = 1.0 - u * u * u;
  return a > 0.0 ? a * a * a : 0.0;
}

}  // namespace

std::vector<double> loess_smooth(const std::vector<double>& y, int span,
                                 const std::vector<double>& prior_weights) {
  const int n = static_cast<int>(y.size());
  if (n == 0) return {};
  span = std::clamp(span, 2, n);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    // Window of the `span` nearest indices: contiguous since x is the index.
    int lo = i - span / 2;
    lo = std::clamp(lo, 0, n - span);
    int hi = lo + span - 1;
    double dmax = std::max(i - lo, hi - i);
    if (dmax < 1.0) dmax = 1.0;
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (int j = lo; j <= hi; ++j) {
      double w = tricube(std::abs(j - i) / (dmax + 1e-12));
      if (!prior_weights.empty()) w *= prior_weights[j];
      double x = j - i;
      sw += w;
      swx += w * x;
      swy += w * y[j];
      swxx += w * x * x;
      swxy += w * x * y[j];
    }
    double det = sw * swxx - swx * swx;
    if (sw <= 0.0) {
      out[i] = y[i];
    } else if (std::abs(det) < 1e-12 * (sw * swxx + 1e-300)) {
      out[i] = swy / sw;
    } else {
      double b = (sw * swxy - swx * swy) / det;
      double a = (swy - b * swx) / sw;
      out[i] = a;  // prediction at x = 0 (the center point)
    }
  }
  return out;
}

Decomposition classical_decompose(const TimeSeries& s, int period) {
  if (period < 2) throw InvalidParams("period must be >= 2");
  const std::size_t n = s.size();
  if (n < 2 * static_cast<std::size_t>(period)) throw SeriesTooShort();

  Decomposition d;
  d.trend.timestamps = d.seasonal.timestamps = d.residual.timestamps = s.timestamps;
  d.trend.values = centered_ma(s.values, period);

  // Phase-wise means of the detrended series, re-centered to zero.
  std::vector<double> phase_mean(period, 0.0);
  std::vector<int> phase_count(period, 0);
  for (std::size_t i = 0; i < n; ++i) {
    phase_mean[i % period] += s.values[i] - d.trend.values[i];
    phase_count[i % period] += 1;
  }
  double grand = 0.0;
  for (int p = 0; p < period; ++p) {
    phase_mean[p] /= phase_count[p];
    grand += phase_mean[p];
  }
  grand /= period;
  for (int p = 0; p < period; ++p) phase_mean[p] -= grand;

  d.seasonal.values.resize(n);
  d.residual.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.seasonal.values[i] = phase_mean[i % period];
    d.residual.values[i] = s.values[i] - d.trend.values[i] - d.seasonal.values[i];
  }
  return d;
}

Decomposition stl_decompose(const TimeSeries& s, int period, int inner_iters, bool robust) {
  if (period < 2) throw InvalidParams("period must be >= 2");
  if (inner_iters < 1) throw InvalidParams("inner_iters must be >= 1");
  const std::size_t n = s.size();
  if (n < 2 * static_cast<std::size_t>(period)) throw SeriesTooShort();

  const int seasonal_span = 7;  // phases per cyclic-subseries fit
  int trend_span = static_cast<int>(std::ceil(1.5 * period));
  if (trend_span % 2 == 0) ++trend_span;

  std::vector<double> trend(n, 0.0), seasonal(n, 0.0);
  std::vector<double> rw(n, 1.0);

  const int outer_cap = robust ? 10 : 1;
  bool stabilized = false;
  for (int outer = 0; outer < outer_cap && !stabilized; ++outer) {
    for (int inner = 0; inner < inner_iters; ++inner) {
      // Cyclic-subseries loess on the detrended series.
      std::vector<double> cyc(n);
      std::vector<double> sub, subw;
      for (int phase = 0; phase < period; ++phase) {
        sub.clear();
        subw.clear();
        for (std::size_t i = phase; i < n; i += period) {
          sub.push_back(s.values[i] - trend[i]);
          subw.push_back(rw[i]);
        }
        auto sm = loess_smooth(sub, seasonal_span, subw);
        std::size_t k = 0;
        for (std::size_t i = phase; i < n; i += period) cyc[i] = sm[k++];
      }
      // Low-pass filter the cyclic component and subtract it, so the
      // seasonal carries no slow drift.
      auto low = centered_ma(centered_ma(centered_ma(cyc, period), period), 3);
      int low_span = period % 2 == 1 ? period : period + 1;
      low = loess_smooth(low, low_span);
      for (std::size_t i = 0; i < n; ++i) seasonal[i] = cyc[i] - low[i];

      std::vector<double> deseason(n);
      for (std::size_t i = 0; i < n; ++i) deseason[i] = s.values[i] - seasonal[i];
      trend = loess_smooth(deseason, trend_span, robust ? rw : std::vector<double>{});
    }
    if (!robust) break;
    // Bisquare robustness weights from the residuals.
    std::vector<double> absr(n);
    for (std::size_t i = 0; i < n; ++i)
      absr[i] = std::abs(s.values[i] - trend[i] - seasonal[i]);
    std::vector<double> tmp = absr;
    std::nth_element(tmp.begin(), tmp.begin() + n / 2, tmp.end());
    double h = 6.0 * tmp[n / 2];
    double max_delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double w;
      if (h < 1e-12) {
        w = 1.0;
      } else {
        double u = absr[i] / h;
        w = u < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
      }
      max_delta = std::max(max_delta, std::abs(w - rw[i]));
      rw[i] = w;
    }
    // Borderline points can flip weights indefinitely; like the reference
    // procedure, the outer loop is a fixed budget, not a convergence demand.
    stabilized = max_delta < 0.05;
  }

  Decomposition d;
  d.trend.timestamps = d.seasonal.timestamps = d.residual.timestamps = s.timestamps;
  d.trend.values = std::move(trend);
  d.seasonal.values = std::move(seasonal);
  d.residual.values.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    d.residual.values[i] = s.values[i] - d.trend.values[i] - d.seasonal.values[i];
  return d;
}

}  // namespace radf
