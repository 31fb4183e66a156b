#include "radf/mselect.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "radf/metrics.hpp"
#include "radf/smoothing.hpp"

namespace radf {

namespace {

double pearson_corr(const double* y, std::size_t n) {
  // Correlation of y against the index 0..n-1.
  if (n < 2) return 0.0;
  double my = 0.0, mx = (n - 1) / 2.0;
  for (std::size_t i = 0; i < n; ++i) my += y[i];
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = static_cast<double>(i) - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (syy <= 0.0 || sxx <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

struct OlsLine {
  double intercept = 0.0, slope = 0.0;
};

OlsLine ols_on_index(const std::vector<double>& y) {
  const std::size_t n = y.size();
  double mx = (n - 1) / 2.0, my = 0.0;
  for (double v : y) my += v;
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = static_cast<double>(i) - mx;
    sxy += dx * (y[i] - my);
    sxx += dx * dx;
  }
  double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {my - slope * mx, slope};
}

}  // namespace

int default_smooth_window(std::size_t n) {
  std::size_t w = n / 10;
  if (w % 2 == 0) w = w > 0 ? w - 1 : 1;
  w = std::min<std::size_t>(w, 31);
  return static_cast<int>(std::max<std::size_t>(w, 1));
}

int default_adf_max_lag(std::size_t n) {
  // Schwert rule.
  return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

TrendTestResult trend_test(const TimeSeries& s, int smooth_window) {
  if (s.size() < static_cast<std::size_t>(std::max(smooth_window, 8))) throw SeriesTooShort();
  TimeSeries smooth = rolling_median(s, smooth_window);
  const std::size_t n = smooth.size();
  const double* y = smooth.values.data();

  // A genuine trajectory must correlate with time over the whole span and
  // over each third; a random walk rarely does all four at once.
  double coeff = pearson_corr(y, n);
  for (int seg = 0; seg < 3; ++seg) {
    std::size_t lo = seg * n / 3, hi = (seg + 1) * n / 3;
    coeff = std::min(coeff, pearson_corr(y + lo, hi - lo));
  }

  // Slope of variance-standardized values on the normalized index, so the
  // 0.01 threshold is unit-free.
  double mean = 0.0;
  for (double v : smooth.values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : smooth.values) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / static_cast<double>(n));
  double slope = 0.0;
  if (sd > 0.0) {
    OlsLine line = ols_on_index(smooth.values);
    slope = line.slope * static_cast<double>(n - 1) / sd;  // per unit of t in [0,1]
  }

  TrendTestResult r;
  r.coefficient = coeff;
  r.slope = slope;
  r.is_trend = trend_gate(coeff, slope);
  return r;
}

bool trend_gate(double coefficient, double slope) {
  return coefficient > 0.6 && std::abs(slope) > 0.01;
}

AdfResult adf_test(const TimeSeries& s, int max_lag) {
  const std::size_t n = s.size();
  if (max_lag < 0) throw InvalidParams("max_lag must be >= 0");
  if (n < static_cast<std::size_t>(max_lag) + 10) throw SeriesTooShort();
  const std::vector<double>& y = s.values;

  auto run = [&](int p, std::size_t start, double* aic_out) {
    // Rows t = start .. n-1, dependent dy_t = y_t - y_{t-1},
    // regressors: 1, y_{t-1}, dy_{t-1} .. dy_{t-p}.
    const std::size_t rows = n - start;
    const int cols = p + 2;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd b(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      std::size_t t = start + i;
      b(i) = y[t] - y[t - 1];
      X(i, 0) = 1.0;
      X(i, 1) = y[t - 1];
      for (int l = 1; l <= p; ++l) X(i, 1 + l) = y[t - l] - y[t - l - 1];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) throw SingularRegression();
    Eigen::VectorXd beta = qr.solve(b);
    double ssr = (b - X * beta).squaredNorm();
    double nobs = static_cast<double>(rows);
    if (aic_out)
      *aic_out = nobs * std::log(std::max(ssr, 1e-300) / nobs) + 2.0 * cols;
    double dof = nobs - cols;
    double sigma2 = ssr / dof;
    Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(cols, cols));
    double se = std::sqrt(sigma2 * xtx_inv(1, 1));
    return beta(1) / se;
  };

  int best_p = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  const std::size_t common_start = static_cast<std::size_t>(max_lag) + 1;
  for (int p = 0; p <= max_lag; ++p) {
    double aic;
    run(p, common_start, &aic);
    if (aic < best_aic) {
      best_aic = aic;
      best_p = p;
    }
  }

  AdfResult r;
  r.lags_used = best_p;
  r.statistic = run(best_p, static_cast<std::size_t>(best_p) + 1, nullptr);
  r.reject_nonstationarity = r.statistic < -2.86;
  return r;
}

SeriesClass classify(const TimeSeries& s) {
  if (s.size() < 30) throw SeriesTooShort();
  if (trend_test(s, default_smooth_window(s.size())).is_trend) return SeriesClass::Trend;
  if (adf_test(s, default_adf_max_lag(s.size())).reject_nonstationarity)
    return SeriesClass::Stable;
  return SeriesClass::Unstable;
}

ClassMapping ClassMapping::defaults() {
  ClassMapping m;
  m.stable.members = {DetectorConfig{.name = "seasonal_esd"},
                      DetectorConfig{.name = "ewma_control"},
                      DetectorConfig{.name = "iqr"}};
  m.stable.quorum = 2;
  m.unstable.members = {DetectorConfig{.name = "iforest_windowed"},
                        DetectorConfig{.name = "spectral_residual"},
                        DetectorConfig{.name = "mad_zscore"}};
  m.unstable.quorum = 2;
  m.trend = m.stable;
  return m;
}

TimeSeries detrend(const TimeSeries& s, int smooth_window) {
  TimeSeries smooth = rolling_median(s, smooth_window);
  OlsLine line = ols_on_index(smooth.values);
  TimeSeries out;
  out.timestamps = s.timestamps;
  out.values.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    out.values[i] = s.values[i] - (line.intercept + line.slope * static_cast<double>(i));
  return out;
}

Recommendation recommend(const TimeSeries& s, const ClassMapping& mapping) {
  if (mapping.stable.members.empty() || mapping.unstable.members.empty() ||
      mapping.trend.members.empty())
    throw InvalidParams("mapping must cover all three classes");
  Recommendation rec;
  rec.series_class = classify(s);
  switch (rec.series_class) {
    case SeriesClass::Stable:
      rec.ensemble = mapping.stable;
      rec.rationale = "stationary pattern: seasonal/control-chart ensemble";
      break;
    case SeriesClass::Unstable:
      rec.ensemble = mapping.unstable;
      rec.rationale = "erratic pattern: robust/ML ensemble";
      break;
    case SeriesClass::Trend:
      rec.ensemble = mapping.trend;
      rec.detrend = true;
      rec.rationale = "trending pattern: detrend, then stable ensemble";
      break;
  }
  return rec;
}

DetectorConfig select_with_labels(const TimeSeries& s, const std::vector<std::uint8_t>& labels,
                                  const std::vector<DetectorConfig>& candidates) {
  if (labels.size() != s.size()) throw MisalignedInputs();
  if (candidates.empty()) throw InvalidParams("no candidates");
  if (std::find(labels.begin(), labels.end(), 1) == labels.end()) throw NoPositiveLabels();

  const std::size_t split = static_cast<std::size_t>(0.7 * static_cast<double>(s.size()));
  auto registry_rank = [](const std::string& name) {
    const auto& reg = detector_registry();
    for (std::size_t i = 0; i < reg.size(); ++i)
      if (reg[i].name == name) return i;
    return reg.size();
  };

  const DetectorConfig* best = nullptr;
  double best_f1 = -1.0;
  for (const auto& cand : candidates) {
    double f1;
    try {
      auto state = fit(cand, slice_window(s, 0, std::max<std::size_t>(split, 1)));
      ScoreSeries scores = score(*state, s);
      VerdictSeries verdicts = apply_threshold(scores, effective_tau(cand));
      ConfusionCounts c{};
      for (std::size_t i = split; i < s.size(); ++i) {
        bool pred = verdicts.verdicts[i] != 0, truth = labels[i] != 0;
        if (pred && truth) ++c.tp;
        else if (pred) ++c.fp;
        else if (truth) ++c.fn;
        else ++c.tn;
      }
      f1 = std::get<2>(precision_recall_f1(c));
    } catch (const Error&) {
      continue;  // candidate infeasible on this series
    }
    bool better = f1 > best_f1;
    if (!better && best && f1 == best_f1) {
      if (cand.params.size() != best->params.size())
        better = cand.params.size() < best->params.size();
      else
        better = registry_rank(cand.name) < registry_rank(best->name);
    }
    if (better) {
      best = &cand;
      best_f1 = f1;
    }
  }
  if (!best) throw InvalidParams("no feasible candidate");
  return *best;
}

}  // namespace radf
