// Independent reference implementations used to validate the library.
// Deliberately naive: plain arrays, textbook formulas, O(n^2)/O(n^3) methods,
// no shared code with src/.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Gaussian elimination with partial pivoting; A is square.
inline std::vector<double> solve(Matrix A, std::vector<double> b) {
  const std::size_t n = A.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(A[r][col]) > std::fabs(A[pivot][col])) pivot = r;
    if (std::fabs(A[pivot][col]) < 1e-12) throw std::runtime_error("singular system");
    std::swap(A[col], A[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
  return x;
}

struct OlsFit {
  std::vector<double> beta;
  double ssr = 0.0;
  std::vector<double> se;  // standard errors
  std::size_t nobs = 0;
};

/// OLS via normal equations; X is row-major (rows x k).
inline OlsFit ols(const Matrix& X, const std::vector<double>& y) {
  const std::size_t rows = X.size(), k = X[0].size();
  Matrix xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < k; ++i) {
      xty[i] += X[r][i] * y[r];
      for (std::size_t j = 0; j < k; ++j) xtx[i][j] += X[r][i] * X[r][j];
    }
  OlsFit fit;
  fit.beta = solve(xtx, xty);
  fit.nobs = rows;
  for (std::size_t r = 0; r < rows; ++r) {
    double pred = 0.0;
    for (std::size_t i = 0; i < k; ++i) pred += X[r][i] * fit.beta[i];
    fit.ssr += (y[r] - pred) * (y[r] - pred);
  }
  double sigma2 = fit.ssr / static_cast<double>(rows - k);
  fit.se.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> e(k, 0.0);
    e[i] = 1.0;
    std::vector<double> col = solve(xtx, e);  // i-th column of (X'X)^-1
    fit.se[i] = std::sqrt(sigma2 * col[i]);
  }
  return fit;
}

/// Textbook ADF t-statistic at fixed lag order p:
/// dy_t = a + g*y_{t-1} + sum_i b_i dy_{t-i}, t = p+1 .. n-1; returns t(g).
inline double adf_statistic(const std::vector<double>& y, int p) {
  const std::size_t n = y.size();
  Matrix X;
  std::vector<double> b;
  for (std::size_t t = static_cast<std::size_t>(p) + 1; t < n; ++t) {
    std::vector<double> row{1.0, y[t - 1]};
    for (int l = 1; l <= p; ++l) row.push_back(y[t - l] - y[t - l - 1]);
    X.push_back(std::move(row));
    b.push_back(y[t] - y[t - 1]);
  }
  OlsFit fit = ols(X, b);
  return fit.beta[1] / fit.se[1];
}

/// Two-regression Granger F-statistic (does x's past help predict y).
inline double granger_f(const std::vector<double>& x, const std::vector<double>& y, int p) {
  const std::size_t n = y.size();
  Matrix Xr, Xu;
  std::vector<double> b;
  for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
    std::vector<double> row_r{1.0};
    for (int l = 1; l <= p; ++l) row_r.push_back(y[t - l]);
    std::vector<double> row_u = row_r;
    for (int l = 1; l <= p; ++l) row_u.push_back(x[t - l]);
    Xr.push_back(std::move(row_r));
    Xu.push_back(std::move(row_u));
    b.push_back(y[t]);
  }
  double ssr_r = ols(Xr, b).ssr;
  double ssr_u = ols(Xu, b).ssr;
  double dof = static_cast<double>(b.size()) - (2.0 * p + 1.0);
  return (ssr_r - ssr_u) / p / (ssr_u / dof);
}

/// Brute-force Mann-Whitney AUC over all positive-negative pairs.
inline double auc_pairwise(const std::vector<double>& scores,
                           const std::vector<unsigned char>& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

/// Step-sum average precision over distinct-score thresholds.
inline double ap_stepsum(const std::vector<double>& scores,
                         const std::vector<unsigned char>& labels) {
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double total_pos = 0.0;
  for (auto l : labels) total_pos += l;
  double ap = 0.0, prev_recall = 0.0;
  for (double thr : thresholds) {
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= thr) (labels[i] ? tp : fp) += 1.0;
    double recall = tp / total_pos;
    double precision = tp / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

/// P(target anomaly within lag_window after a candidate anomaly), by direct
/// counting over the verdict arrays.
inline double conditional_prob_count(const std::vector<unsigned char>& target,
                                     const std::vector<unsigned char>& candidate,
                                     int lag_window) {
  long cand = 0, hit = 0;
  const std::size_t n = target.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!candidate[i]) continue;
    ++cand;
    for (std::size_t j = i; j < n && j <= i + static_cast<std::size_t>(lag_window); ++j)
      if (target[j]) {
        ++hit;
        break;
      }
  }
  if (cand == 0) return -1.0;  // sentinel: no candidate anomalies
  return static_cast<double>(hit) / static_cast<double>(cand);
}

}  // namespace oracle
