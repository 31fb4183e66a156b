#include "radf/rca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "radf/stats.hpp"

namespace radf {

const char* to_string(RcaMethod m) {
  switch (m) {
    case RcaMethod::Pearson: return "pearson";
    case RcaMethod::Euclidean: return "euclidean";
    case RcaMethod::Dtw: return "dtw";
    case RcaMethod::Granger: return "granger";
  }
  return "?";
}

RcaMethod rca_method_from_string(const std::string& name) {
  if (name == "pearson") return RcaMethod::Pearson;
  if (name == "euclidean") return RcaMethod::Euclidean;
  if (name == "dtw") return RcaMethod::Dtw;
  if (name == "granger") return RcaMethod::Granger;
  throw InvalidParams("unknown RCA method: " + name);
}

double anomaly_prob(const VerdictSeries& v) {
  if (v.verdicts.empty()) throw EmptySeries();
  long ones = 0;
  for (auto b : v.verdicts) ones += b;
  return static_cast<double>(ones) / static_cast<double>(v.verdicts.size());
}

double conditional_anomaly_prob(const VerdictSeries& target, const VerdictSeries& candidate,
                                int lag_window) {
  if (lag_window < 0) throw InvalidParams("lag_window must be >= 0");
  if (target.timestamps != candidate.timestamps) throw MisalignedInputs();
  const std::size_t n = target.verdicts.size();
  long cand_anoms = 0, hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!candidate.verdicts[i]) continue;
    ++cand_anoms;
    std::size_t hi = std::min(n - 1, i + static_cast<std::size_t>(lag_window));
    for (std::size_t j = i; j <= hi; ++j) {
      if (target.verdicts[j]) {
        ++hits;
        break;
      }
    }
  }
  if (cand_anoms == 0) throw NoCandidateAnomalies();
  return static_cast<double>(hits) / static_cast<double>(cand_anoms);
}

Attribution causal_link(const VerdictSeries& target, const VerdictSeries& candidate,
                        int lag_window) {
  Attribution a;
  a.candidate = candidate.key;
  a.p_target = anomaly_prob(target);
  try {
    a.p_conditional = conditional_anomaly_prob(target, candidate, lag_window);
  } catch (const NoCandidateAnomalies&) {
    a.p_conditional = 0.0;
    a.no_candidate_anomalies = true;
  }
  a.link = a.p_conditional > a.p_target;
  return a;
}

namespace {

std::vector<double> z_normalize(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  double sd = std::sqrt(var / n);
  if (sd < 1e-12 * std::max(1.0, std::abs(mean))) throw ZeroVariance();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) / sd;
  return out;
}

}  // namespace

double pearson(const TimeSeries& a, const TimeSeries& b) {
  if (a.size() != b.size() || a.empty()) throw MisalignedInputs();
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a.values[i];
    mb += b.values[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a.values[i] - ma, db = b.values[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) throw ZeroVariance();
  return sab / std::sqrt(saa * sbb);
}

double euclidean(const TimeSeries& a, const TimeSeries& b) {
  if (a.size() != b.size() || a.empty()) throw MisalignedInputs();
  auto za = z_normalize(a.values), zb = z_normalize(b.values);
  double d2 = 0.0;
  for (std::size_t i = 0; i < za.size(); ++i) {
    double d = za[i] - zb[i];
    d2 += d * d;
  }
  return std::sqrt(d2);
}

double dtw(const TimeSeries& a, const TimeSeries& b, std::optional<int> band) {
  if (a.empty() || b.empty()) throw EmptySeries();
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  if (band && *band < std::abs(n - m)) throw BandInfeasible();
  auto za = z_normalize(a.values), zb = z_normalize(b.values);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (int i = 1; i <= n; ++i) {
    std::fill(cur.begin(), cur.end(), inf);
    int jlo = 1, jhi = m;
    if (band) {
      jlo = std::max(1, i - *band);
      jhi = std::min(m, i + *band);
    }
    for (int j = jlo; j <= jhi; ++j) {
      double cost = std::abs(za[i - 1] - zb[j - 1]);
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

GrangerResult granger(const TimeSeries& candidate, const TimeSeries& target, int max_lag,
                      double alpha) {
  if (candidate.size() != target.size()) throw MisalignedInputs();
  if (max_lag < 1) throw InvalidParams("max_lag must be >= 1");
  const std::size_t n = target.size();
  if (n <= static_cast<std::size_t>(3 * max_lag) + 10) throw SeriesTooShort();

  const std::size_t rows = n - max_lag;
  const int p = max_lag;

  auto ssr_of = [&](bool unrestricted) {
    const int cols = unrestricted ? 2 * p + 1 : p + 1;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      std::size_t t = i + p;
      y(i) = target.values[t];
      X(i, 0) = 1.0;
      for (int l = 1; l <= p; ++l) X(i, l) = target.values[t - l];
      if (unrestricted)
        for (int l = 1; l <= p; ++l) X(i, p + l) = candidate.values[t - l];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) throw SingularRegression();
    return (y - X * qr.solve(y)).squaredNorm();
  };

  double ssr_r = ssr_of(false);
  double ssr_u = ssr_of(true);
  double dof_u = static_cast<double>(rows) - (2 * p + 1);

  GrangerResult r;
  r.f_stat = std::max(0.0, (ssr_r - ssr_u) / p / (ssr_u / dof_u));
  r.p_value = stats::f_survival(r.f_stat, p, dof_u);
  r.causal = r.p_value < alpha;
  return r;
}

double method_strength(RcaMethod method, const TimeSeries& target, const TimeSeries& candidate,
                       int lag_window) {
  switch (method) {
    case RcaMethod::Pearson: return std::abs(pearson(target, candidate));
    case RcaMethod::Euclidean: return 1.0 / (1.0 + euclidean(target, candidate));
    case RcaMethod::Dtw: return 1.0 / (1.0 + dtw(target, candidate));
    case RcaMethod::Granger: {
      GrangerResult g = granger(candidate, target, std::max(1, lag_window));
      return 1.0 - g.p_value;
    }
  }
  throw InvalidParams("unknown method");
}

namespace {

RcaReport run_rca(const SeriesCollection& collection, const MetricKey& target_key,
                  const std::vector<MetricKey>& candidate_keys, const EnsembleConfig& ensemble,
                  RcaMethod method, int lag_window) {
  auto target_it = collection.find(target_key);
  if (target_it == collection.end()) throw NoCandidates("target series not found");
  if (candidate_keys.empty()) throw NoCandidates();

  RcaReport report;
  report.target = target_key;
  if (!target_it->second.empty()) report.generated_at = target_it->second.timestamps.back();

  for (const MetricKey& ck : candidate_keys) {
    auto cand_it = collection.find(ck);
    if (cand_it == collection.end()) continue;
    auto [ta, ca] = align(target_it->second, cand_it->second);
    VerdictSeries tv = detect_ensemble(ensemble, ta);
    VerdictSeries cv = detect_ensemble(ensemble, ca);
    tv.key = target_key;
    cv.key = ck;
    Attribution a = causal_link(tv, cv, lag_window);
    a.method = method;
    try {
      a.strength = method_strength(method, ta, ca, lag_window);
    } catch (const Error&) {
      a.strength = 0.0;  // degenerate pair (constant series etc.)
    }
    report.attributions.push_back(std::move(a));
  }
  if (report.attributions.empty()) throw NoCandidates();

  std::sort(report.attributions.begin(), report.attributions.end(),
            [](const Attribution& x, const Attribution& y) {
              if (x.link != y.link) return x.link > y.link;
              if (x.strength != y.strength) return x.strength > y.strength;
              return x.candidate < y.candidate;
            });
  return report;
}

}  // namespace

RcaReport cross_dimension_rca(const SeriesCollection& collection, const MetricKey& target,
                              const EnsembleConfig& ensemble, RcaMethod method, int lag_window) {
  std::vector<MetricKey> candidates;
  for (const auto& [key, series] : collection)
    if (key.metric == target.metric && !(key == target)) candidates.push_back(key);
  return run_rca(collection, target, candidates, ensemble, method, lag_window);
}

RcaReport cross_metric_rca(const SeriesCollection& collection, const MetricKey& target,
                           const std::vector<MetricKey>& candidates,
                           const EnsembleConfig& ensemble, RcaMethod method, int lag_window) {
  return run_rca(collection, target, candidates, ensemble, method, lag_window);
}

std::string RcaReport::to_text() const {
  std::ostringstream out;
  out.precision(9);
  for (const auto& a : attributions) {
    out << target.to_string() << '\t' << a.candidate.to_string() << '\t' << to_string(a.method)
        << '\t' << a.p_target << '\t' << a.p_conditional << '\t' << (a.link ? 1 : 0) << '\t'
        << a.strength;
    if (a.no_candidate_anomalies) out << "\tno-candidate-anomalies";
    out << '\n';
  }
  return out.str();
}

}  // namespace radf
