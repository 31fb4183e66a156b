#include "radf/smoothing.hpp"

#include <algorithm>
#include <cmath>

namespace radf {

namespace {

double median_of(std::vector<double>& buf) {
  const std::size_t n = buf.size();
  auto mid = buf.begin() + n / 2;
  std::nth_element(buf.begin(), mid, buf.end());
  double hi = *mid;
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(buf.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

TimeSeries rolling_median(const TimeSeries& s, int window) {
  if (window < 1 || window % 2 == 0) throw InvalidParams("window must be odd and >= 1");
  const std::size_t n = s.size();
  if (static_cast<std::size_t>(window) > n) throw WindowTooLarge();
  TimeSeries out;
  out.timestamps = s.timestamps;
  out.values.resize(n);
  const int h = window / 2;
  std::vector<double> buf;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i >= static_cast<std::size_t>(h) ? i - h : 0;
    std::size_t hi = std::min(n - 1, i + h);
    buf.assign(s.values.begin() + lo, s.values.begin() + hi + 1);
    out.values[i] = median_of(buf);
  }
  return out;
}

TimeSeries moving_average(const TimeSeries& s, int window) {
  if (window < 1) throw InvalidParams("window must be >= 1");
  const std::size_t n = s.size();
  if (static_cast<std::size_t>(window) > n) throw WindowTooLarge();
  TimeSeries out;
  out.timestamps = s.timestamps;
  out.values.resize(n);
  const int h = window / 2;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i >= static_cast<std::size_t>(h) ? i - h : 0;
    std::size_t hi = std::min(n - 1, i + h);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += s.values[j];
    out.values[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

TimeSeries cyclic_subseries_smooth(const TimeSeries& s, int period) {
  if (period < 2) throw InvalidParams("period must be >= 2");
  const std::size_t n = s.size();
  if (n < 2 * static_cast<std::size_t>(period)) throw SeriesTooShort();
  TimeSeries out;
  out.timestamps = s.timestamps;
  out.values.resize(n);
  std::vector<double> buf;
  for (int phase = 0; phase < period; ++phase) {
    buf.clear();
    for (std::size_t i = phase; i < n; i += period) buf.push_back(s.values[i]);
    std::vector<double> tmp = buf;
    double med = median_of(tmp);
    for (std::size_t i = phase; i < n; i += period) out.values[i] = med;
  }
  return out;
}

TimeSeries apply_smoother(const TimeSeries& s, const SmootherConfig& cfg) {
  switch (cfg.kind) {
    case SmootherKind::RollingMedian: return rolling_median(s, cfg.window);
    case SmootherKind::MovingAverage: return moving_average(s, cfg.window);
    case SmootherKind::CyclicSubseries: return cyclic_subseries_smooth(s, cfg.window);
  }
  throw InvalidParams("unknown smoother kind");
}

TimeSeries ensemble_smooth(const TimeSeries& s, const std::vector<SmootherConfig>& members) {
  if (members.empty()) throw InvalidParams("ensemble_smooth requires members");
  TimeSeries acc = apply_smoother(s, members[0]);
  for (std::size_t m = 1; m < members.size(); ++m) {
    TimeSeries next = apply_smoother(s, members[m]);
    for (std::size_t i = 0; i < acc.size(); ++i) acc.values[i] += next.values[i];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (double& v : acc.values) v *= inv;
  return acc;
}

}  // namespace radf
