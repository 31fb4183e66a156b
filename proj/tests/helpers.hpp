// Shared fixture generators for the test suite.
#pragma once

#include <random>
#include <vector>

#include "radf/time_series.hpp"

namespace fixtures {

inline radf::TimeSeries ts_of(std::vector<double> values, std::int64_t step_ms = 60'000) {
  radf::TimeSeries s;
  for (std::size_t i = 0; i < values.size(); ++i)
    s.timestamps.push_back(static_cast<std::int64_t>(i) * step_ms);
  s.values = std::move(values);
  return s;
}

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double mean = 0.0,
                                    double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  double x = 0.0;
  for (auto& out : v) {
    x = phi * x + d(rng);
    out = x;
  }
  return v;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  return ar1(n, 1.0, seed, sd);
}

inline std::vector<double> ramp(std::size_t n, double slope, std::uint64_t seed,
                                double noise_sd) {
  std::vector<double> v = gaussian(n, seed, 0.0, noise_sd);
  for (std::size_t i = 0; i < n; ++i) v[i] += slope * static_cast<double>(i);
  return v;
}

inline std::vector<double> seasonal(std::size_t n, int period, double amplitude,
                                    std::uint64_t seed, double noise_sd,
                                    double trend_slope = 0.0) {
  std::vector<double> v = gaussian(n, seed, 0.0, noise_sd);
  for (std::size_t i = 0; i < n; ++i)
    v[i] += amplitude * std::sin(2.0 * M_PI * static_cast<double>(i % period) / period) +
            trend_slope * static_cast<double>(i);
  return v;
}

}  // namespace fixtures
