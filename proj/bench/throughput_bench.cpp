// Compares the serial (workers=1) and OpenMP (workers=hardware) per-key
// batch paths, and measures streaming throughput for the zscore detector.

#include <chrono>
#include <cstdio>
#include <random>

#include "radf/pipeline.hpp"
#include "radf/streaming.hpp"

using Clock = std::chrono::steady_clock;

namespace {

radf::SeriesCollection make_collection(int keys, int points, std::uint64_t seed) {
  radf::SeriesCollection out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int k = 0; k < keys; ++k) {
    radf::TimeSeries s;
    for (int i = 0; i < points; ++i) {
      s.timestamps.push_back(60'000LL * i);
      s.values.push_back(noise(rng) + (i % 500 == 250 ? 8.0 : 0.0));
    }
    out[radf::MetricKey{"bench", {{"key", std::to_string(k)}}}] = std::move(s);
  }
  return out;
}

double run_batch(const radf::SeriesCollection& data, int workers) {
  radf::PipelineConfig cfg;
  cfg.detect = radf::DetectStage{};
  cfg.detect->auto_select = false;
  cfg.detect->ensemble.members = {radf::DetectorConfig{.name = "zscore"}};
  cfg.detect->ensemble.quorum = 1;
  cfg.stage_order = {radf::StageKind::Detect};
  cfg.workers = workers;
  auto t0 = Clock::now();
  radf::PipelineResult result = radf::run_pipeline(cfg, data);
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  long points = 0;
  for (const auto& kr : result.keys) points += static_cast<long>(kr.verdicts.verdicts.size());
  return static_cast<double>(points) / secs;
}

double run_streaming_bench(int keys, int points) {
  std::vector<radf::StreamRecord> records;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < points; ++i)
    for (int k = 0; k < keys; ++k)
      records.push_back({radf::MetricKey{"bench", {{"key", std::to_string(k)}}}, 60'000LL * i,
                         noise(rng)});
  radf::DetectorConfig cfg{.name = "zscore"};
  auto t0 = Clock::now();
  auto verdicts = radf::run_streaming(cfg, records, {}, nullptr);
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return static_cast<double>(verdicts.size()) / secs;
}

}  // namespace

int main() {
  const int keys = 64, points = 20'000;
  radf::SeriesCollection data = make_collection(keys, points, 1);

  double serial = run_batch(data, 1);
  double parallel = run_batch(data, 0);
  double streaming = run_streaming_bench(10, 100'000);

  std::printf("batch  serial   : %12.0f points/s\n", serial);
  std::printf("batch  parallel : %12.0f points/s  (speedup %.2fx)\n", parallel, parallel / serial);
  std::printf("stream zscore   : %12.0f points/s  (10 keys)\n", streaming);
  return 0;
}
