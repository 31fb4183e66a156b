#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "radf/benchmark.hpp"
#include "radf/pipeline.hpp"
#include "radf/streaming.hpp"

using namespace radf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("radf_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    fs::path p = path / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string slurp(const std::string& name) const {
    std::ifstream in(path / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

std::string traffic_csv(std::uint64_t seed, bool corrupt_uk = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::ostringstream out;
  out.precision(12);
  out << "timestamp,value,country\n";
  for (int i = 0; i < 200; ++i) {
    double usa = 100.0 + noise(rng) + (i == 170 ? 30.0 : 0.0);
    double uk = 80.0 + noise(rng) + (corrupt_uk && i == 50 ? 500.0 : 0.0);
    out << 60000LL * i << ',' << usa << ",USA\n";
    out << 60000LL * i << ',' << uk << ",UK\n";
  }
  return out.str();
}

std::string pipeline_config(const std::string& data_path, const TempDir& dir, int workers) {
  std::ostringstream cfg;
  cfg << R"({
  "input": {
    "path": ")" << data_path << R"(",
    "metric_name": "web_traffic",
    "dimension_columns": ["country"],
    "aggregates": {"web_traffic": {"dimension": "country", "func": "sum"}}
  },
  "stages": ["detect", "rca", "postprocess"],
  "detect": {"mode": "ensemble", "members": [{"name": "zscore", "tau": 4.0}]},
  "rca": {"target": "web_traffic[country=All]", "method": "pearson", "lag_window": 1},
  "sinks": {
    "results_file": ")" << (dir.path / "results.txt").string() << R"(",
    "rca_file": ")" << (dir.path / "rca.txt").string() << R"(",
    "alert_file": ")" << (dir.path / "alerts.jsonl").string() << R"("
  },
  "seed": 7,
  "workers": )" << workers << R"(
})";
  return cfg.str();
}

}  // namespace

TEST_CASE("load_config accepts a minimal config and applies defaults") {
  TempDir dir;
  std::string path = dir.file("cfg.json", R"({
    "input": {"path": "data.csv"},
    "stages": ["detect"],
    "detect": {"mode": "auto"}
  })");
  PipelineConfig cfg = load_config(path);
  CHECK(cfg.input.timestamp_column == "timestamp");
  CHECK(cfg.input.max_gap == 3);
  CHECK(cfg.detect->auto_select);
  CHECK(cfg.mode == "batch");
  CHECK(cfg.seed == 0);
}

TEST_CASE("load_config rejects invalid configs at load time") {
  TempDir dir;
  auto loads = [&](const std::string& body) { return load_config(dir.file("c.json", body)); };

  // Alert sink without the detect stage.
  CHECK_THROWS_AS(loads(R"({
    "input": {"path": "d.csv"},
    "stages": ["preprocess"],
    "sinks": {"alert_file": "a.jsonl"}
  })"),
                  AlertWithoutDetect);

  // rca before detect in the stage order.
  CHECK_THROWS_AS(loads(R"({
    "input": {"path": "d.csv"},
    "stages": ["rca", "detect"],
    "detect": {"mode": "auto"},
    "rca": {"target": "m"}
  })"),
                  StageOrderViolation);

  // rca stage with no detect stage at all.
  CHECK_THROWS_AS(loads(R"({
    "input": {"path": "d.csv"},
    "stages": ["rca"],
    "rca": {"target": "m"}
  })"),
                  StageOrderViolation);

  // Unknown detector name.
  CHECK_THROWS_AS(loads(R"({
    "input": {"path": "d.csv"},
    "stages": ["detect"],
    "detect": {"mode": "ensemble", "members": [{"name": "nope"}]}
  })"),
                  UnknownDetector);

  // Unknown key: fail fast.
  CHECK_THROWS_AS(loads(R"({
    "input": {"path": "d.csv"},
    "stages": ["detect"],
    "detect": {"mode": "auto"},
    "surprise": 1
  })"),
                  ParseError);

  CHECK_THROWS_AS(load_config((dir.path / "missing.json").string()), UnreadableFile);
}

TEST_CASE("ingest groups by dimensions and synthesizes the All aggregate") {
  TempDir dir;
  std::string data = dir.file("t.csv", traffic_csv(1));
  SourceDescriptor src;
  src.path = data;
  src.metric_name = "web_traffic";
  src.dimension_columns = {"country"};
  src.aggregates["web_traffic"] = {.dimension = "country", .func = "sum"};

  IngestResult r = ingest(src);
  MetricKey usa{"web_traffic", {{"country", "USA"}}};
  MetricKey uk{"web_traffic", {{"country", "UK"}}};
  MetricKey all{"web_traffic", {{"country", "All"}}};
  REQUIRE(r.collection.size() == 3);
  CHECK(r.collection.at(usa).size() == 200);
  CHECK(r.collection.at(all).values[0] ==
        doctest::Approx(r.collection.at(usa).values[0] + r.collection.at(uk).values[0]));

  src.aggregates["web_traffic"].func = "mean";
  IngestResult rm = ingest(src);
  CHECK(rm.collection.at(all).values[0] ==
        doctest::Approx((r.collection.at(usa).values[0] + r.collection.at(uk).values[0]) / 2));
}

TEST_CASE("ingest is order-independent, rejects duplicates, repairs short gaps") {
  TempDir dir;
  std::string sorted = dir.file("sorted.csv",
                                "timestamp,value\n0,1\n60,2\n120,3\n180,4\n240,5\n");
  std::string shuffled = dir.file("shuffled.csv",
                                  "timestamp,value\n240,5\n0,1\n180,4\n60,2\n120,3\n");
  SourceDescriptor src;
  src.path = sorted;
  auto a = ingest(src);
  src.path = shuffled;
  auto b = ingest(src);
  CHECK(a.collection.begin()->second.values == b.collection.begin()->second.values);
  CHECK(a.collection.begin()->second.timestamps == b.collection.begin()->second.timestamps);

  // Duplicate timestamps: first kept, issue recorded.
  src.path = dir.file("dup.csv", "timestamp,value\n0,1\n60,2\n60,9\n120,3\n");
  auto d = ingest(src);
  CHECK(d.collection.begin()->second.size() == 3);
  REQUIRE(d.issues.size() == 1);
  CHECK(d.issues[0].message.find("duplicate") != std::string::npos);

  // A 2-point gap inside max_gap=3 is linearly interpolated.
  src.path = dir.file("gap.csv", "timestamp,value\n0,0\n60,\n120,\n180,3\n240,4\n");
  auto g = ingest(src);
  const TimeSeries& gs = g.collection.begin()->second;
  REQUIRE(gs.size() == 5);
  CHECK(gs.values[1] == doctest::Approx(1.0));
  CHECK(gs.values[2] == doctest::Approx(2.0));

  // A gap longer than max_gap is dropped.
  src.max_gap = 1;
  auto dropped = ingest(src);
  CHECK(dropped.collection.begin()->second.size() == 3);
  CHECK(!dropped.issues.empty());

  // Missing value column.
  src.path = dir.file("bad.csv", "timestamp,count\n0,1\n");
  CHECK_THROWS_AS(ingest(src), SchemaMismatch);
}

TEST_CASE("ingest reads jsonl with ISO-8601 timestamps") {
  TempDir dir;
  SourceDescriptor src;
  src.format = "jsonl";
  src.path = dir.file("t.jsonl",
                      R"({"timestamp": "2026-01-01T00:00:00Z", "value": 1.5})"
                      "\n"
                      R"({"timestamp": "2026-01-01T00:01:00Z", "value": 2.5})"
                      "\n");
  auto r = ingest(src);
  const TimeSeries& s = r.collection.begin()->second;
  REQUIRE(s.size() == 2);
  CHECK(s.timestamps[1] - s.timestamps[0] == 60'000);
  CHECK(s.values[1] == doctest::Approx(2.5));
}

TEST_CASE("pipeline output is byte-identical across runs and worker counts") {
  TempDir dir;
  std::string data = dir.file("traffic.csv", traffic_csv(3));

  auto run_with = [&](int workers) {
    PipelineConfig cfg = load_config(dir.file("cfg.json", pipeline_config(data, dir, workers)));
    PipelineResult result = run_from_config(cfg);
    CHECK(result.sink_errors.empty());
    return std::tuple{dir.slurp("results.txt"), dir.slurp("rca.txt"), dir.slurp("alerts.jsonl")};
  };

  auto first = run_with(1);
  auto again = run_with(1);
  auto wide = run_with(8);
  CHECK(first == again);
  CHECK(first == wide);

  // The fixture anomaly appears in the results and the RCA report names USA.
  CHECK(std::get<0>(first).find("\t1\t") != std::string::npos);
  CHECK(std::get<1>(first).find("web_traffic[country=USA]") != std::string::npos);
  CHECK(!std::get<2>(first).empty());
}

TEST_CASE("per-key isolation: corrupting one key changes only that key's output") {
  TempDir dir;
  std::string clean = dir.file("clean.csv", traffic_csv(5, false));
  std::string corrupt = dir.file("corrupt.csv", traffic_csv(5, true));

  auto results_for = [&](const std::string& data) {
    PipelineConfig cfg = load_config(dir.file("cfg.json", pipeline_config(data, dir, 0)));
    cfg.rca.reset();
    cfg.stage_order = {StageKind::Detect};
    IngestResult ing = ingest(cfg.input);
    return run_pipeline(cfg, ing.collection);
  };

  PipelineResult a = results_for(clean);
  PipelineResult b = results_for(corrupt);
  MetricKey usa{"web_traffic", {{"country", "USA"}}};
  for (std::size_t i = 0; i < a.keys.size(); ++i) {
    if (a.keys[i].key == usa)
      CHECK(a.keys[i].verdicts.verdicts == b.keys[i].verdicts.verdicts);
  }
  // The corrupted UK slice must differ (the spike trips the detector).
  MetricKey uk{"web_traffic", {{"country", "UK"}}};
  for (std::size_t i = 0; i < a.keys.size(); ++i)
    if (a.keys[i].key == uk) CHECK(a.keys[i].verdicts.verdicts != b.keys[i].verdicts.verdicts);
}

TEST_CASE("one key's failure is recorded without aborting the others") {
  SeriesCollection data;
  data[MetricKey{"m", {{"k", "good"}}}] = fixtures::ts_of(fixtures::gaussian(100, 1));
  data[MetricKey{"m", {{"k", "short"}}}] = fixtures::ts_of({1.0, 2.0});  // below min_train

  PipelineConfig cfg;
  cfg.stage_order = {StageKind::Detect};
  cfg.detect = DetectStage{};
  cfg.detect->auto_select = false;
  cfg.detect->ensemble.members = {DetectorConfig{.name = "zscore"}};
  PipelineResult r = run_pipeline(cfg, data);
  REQUIRE(r.keys.size() == 2);
  CHECK(r.any_key_failed());
  int failed = 0;
  for (const auto& kr : r.keys) {
    if (!kr.error.empty()) ++failed;
    else CHECK(kr.verdicts.verdicts.size() == 100);
  }
  CHECK(failed == 1);
}

TEST_CASE("streaming mode produces per-key verdicts through run_from_config") {
  TempDir dir;
  std::string data = dir.file("traffic.csv", traffic_csv(11));
  std::string cfg_text = R"({
    "input": {"path": ")" + data + R"(", "metric_name": "web_traffic",
              "dimension_columns": ["country"]},
    "stages": ["detect"],
    "detect": {"mode": "ensemble", "members": [{"name": "zscore", "tau": 4.0}]},
    "mode": "streaming"
  })";
  PipelineConfig cfg = load_config(dir.file("cfg.json", cfg_text));
  PipelineResult r = run_from_config(cfg);
  REQUIRE(r.keys.size() == 2);
  long anomalies = 0;
  for (const auto& kr : r.keys)
    for (auto v : kr.verdicts.verdicts) anomalies += v;
  CHECK(anomalies >= 1);  // the injected USA spike
}

TEST_CASE("streaming config validation requires an explicit single detector") {
  TempDir dir;
  CHECK_THROWS_AS(load_config(dir.file("c.json", R"({
    "input": {"path": "d.csv"},
    "stages": ["detect"],
    "detect": {"mode": "auto"},
    "mode": "streaming"
  })")),
                  ParseError);
}

TEST_CASE("benchmark_run scores a labeled fixture directory deterministically") {
  TempDir dir;
  fs::create_directories(dir.path / "data");
  {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::ostringstream spike, flat;
    spike << "timestamp,value,label\n";
    flat << "timestamp,value,label\n";
    for (int i = 0; i < 200; ++i) {
      double v = noise(rng);
      spike << 1000LL * i << ',' << (i == 150 ? v + 10.0 : v) << ',' << (i == 150 ? 1 : 0)
            << '\n';
      flat << 1000LL * i << ',' << noise(rng) << ",0\n";
    }
    std::ofstream(dir.path / "data" / "spike.csv") << spike.str();
    std::ofstream(dir.path / "data" / "allzero.csv") << flat.str();
  }

  DetectorConfig zscore{.name = "zscore", .tau = 4.0};
  BenchmarkReport r = benchmark_run((dir.path / "data").string(), zscore, 2);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].series_id == "allzero");
  CHECK(r.rows[0].status == "degenerate");
  CHECK(r.rows[1].series_id == "spike");
  CHECK(r.rows[1].status == "ok");
  CHECK(r.rows[1].f1 == doctest::Approx(1.0));
  CHECK(r.rows[1].auc == doctest::Approx(1.0));

  BenchmarkReport r2 = benchmark_run((dir.path / "data").string(), zscore, 2);
  CHECK(r.to_csv(false) == r2.to_csv(false));  // byte-identical modulo wall clock
  CHECK(r.summary() == r2.summary());

  fs::create_directories(dir.path / "empty");
  CHECK(benchmark_run((dir.path / "empty").string(), zscore, 2).rows.empty());
  CHECK_THROWS_AS(benchmark_run((dir.path / "nodir").string(), zscore, 2), UnreadableFile);
}
