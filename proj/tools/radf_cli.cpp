#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "radf/benchmark.hpp"
#include "radf/mselect.hpp"
#include "radf/pipeline.hpp"
#include "radf/rca.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

int g_log_level = 2;  // 0=error 1=warn 2=info 3=debug

void log_info(const std::string& msg) {
  if (g_log_level >= 2) std::cerr << "[info] " << msg << '\n';
}
void log_warn(const std::string& msg) {
  if (g_log_level >= 1) std::cerr << "[warn] " << msg << '\n';
}

bool is_config_error(const radf::Error& e) {
  return dynamic_cast<const radf::ParseError*>(&e) ||
         dynamic_cast<const radf::SchemaMismatch*>(&e) ||
         dynamic_cast<const radf::StageOrderViolation*>(&e) ||
         dynamic_cast<const radf::AlertWithoutDetect*>(&e) ||
         dynamic_cast<const radf::UnknownDetector*>(&e) ||
         dynamic_cast<const radf::InvalidParams*>(&e) ||
         dynamic_cast<const radf::UnreadableFile*>(&e);
}

/// CSV with a `timestamp,value[,label]` header (extra columns ignored).
radf::TimeSeries load_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw radf::UnreadableFile(path);
  std::string line;
  if (!std::getline(in, line)) throw radf::ParseError(path + ": empty file");
  radf::TimeSeries s;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string ts, val;
    if (!std::getline(row, ts, ',') || !std::getline(row, val, ','))
      throw radf::ParseError(path + ":" + std::to_string(lineno) + ": expected timestamp,value");
    s.timestamps.push_back(std::stoll(ts));
    s.values.push_back(std::stod(val));
  }
  s.validate();
  return s;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed) {
  radf::PipelineConfig cfg = radf::load_config(config_path);
  if (seed) cfg.seed = *seed;
  radf::PipelineResult result = radf::run_from_config(cfg);
  long anomalies = 0;
  for (const auto& kr : result.keys)
    for (auto v : kr.verdicts.verdicts) anomalies += v;
  std::cout << "keys=" << result.keys.size() << " anomalies=" << anomalies
            << " seed=" << result.seed << " config_hash=" << result.config_hash << '\n';
  for (const auto& kr : result.keys)
    if (!kr.error.empty())
      std::cout << "key_error\t" << kr.key.to_string() << '\t' << kr.error << '\n';
  for (const auto& dc : result.day_counts)
    std::cout << "day_count\t" << dc.key.to_string() << '\t' << dc.day_start_ms << '\t'
              << dc.anomalies << '\n';
  for (const auto& issue : result.issues) log_warn(issue.key + ": " + issue.message);
  for (const auto& err : result.sink_errors) log_warn(err);
  return result.any_key_failed() ? kExitRuntimeError : kExitOk;
}

int cmd_classify(const std::string& input) {
  radf::TimeSeries s = load_series(input);
  radf::TrendTestResult tt = radf::trend_test(s, radf::default_smooth_window(s.size()));
  radf::AdfResult adf = radf::adf_test(s, radf::default_adf_max_lag(s.size()));
  std::cout << "class=" << radf::to_string(radf::classify(s)) << '\n'
            << "trend.coefficient=" << tt.coefficient << '\n'
            << "trend.slope=" << tt.slope << '\n'
            << "trend.is_trend=" << (tt.is_trend ? "true" : "false") << '\n'
            << "adf.statistic=" << adf.statistic << '\n'
            << "adf.lags_used=" << adf.lags_used << '\n'
            << "adf.reject_nonstationarity=" << (adf.reject_nonstationarity ? "true" : "false")
            << '\n';
  return kExitOk;
}

int cmd_recommend(const std::string& input, const std::string& mapping_path) {
  radf::TimeSeries s = load_series(input);
  radf::ClassMapping mapping =
      mapping_path.empty() ? radf::ClassMapping::defaults() : radf::load_mapping(mapping_path);
  radf::Recommendation rec = radf::recommend(s, mapping);
  std::cout << "class=" << radf::to_string(rec.series_class) << '\n'
            << "detrend=" << (rec.detrend ? "true" : "false") << '\n'
            << "rationale=" << rec.rationale << '\n'
            << "quorum=" << rec.ensemble.quorum << '\n';
  for (const auto& m : rec.ensemble.members)
    std::cout << "member=" << m.name << " tau=" << radf::effective_tau(m) << '\n';
  return kExitOk;
}

int cmd_benchmark(const std::string& data_dir, const std::string& config_path, int buffer,
                  std::optional<std::uint64_t> seed) {
  radf::EnsembleConfig ensemble = radf::load_ensemble(config_path);
  if (seed)
    for (auto& m : ensemble.members)
      if (!m.params.contains("seed")) m.params["seed"] = static_cast<double>(*seed);
  radf::BenchmarkReport report = radf::benchmark_run(data_dir, ensemble, buffer);
  std::cout << report.to_csv() << '\n' << report.summary();
  return kExitOk;
}

int cmd_rca(const std::string& config_path, const std::string& target_text,
            std::optional<std::uint64_t> seed) {
  radf::PipelineConfig cfg = radf::load_config(config_path);
  if (seed) cfg.seed = *seed;
  radf::MetricKey target = radf::MetricKey::parse(target_text);
  radf::IngestResult ingested = radf::ingest(cfg.input);
  for (const auto& issue : ingested.issues) log_warn(issue.key + ": " + issue.message);

  radf::EnsembleConfig ensemble;
  if (cfg.detect && !cfg.detect->auto_select) {
    ensemble = cfg.detect->ensemble;
  } else {
    auto it = ingested.collection.find(target);
    if (it == ingested.collection.end()) throw radf::NoCandidates("target series not found");
    ensemble = radf::recommend(it->second).ensemble;
  }
  if (seed || cfg.seed)
    for (auto& m : ensemble.members)
      if (!m.params.contains("seed")) m.params["seed"] = static_cast<double>(cfg.seed);

  radf::RcaMethod method = cfg.rca ? cfg.rca->method : radf::RcaMethod::Pearson;
  int lag_window = cfg.rca ? cfg.rca->lag_window : 0;
  radf::RcaReport report =
      (cfg.rca && !cfg.rca->candidates.empty())
          ? radf::cross_metric_rca(ingested.collection, target, cfg.rca->candidates, ensemble,
                                   method, lag_window)
          : radf::cross_dimension_rca(ingested.collection, target, ensemble, method, lag_window);
  std::cout << report.to_text();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radf: config-driven time-series anomaly detection"};
  app.require_subcommand(1);
  // Let "radf run --config c.json --seed 7" work: unmatched options on a
  // subcommand fall through to the global flags above.

  std::optional<std::uint64_t> seed;
  std::string log_level = "info";
  app.add_option("--seed", seed, "Seed governing all randomness");
  app.add_option("--log-level", log_level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  std::string config_path, input_path, mapping_path, data_dir, target;
  int buffer = 0;

  auto* run = app.add_subcommand("run", "Execute a pipeline config");
  run->fallthrough();
  run->add_option("--config", config_path, "Pipeline config (JSON)")->required();

  auto* classify = app.add_subcommand("classify", "Classify a series (Stable/Unstable/Trend)");
  classify->fallthrough();
  classify->add_option("--input", input_path, "CSV with timestamp,value header")->required();

  auto* recommend = app.add_subcommand("recommend", "Recommend a detector ensemble");
  recommend->fallthrough();
  recommend->add_option("--input", input_path, "CSV with timestamp,value header")->required();
  recommend->add_option("--mapping", mapping_path, "Class-to-ensemble mapping (JSON)");

  auto* benchmark = app.add_subcommand("benchmark", "Evaluate on a labeled dataset directory");
  benchmark->fallthrough();
  benchmark->add_option("--data", data_dir, "Directory of timestamp,value,label CSVs")->required();
  benchmark->add_option("--config", config_path, "Detect block (JSON)")->required();
  benchmark->add_option("--buffer", buffer, "VUS buffer L")->check(CLI::NonNegativeNumber);

  auto* rca = app.add_subcommand("rca", "Cross-dimension/metric root cause analysis");
  rca->fallthrough();
  rca->add_option("--config", config_path, "Pipeline config (JSON)")->required();
  rca->add_option("--target", target, "Target series key, e.g. metric[dim=All]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Collapse CLI11's exit-code zoo onto the documented contract: help and
    // version exit 0, every usage mistake exits 1.
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }
  g_log_level = log_level == "error" ? 0 : log_level == "warn" ? 1 : log_level == "info" ? 2 : 3;

  try {
    if (run->parsed()) return cmd_run(config_path, seed);
    if (classify->parsed()) return cmd_classify(input_path);
    if (recommend->parsed()) return cmd_recommend(input_path, mapping_path);
    if (benchmark->parsed()) return cmd_benchmark(data_dir, config_path, buffer, seed);
    if (rca->parsed()) return cmd_rca(config_path, target, seed);
  } catch (const radf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_config_error(e) ? kExitConfigError : kExitRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitOk;
}
