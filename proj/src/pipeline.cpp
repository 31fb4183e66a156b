#include "radf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <httplib.h>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "radf/smoothing.hpp"
#include "radf/streaming.hpp"

using nlohmann::json;

namespace radf {

const char* to_string(StageKind s) {
  switch (s) {
    case StageKind::Preprocess: return "preprocess";
    case StageKind::Detect: return "detect";
    case StageKind::Rca: return "rca";
    case StageKind::Postprocess: return "postprocess";
  }
  return "?";
}

// ----------------------------------------------------------- load_config

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items())
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      fail(where, "unknown key '" + key + "'");
}

std::string get_string(const json& obj, const std::string& where, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) fail(where, std::string(key) + " must be a string");
  return obj[key].get<std::string>();
}

DetectorConfig parse_detector(const json& obj, const std::string& where) {
  if (!obj.is_object()) fail(where, "detector must be an object");
  reject_unknown(obj, where, {"name", "params", "tau", "train_fraction"});
  DetectorConfig cfg;
  cfg.name = get_string(obj, where, "name", "");
  if (cfg.name.empty()) fail(where, "detector needs a name");
  try {
    detector_info(cfg.name);
  } catch (const UnknownDetector&) {
    throw;  // surface as UnknownDetector, not ParseError
  }
  if (obj.contains("params")) {
    if (!obj["params"].is_object()) fail(where, "params must be an object");
    for (const auto& [k, v] : obj["params"].items()) {
      if (!v.is_number()) fail(where, "param '" + k + "' must be numeric");
      cfg.params[k] = v.get<double>();
    }
  }
  if (obj.contains("tau")) cfg.tau = obj["tau"].get<double>();
  if (obj.contains("train_fraction")) cfg.train_fraction = obj["train_fraction"].get<double>();
  return cfg;
}

EnsembleConfig parse_ensemble(const json& obj, const std::string& where) {
  reject_unknown(obj, where, {"mode", "members", "quorum"});
  EnsembleConfig e;
  if (!obj.contains("members") || !obj["members"].is_array() || obj["members"].empty())
    fail(where, "explicit detect needs a non-empty members array");
  for (std::size_t i = 0; i < obj["members"].size(); ++i)
    e.members.push_back(parse_detector(obj["members"][i], where + ".members[" + std::to_string(i) + "]"));
  e.quorum = obj.value("quorum", 1);
  if (e.quorum < 1 || e.quorum > static_cast<int>(e.members.size()))
    fail(where, "quorum must be in [1, member count]");
  return e;
}

StageKind stage_from_string(const std::string& name, const std::string& where) {
  if (name == "preprocess") return StageKind::Preprocess;
  if (name == "detect") return StageKind::Detect;
  if (name == "rca") return StageKind::Rca;
  if (name == "postprocess") return StageKind::Postprocess;
  fail(where, "unknown stage '" + name + "'");
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile(path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  const std::string where = path;
  reject_unknown(root, where,
                 {"input", "stages", "preprocess", "detect", "rca", "sinks", "seed", "mode",
                  "workers"});

  PipelineConfig cfg;

  if (!root.contains("input") || !root["input"].is_object()) fail(where, "missing input object");
  {
    const json& in_obj = root["input"];
    reject_unknown(in_obj, where + ".input",
                   {"path", "format", "timestamp_column", "value_column", "metric_column",
                    "metric_name", "dimension_columns", "max_gap", "aggregates"});
    cfg.input.path = get_string(in_obj, where, "path", "");
    if (cfg.input.path.empty()) fail(where, "input.path is required");
    cfg.input.format = get_string(in_obj, where, "format", "csv");
    if (cfg.input.format != "csv" && cfg.input.format != "jsonl")
      fail(where, "input.format must be csv or jsonl");
    cfg.input.timestamp_column = get_string(in_obj, where, "timestamp_column", "timestamp");
    cfg.input.value_column = get_string(in_obj, where, "value_column", "value");
    cfg.input.metric_column = get_string(in_obj, where, "metric_column", "");
    cfg.input.metric_name = get_string(in_obj, where, "metric_name", "metric");
    if (in_obj.contains("dimension_columns"))
      for (const auto& d : in_obj["dimension_columns"])
        cfg.input.dimension_columns.push_back(d.get<std::string>());
    cfg.input.max_gap = in_obj.value("max_gap", 3);
    if (cfg.input.max_gap < 0) fail(where, "input.max_gap must be >= 0");
    if (in_obj.contains("aggregates")) {
      for (const auto& [metric, spec] : in_obj["aggregates"].items()) {
        reject_unknown(spec, where + ".input.aggregates." + metric, {"dimension", "func"});
        AggregateSpec a;
        a.dimension = get_string(spec, where, "dimension", "");
        a.func = get_string(spec, where, "func", "sum");
        if (a.dimension.empty()) fail(where, "aggregate needs a dimension");
        if (a.func != "sum" && a.func != "mean") fail(where, "aggregate func must be sum or mean");
        cfg.input.aggregates[metric] = a;
      }
    }
  }

  if (!root.contains("stages") || !root["stages"].is_array() || root["stages"].empty())
    fail(where, "stages must be a non-empty array");
  for (const auto& s : root["stages"])
    cfg.stage_order.push_back(stage_from_string(s.get<std::string>(), where));

  // Stage-order rules are load-time errors, never runtime ones.
  for (std::size_t i = 1; i < cfg.stage_order.size(); ++i)
    if (static_cast<int>(cfg.stage_order[i]) <= static_cast<int>(cfg.stage_order[i - 1]))
      throw StageOrderViolation("stages must follow preprocess < detect < rca < postprocess");
  auto has_stage = [&](StageKind k) {
    return std::find(cfg.stage_order.begin(), cfg.stage_order.end(), k) != cfg.stage_order.end();
  };
  if (has_stage(StageKind::Rca) && !has_stage(StageKind::Detect))
    throw StageOrderViolation("rca stage requires the detect stage");

  if (root.contains("preprocess")) {
    if (!has_stage(StageKind::Preprocess)) fail(where, "preprocess block without preprocess stage");
    const json& p = root["preprocess"];
    reject_unknown(p, where + ".preprocess", {"smoother", "window"});
    PreprocessStage st;
    st.smoother = get_string(p, where, "smoother", "rolling_median");
    if (st.smoother != "rolling_median" && st.smoother != "moving_average")
      fail(where, "smoother must be rolling_median or moving_average");
    st.window = p.value("window", 5);
    if (st.window < 1) fail(where, "preprocess.window must be >= 1");
    cfg.preprocess = st;
  } else if (has_stage(StageKind::Preprocess)) {
    cfg.preprocess = PreprocessStage{};
  }

  if (has_stage(StageKind::Detect)) {
    if (!root.contains("detect")) fail(where, "detect stage requires a detect block");
    const json& d = root["detect"];
    DetectStage st;
    std::string mode = get_string(d, where, "mode", "auto");
    if (mode == "auto") {
      reject_unknown(d, where + ".detect", {"mode"});
      st.auto_select = true;
    } else if (mode == "ensemble") {
      st.auto_select = false;
      st.ensemble = parse_ensemble(d, where + ".detect");
    } else {
      fail(where, "detect.mode must be auto or ensemble");
    }
    cfg.detect = st;
  } else if (root.contains("detect")) {
    fail(where, "detect block without detect stage");
  }

  if (has_stage(StageKind::Rca)) {
    if (!root.contains("rca")) fail(where, "rca stage requires an rca block");
    const json& r = root["rca"];
    reject_unknown(r, where + ".rca", {"target", "method", "lag_window", "candidates"});
    RcaStage st;
    std::string target = get_string(r, where, "target", "");
    if (target.empty()) fail(where, "rca.target is required");
    st.target = MetricKey::parse(target);
    st.method = rca_method_from_string(get_string(r, where, "method", "pearson"));
    st.lag_window = r.value("lag_window", 0);
    if (st.lag_window < 0) fail(where, "rca.lag_window must be >= 0");
    if (r.contains("candidates"))
      for (const auto& c : r["candidates"]) st.candidates.push_back(MetricKey::parse(c.get<std::string>()));
    cfg.rca = st;
  } else if (root.contains("rca")) {
    fail(where, "rca block without rca stage");
  }

  cfg.postprocess = has_stage(StageKind::Postprocess);

  if (root.contains("sinks")) {
    const json& s = root["sinks"];
    reject_unknown(s, where + ".sinks", {"results_file", "rca_file", "alert_file", "alert_webhook"});
    cfg.sinks.results_file = get_string(s, where, "results_file", "");
    cfg.sinks.rca_file = get_string(s, where, "rca_file", "");
    cfg.sinks.alert_file = get_string(s, where, "alert_file", "");
    cfg.sinks.alert_webhook = get_string(s, where, "alert_webhook", "");
  }
  if ((!cfg.sinks.alert_file.empty() || !cfg.sinks.alert_webhook.empty()) &&
      !has_stage(StageKind::Detect))
    throw AlertWithoutDetect("alert sink requires the detect stage");
  if (!cfg.sinks.rca_file.empty() && !has_stage(StageKind::Rca))
    throw StageOrderViolation("rca_file sink requires the rca stage");

  cfg.seed = root.value("seed", 0);
  cfg.mode = get_string(root, where, "mode", "batch");
  if (cfg.mode != "batch" && cfg.mode != "streaming")
    fail(where, "mode must be batch or streaming");
  if (cfg.mode == "streaming") {
    if (!cfg.detect || cfg.detect->auto_select || cfg.detect->ensemble.members.size() != 1)
      fail(where, "streaming mode requires an explicit single-detector detect block");
    if (cfg.rca) fail(where, "rca stage is batch-only");
  }
  cfg.workers = root.value("workers", 0);
  if (cfg.workers < 0) fail(where, "workers must be >= 0");
  return cfg;
}

namespace {

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

EnsembleConfig load_ensemble(const std::string& path) {
  json root = parse_json_file(path);
  if (root.contains("mode") && root["mode"].get<std::string>() != "ensemble")
    fail(path, "mode must be ensemble");
  return parse_ensemble(root, path);
}

ClassMapping load_mapping(const std::string& path) {
  json root = parse_json_file(path);
  reject_unknown(root, path, {"stable", "unstable", "trend"});
  ClassMapping m = ClassMapping::defaults();
  if (root.contains("stable")) m.stable = parse_ensemble(root["stable"], path + ".stable");
  if (root.contains("unstable")) m.unstable = parse_ensemble(root["unstable"], path + ".unstable");
  if (root.contains("trend")) m.trend = parse_ensemble(root["trend"], path + ".trend");
  return m;
}

// ---------------------------------------------------------------- ingest

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::int64_t parse_timestamp(const std::string& text) {
  if (text.empty()) throw ParseError("empty timestamp");
  bool numeric = true;
  for (std::size_t i = 0; i < text.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(text[i])) && !(i == 0 && text[i] == '-'))
      numeric = false;
  if (numeric) return std::stoll(text);
  // ISO-8601, second resolution, optional trailing Z; treated as UTC.
  std::tm tm{};
  std::istringstream in(text);
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
  if (in.fail()) throw ParseError("bad timestamp '" + text + "'");
  return static_cast<std::int64_t>(timegm(&tm)) * 1000;
}

struct RawPoint {
  std::int64_t ts;
  double value;  // NaN = missing
};

void finalize_key(const MetricKey& key, std::vector<RawPoint>& pts, int max_gap,
                  IngestResult& out) {
  std::stable_sort(pts.begin(), pts.end(),
                   [](const RawPoint& a, const RawPoint& b) { return a.ts < b.ts; });
  std::vector<RawPoint> dedup;
  for (const auto& p : pts) {
    if (!dedup.empty() && dedup.back().ts == p.ts) {
      out.issues.push_back({key.to_string(),
                            "duplicate timestamp " + std::to_string(p.ts) + " dropped"});
      continue;
    }
    dedup.push_back(p);
  }

  // Linear interpolation across short missing runs; longer runs are dropped.
  TimeSeries series;
  for (std::size_t i = 0; i < dedup.size(); ++i) {
    if (!std::isnan(dedup[i].value)) {
      series.timestamps.push_back(dedup[i].ts);
      series.values.push_back(dedup[i].value);
      continue;
    }
    std::size_t j = i;
    while (j < dedup.size() && std::isnan(dedup[j].value)) ++j;
    bool repairable = i > 0 && j < dedup.size() &&
                      j - i <= static_cast<std::size_t>(max_gap);
    if (repairable) {
      double v0 = dedup[i - 1].value, v1 = dedup[j].value;
      std::int64_t t0 = dedup[i - 1].ts, t1 = dedup[j].ts;
      for (std::size_t k = i; k < j; ++k) {
        double frac = static_cast<double>(dedup[k].ts - t0) / static_cast<double>(t1 - t0);
        series.timestamps.push_back(dedup[k].ts);
        series.values.push_back(v0 + frac * (v1 - v0));
      }
    } else {
      out.issues.push_back({key.to_string(),
                            std::to_string(j - i) + " unrepairable missing point(s) dropped"});
    }
    i = j - 1;
  }
  if (!series.empty()) out.collection[key] = std::move(series);
}

void synthesize_aggregates(const SourceDescriptor& src, IngestResult& out) {
  for (const auto& [metric, spec] : src.aggregates) {
    // Group slices by the dimensions other than the collapsed one.
    std::map<MetricKey, std::vector<const TimeSeries*>> groups;
    for (const auto& [key, series] : out.collection) {
      if (key.metric != metric) continue;
      MetricKey group_key = key;
      bool has_dim = false;
      for (auto& [d, v] : group_key.dimensions)
        if (d == spec.dimension) {
          has_dim = true;
          v = "All";
        }
      if (!has_dim || group_key == key) continue;
      groups[group_key].push_back(&series);
    }
    for (auto& [all_key, members] : groups) {
      // Aggregate over timestamps present in every slice.
      std::map<std::int64_t, std::pair<double, std::size_t>> acc;
      for (const TimeSeries* m : members)
        for (std::size_t i = 0; i < m->size(); ++i) {
          auto& slot = acc[m->timestamps[i]];
          slot.first += m->values[i];
          slot.second += 1;
        }
      TimeSeries agg;
      for (const auto& [ts, sum_count] : acc) {
        if (sum_count.second != members.size()) continue;
        agg.timestamps.push_back(ts);
        agg.values.push_back(spec.func == "mean"
                                 ? sum_count.first / static_cast<double>(members.size())
                                 : sum_count.first);
      }
      if (!agg.empty()) out.collection[all_key] = std::move(agg);
    }
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

IngestResult ingest(const SourceDescriptor& src) {
  std::ifstream in(src.path);
  if (!in) throw UnreadableFile(src.path);

  IngestResult out;
  std::map<MetricKey, std::vector<RawPoint>> raw;

  auto add_row = [&](const std::string& ts_text, const std::string& value_text,
                     const std::string& metric, std::vector<std::pair<std::string, std::string>> dims,
                     std::size_t lineno) {
    MetricKey key{metric, std::move(dims)};
    try {
      RawPoint p{parse_timestamp(ts_text), kMissing};
      if (!value_text.empty()) p.value = std::stod(value_text);
      raw[key].push_back(p);
    } catch (const std::exception& e) {
      out.issues.push_back({key.to_string(),
                            src.path + ":" + std::to_string(lineno) + ": " + e.what()});
    }
  };

  std::string line;
  std::size_t lineno = 0;
  if (src.format == "csv") {
    if (!std::getline(in, line)) throw SchemaMismatch(src.path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_csv(line);
    auto col = [&](const std::string& name) -> std::ptrdiff_t {
      auto it = std::find(header.begin(), header.end(), name);
      return it == header.end() ? -1 : it - header.begin();
    };
    std::ptrdiff_t ts_col = col(src.timestamp_column);
    std::ptrdiff_t val_col = col(src.value_column);
    std::ptrdiff_t metric_col = src.metric_column.empty() ? -1 : col(src.metric_column);
    if (ts_col < 0 || val_col < 0 || (!src.metric_column.empty() && metric_col < 0))
      throw SchemaMismatch(src.path + ": missing declared column");
    std::vector<std::ptrdiff_t> dim_cols;
    for (const auto& d : src.dimension_columns) {
      std::ptrdiff_t c = col(d);
      if (c < 0) throw SchemaMismatch(src.path + ": missing dimension column " + d);
      dim_cols.push_back(c);
    }
    lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<std::string> fields = split_csv(line);
      if (fields.size() != header.size()) {
        out.issues.push_back({"", src.path + ":" + std::to_string(lineno) + ": wrong field count"});
        continue;
      }
      std::vector<std::pair<std::string, std::string>> dims;
      for (std::size_t i = 0; i < dim_cols.size(); ++i)
        dims.emplace_back(src.dimension_columns[i], fields[dim_cols[i]]);
      add_row(fields[ts_col], fields[val_col],
              metric_col >= 0 ? fields[metric_col] : src.metric_name, std::move(dims), lineno);
    }
  } else {  // jsonl
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::exception& e) {
        out.issues.push_back({"", src.path + ":" + std::to_string(lineno) + ": " + e.what()});
        continue;
      }
      if (!obj.contains(src.timestamp_column) || !obj.contains(src.value_column))
        throw SchemaMismatch(src.path + ":" + std::to_string(lineno) + ": missing column");
      std::vector<std::pair<std::string, std::string>> dims;
      for (const auto& d : src.dimension_columns) {
        if (!obj.contains(d)) throw SchemaMismatch(src.path + ": missing dimension column " + d);
        dims.emplace_back(d, obj[d].get<std::string>());
      }
      std::string metric = src.metric_column.empty()
                               ? src.metric_name
                               : obj.at(src.metric_column).get<std::string>();
      std::string ts = obj[src.timestamp_column].is_string()
                           ? obj[src.timestamp_column].get<std::string>()
                           : std::to_string(obj[src.timestamp_column].get<std::int64_t>());
      std::string val;
      if (!obj[src.value_column].is_null()) {
        std::ostringstream v;
        v.precision(17);
        v << obj[src.value_column].get<double>();
        val = v.str();
      }
      add_row(ts, val, metric, std::move(dims), lineno);
    }
  }

  for (auto& [key, pts] : raw) finalize_key(key, pts, src.max_gap, out);
  synthesize_aggregates(src, out);
  return out;
}

// ----------------------------------------------------------- run_pipeline

namespace {

TimeSeries apply_preprocess(const TimeSeries& s, const PreprocessStage& st) {
  int w = std::min<int>(st.window, static_cast<int>(s.size()));
  if (st.smoother == "moving_average") return moving_average(s, std::max(w, 1));
  if (w % 2 == 0) w -= 1;
  return rolling_median(s, std::max(w, 1));
}

EnsembleConfig seeded(EnsembleConfig e, std::uint64_t seed) {
  for (auto& m : e.members)
    if (!m.params.contains("seed")) m.params["seed"] = static_cast<double>(seed);
  return e;
}

std::string ensemble_id(const EnsembleConfig& e, bool auto_selected) {
  std::string id;
  for (const auto& m : e.members) {
    if (!id.empty()) id += '+';
    id += m.name;
  }
  if (e.members.size() > 1) id += "@q" + std::to_string(e.quorum);
  if (auto_selected) id += " (auto)";
  return id;
}

/// Scores + verdicts for one ensemble: single member keeps the raw detector
/// score; multi-member ensembles score by vote fraction.
void run_ensemble(const EnsembleConfig& e, const TimeSeries& s, KeyResult& kr) {
  if (e.members.size() == 1) {
    kr.scores = score_series(e.members[0], s);
    kr.verdicts = apply_threshold(kr.scores, effective_tau(e.members[0]));
    kr.verdicts.source = e.members[0].name;
    return;
  }
  std::vector<VerdictSeries> votes;
  for (const auto& m : e.members) votes.push_back(detect(m, s));
  kr.verdicts = majority_vote(votes, e.quorum);
  kr.scores.timestamps = s.timestamps;
  kr.scores.scores.assign(s.size(), 0.0);
  for (const auto& v : votes)
    for (std::size_t i = 0; i < s.size(); ++i) kr.scores.scores[i] += v.verdicts[i];
  for (double& x : kr.scores.scores) x /= static_cast<double>(e.members.size());
}

}  // namespace

bool PipelineResult::any_key_failed() const {
  return std::any_of(keys.begin(), keys.end(),
                     [](const KeyResult& k) { return !k.error.empty(); });
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const SeriesCollection& data) {
  if (data.empty()) throw EmptySeries("pipeline input has no series");

  PipelineResult result;
  result.seed = cfg.seed;
  result.config_hash = config_hash(cfg);
  result.keys.resize(data.size());
  std::vector<const std::pair<const MetricKey, TimeSeries>*> entries;
  for (const auto& kv : data) entries.push_back(&kv);

  // Keys are independent units of work; results land in pre-assigned slots so
  // the merged output is identical for any worker count.
#ifdef _OPENMP
  const int nthreads = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#else
  const int nthreads = 1;
#endif
  (void)nthreads;
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(entries.size()); ++i) {
    KeyResult& kr = result.keys[i];
    kr.key = entries[i]->first;
    try {
      kr.processed = cfg.preprocess ? apply_preprocess(entries[i]->second, *cfg.preprocess)
                                    : entries[i]->second;
      if (cfg.detect) {
        EnsembleConfig ensemble;
        TimeSeries detect_input = kr.processed;
        bool auto_selected = cfg.detect->auto_select;
        if (auto_selected) {
          Recommendation rec = recommend(kr.processed);
          ensemble = rec.ensemble;
          if (rec.detrend)
            detect_input = detrend(kr.processed, default_smooth_window(kr.processed.size()));
        } else {
          ensemble = cfg.detect->ensemble;
        }
        ensemble = seeded(ensemble, cfg.seed);
        kr.detector_id = ensemble_id(ensemble, auto_selected);
        run_ensemble(ensemble, detect_input, kr);
        kr.scores.key = kr.key;
        kr.verdicts.key = kr.key;
      }
    } catch (const Error& e) {
      kr.error = e.what();
    }
  }

  if (cfg.rca) {
    try {
      SeriesCollection processed;
      for (const auto& kr : result.keys)
        if (kr.error.empty()) processed[kr.key] = kr.processed;
      EnsembleConfig ensemble;
      if (cfg.detect && !cfg.detect->auto_select) {
        ensemble = cfg.detect->ensemble;
      } else {
        auto it = processed.find(cfg.rca->target);
        if (it == processed.end()) throw NoCandidates("rca target not found");
        ensemble = recommend(it->second).ensemble;
      }
      ensemble = seeded(ensemble, cfg.seed);
      result.rca = cfg.rca->candidates.empty()
                       ? cross_dimension_rca(processed, cfg.rca->target, ensemble,
                                             cfg.rca->method, cfg.rca->lag_window)
                       : cross_metric_rca(processed, cfg.rca->target, cfg.rca->candidates,
                                          ensemble, cfg.rca->method, cfg.rca->lag_window);
    } catch (const Error& e) {
      result.issues.push_back({cfg.rca->target.to_string(), std::string("rca: ") + e.what()});
    }
  }

  if (cfg.postprocess && cfg.detect) {
    constexpr std::int64_t kDayMs = 86'400'000;
    for (const auto& kr : result.keys) {
      if (!kr.error.empty()) continue;
      std::map<std::int64_t, long> days;
      for (std::size_t i = 0; i < kr.verdicts.verdicts.size(); ++i)
        if (kr.verdicts.verdicts[i]) {
          std::int64_t ts = kr.verdicts.timestamps[i];
          std::int64_t day = (ts >= 0 ? ts : ts - kDayMs + 1) / kDayMs * kDayMs;
          ++days[day];
        }
      for (const auto& [day, count] : days) result.day_counts.push_back({kr.key, day, count});
    }
  }
  return result;
}

// ------------------------------------------------------------------ emit

namespace {

void write_or_record(const std::string& path, const std::string& content,
                     std::vector<std::string>& errors) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    errors.push_back("sink unavailable: " + path);
    return;
  }
  out << content;
}

std::string alert_records(const PipelineResult& result) {
  std::ostringstream out;
  for (const auto& kr : result.keys) {
    for (std::size_t i = 0; i < kr.verdicts.verdicts.size(); ++i) {
      if (!kr.verdicts.verdicts[i]) continue;
      json rec{{"key", kr.key.to_string()},
               {"timestamp", kr.verdicts.timestamps[i]},
               {"value", kr.processed.values[i]},
               {"score", kr.scores.scores[i]},
               {"source", kr.verdicts.source}};
      out << rec.dump() << '\n';
    }
  }
  return out.str();
}

}  // namespace

void emit(const SinkConfig& sinks, PipelineResult& result) {
  if (!sinks.results_file.empty()) {
    std::ostringstream out;
    out.precision(9);
    for (const auto& kr : result.keys) {
      if (!kr.error.empty()) {
        out << kr.key.to_string() << "\terror\t" << kr.error << '\n';
        continue;
      }
      for (std::size_t i = 0; i < kr.verdicts.verdicts.size(); ++i)
        out << kr.key.to_string() << '\t' << kr.verdicts.timestamps[i] << '\t'
            << kr.processed.values[i] << '\t' << kr.scores.scores[i] << '\t'
            << static_cast<int>(kr.verdicts.verdicts[i]) << '\t' << kr.verdicts.source << '\n';
    }
    write_or_record(sinks.results_file, out.str(), result.sink_errors);
  }

  if (!sinks.rca_file.empty()) {
    write_or_record(sinks.rca_file, result.rca ? result.rca->to_text() : "", result.sink_errors);
  }

  if (!sinks.alert_file.empty())
    write_or_record(sinks.alert_file, alert_records(result), result.sink_errors);

  if (!sinks.alert_webhook.empty()) {
    std::string body = alert_records(result);
    // Split http://host[:port]/path.
    std::string url = sinks.alert_webhook;
    std::string path = "/";
    std::string origin = url;
    auto scheme_end = url.find("://");
    if (scheme_end != std::string::npos) {
      auto path_start = url.find('/', scheme_end + 3);
      if (path_start != std::string::npos) {
        origin = url.substr(0, path_start);
        path = url.substr(path_start);
      }
    }
    httplib::Client client(origin);
    client.set_connection_timeout(2, 0);
    auto res = client.Post(path, body, "application/x-ndjson");
    if (!res || res->status >= 300)
      result.sink_errors.push_back("webhook delivery failed: " + sinks.alert_webhook);
  }
}

// -------------------------------------------------------- run_from_config

PipelineResult run_from_config(const PipelineConfig& cfg) {
  IngestResult ingested = ingest(cfg.input);
  PipelineResult result;
  if (cfg.mode == "streaming") {
    result.seed = cfg.seed;
    result.config_hash = config_hash(cfg);
    // Interleave all keys in timestamp order, as a live feed would.
    std::vector<StreamRecord> records;
    for (const auto& [key, series] : ingested.collection) {
      TimeSeries processed =
          cfg.preprocess ? apply_preprocess(series, *cfg.preprocess) : series;
      for (std::size_t i = 0; i < processed.size(); ++i)
        records.push_back({key, processed.timestamps[i], processed.values[i]});
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const StreamRecord& a, const StreamRecord& b) {
                       if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                       return a.key < b.key;
                     });
    DetectorConfig det = seeded(cfg.detect->ensemble, cfg.seed).members[0];
    StreamEngineOptions opts;
    opts.refit_on_changepoint = true;
    std::vector<StreamIssue> issues;
    std::map<MetricKey, KeyResult> by_key;
    for (const auto& v : run_streaming(det, records, opts, &issues)) {
      KeyResult& kr = by_key[v.key];
      kr.key = v.key;
      kr.detector_id = det.name;
      kr.processed.timestamps.push_back(v.timestamp);
      kr.processed.values.push_back(v.value);
      kr.scores.timestamps.push_back(v.timestamp);
      kr.scores.scores.push_back(v.score);
      kr.verdicts.timestamps.push_back(v.timestamp);
      kr.verdicts.verdicts.push_back(v.verdict);
      kr.verdicts.source = det.name;
    }
    for (auto& [key, kr] : by_key) {
      kr.scores.key = key;
      kr.verdicts.key = key;
      result.keys.push_back(std::move(kr));
    }
    for (const auto& is : issues)
      result.issues.push_back({is.key.to_string(),
                               "out-of-order record at " + std::to_string(is.timestamp)});
  } else {
    result = run_pipeline(cfg, ingested.collection);
  }
  result.issues.insert(result.issues.begin(), ingested.issues.begin(), ingested.issues.end());
  emit(cfg.sinks, result);
  return result;
}

// ------------------------------------------------------------ config_hash

std::uint64_t config_hash(const PipelineConfig& cfg) {
  std::ostringstream s;
  s.precision(17);
  s << cfg.input.path << '|' << cfg.input.format << '|' << cfg.input.timestamp_column << '|'
    << cfg.input.value_column << '|' << cfg.input.metric_column << '|' << cfg.input.metric_name
    << '|' << cfg.input.max_gap << '|';
  for (const auto& d : cfg.input.dimension_columns) s << d << ';';
  for (const auto& [m, a] : cfg.input.aggregates) s << m << '=' << a.dimension << ':' << a.func << ';';
  for (auto st : cfg.stage_order) s << to_string(st) << ';';
  if (cfg.preprocess) s << cfg.preprocess->smoother << ':' << cfg.preprocess->window;
  if (cfg.detect) {
    s << "|detect:" << (cfg.detect->auto_select ? "auto" : "ensemble");
    for (const auto& m : cfg.detect->ensemble.members) {
      s << ';' << m.name << ':' << m.tau << ':' << m.train_fraction;
      for (const auto& [k, v] : m.params) s << ',' << k << '=' << v;
    }
    s << ";q" << cfg.detect->ensemble.quorum;
  }
  if (cfg.rca)
    s << "|rca:" << cfg.rca->target.to_string() << ':' << to_string(cfg.rca->method) << ':'
      << cfg.rca->lag_window;
  s << "|post:" << cfg.postprocess << "|seed:" << cfg.seed << "|mode:" << cfg.mode;

  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace radf
