#include "radf/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "radf/metrics.hpp"

namespace fs = std::filesystem;

namespace radf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string detector_id_of(const EnsembleConfig& e) {
  std::string id;
  for (const auto& m : e.members) {
    if (!id.empty()) id += '+';
    id += m.name;
  }
  if (e.members.size() > 1) id += "@q" + std::to_string(e.quorum);
  return id;
}

void put(std::ostringstream& out, double v) {
  if (std::isnan(v)) {
    out << ',';
  } else {
    out << ',' << v;
  }
}

}  // namespace

LabeledSeries load_labeled_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp,value,label")
    throw SchemaMismatch(path + ": expected header 'timestamp,value,label'");

  LabeledSeries out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string ts, val, lab;
    if (!std::getline(row, ts, ',') || !std::getline(row, val, ',') || !std::getline(row, lab))
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected 3 fields");
    try {
      out.series.timestamps.push_back(std::stoll(ts));
      out.series.values.push_back(std::stod(val));
      int l = std::stoi(lab);
      if (l != 0 && l != 1) throw std::invalid_argument("label");
      out.labels.push_back(static_cast<std::uint8_t>(l));
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad field in '" + line + "'");
    }
  }
  out.series.validate();
  return out;
}

BenchmarkReport benchmark_run(const std::string& dataset_dir, const EnsembleConfig& ensemble,
                              int buffer_L) {
  if (!fs::is_directory(dataset_dir)) throw UnreadableFile(dataset_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dataset_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  const std::string dataset = fs::path(dataset_dir).filename().string();
  const std::string detector_id = detector_id_of(ensemble);

  BenchmarkReport report;
  report.rows.resize(files.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(files.size()); ++i) {
    BenchmarkRow& row = report.rows[i];
    row.dataset = dataset;
    row.series_id = files[i].stem().string();
    row.detector_id = detector_id;
    auto t0 = std::chrono::steady_clock::now();
    try {
      LabeledSeries data = load_labeled_csv(files[i].string());

      // Ensemble score = fraction of members voting anomaly; single-member
      // ensembles use the raw detector score so AUC keeps full resolution.
      std::vector<double> scores;
      VerdictSeries verdicts;
      if (ensemble.members.size() == 1) {
        ScoreSeries ss = score_series(ensemble.members[0], data.series);
        verdicts = apply_threshold(ss, effective_tau(ensemble.members[0]));
        scores = std::move(ss.scores);
      } else {
        std::vector<VerdictSeries> member_verdicts;
        for (const auto& m : ensemble.members) member_verdicts.push_back(detect(m, data.series));
        verdicts = majority_vote(member_verdicts, ensemble.quorum);
        scores.assign(data.series.size(), 0.0);
        for (const auto& mv : member_verdicts)
          for (std::size_t k = 0; k < scores.size(); ++k) scores[k] += mv.verdicts[k];
        for (double& s : scores) s /= static_cast<double>(ensemble.members.size());
      }

      auto [p, r, f1] = precision_recall_f1(confusion(verdicts, data.labels));
      row.precision = p;
      row.recall = r;
      row.f1 = f1;
      try {
        row.auc = roc_auc(scores, data.labels);
        row.vus_roc = vus_roc(scores, data.labels, buffer_L);
        row.vus_pr = vus_pr(scores, data.labels, buffer_L);
      } catch (const DegenerateLabels&) {
        row.auc = row.vus_roc = row.vus_pr = kNaN;
        row.status = "degenerate";
      }
    } catch (const Error& e) {
      row.auc = row.f1 = row.precision = row.recall = row.vus_roc = row.vus_pr = kNaN;
      row.status = std::string("error:") + e.what();
    }
    row.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return report;
}

BenchmarkReport benchmark_run(const std::string& dataset_dir, const DetectorConfig& detector,
                              int buffer_L) {
  EnsembleConfig e;
  e.members = {detector};
  e.quorum = 1;
  return benchmark_run(dataset_dir, e, buffer_L);
}

std::string BenchmarkReport::to_csv(bool include_runtime) const {
  std::ostringstream out;
  out.precision(9);
  out << "dataset,series_id,detector_id,auc,f1,precision,recall,vus_roc,vus_pr";
  if (include_runtime) out << ",runtime_ms";
  out << ",status\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.series_id << ',' << r.detector_id;
    put(out, r.auc);
    put(out, r.f1);
    put(out, r.precision);
    put(out, r.recall);
    put(out, r.vus_roc);
    put(out, r.vus_pr);
    if (include_runtime) out << ',' << r.runtime_ms;
    out << ',' << r.status << '\n';
  }
  return out.str();
}

std::string BenchmarkReport::summary() const {
  struct Agg {
    double auc = 0, f1 = 0, precision = 0, recall = 0, vr = 0, vp = 0;
    long n = 0, skipped = 0;
  };
  std::map<std::string, Agg> by_dataset;
  for (const auto& r : rows) {
    Agg& a = by_dataset[r.dataset];
    if (r.status != "ok" || std::isnan(r.auc)) {
      ++a.skipped;
      continue;
    }
    a.auc += r.auc;
    a.f1 += r.f1;
    a.precision += r.precision;
    a.recall += r.recall;
    a.vr += r.vus_roc;
    a.vp += r.vus_pr;
    ++a.n;
  }
  std::ostringstream out;
  out.precision(6);
  for (const auto& [name, a] : by_dataset) {
    out << "dataset=" << name << " series=" << a.n << " skipped=" << a.skipped;
    if (a.n > 0) {
      double n = static_cast<double>(a.n);
      out << " mean_auc=" << a.auc / n << " mean_f1=" << a.f1 / n
          << " mean_precision=" << a.precision / n << " mean_recall=" << a.recall / n
          << " mean_vus_roc=" << a.vr / n << " mean_vus_pr=" << a.vp / n;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace radf
