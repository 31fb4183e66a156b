#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "radf/time_series.hpp"

namespace radf {

struct DetectorConfig {
  std::string name;
  std::map<std::string, double> params;
  /// NaN means "use the detector's registry default".
  double tau = std::numeric_limits<double>::quiet_NaN();
  /// Leading fraction of the series used for fitting.
  double train_fraction = 0.3;
};

struct EnsembleConfig {
  std::vector<DetectorConfig> members;
  int quorum = 1;
};

/// Mutable per-stream scorer; one value in, one score out. Created fresh from
/// an immutable DetectorState, so concurrent streams never share state.
class StreamScorer {
public:
  virtual ~StreamScorer() = default;
  virtual double push(std::int64_t timestamp, double value) = 0;
};

/// Immutable fitted detector parameters. Scoring never mutates state.
class DetectorState {
public:
  virtual ~DetectorState() = default;
  virtual std::vector<double> score_values(const TimeSeries& s) const = 0;
  /// Null for batch-only detectors (those that rescan the whole series).
  virtual std::unique_ptr<StreamScorer> make_stream_scorer() const { return nullptr; }
};

class MultiDetectorState {
public:
  virtual ~MultiDetectorState() = default;
  virtual std::vector<double> score_rows(const Eigen::MatrixXd& X) const = 0;
};

struct DetectorInfo {
  std::string name;
  bool multivariate = false;
  /// Streaming replay of a batch file reproduces the batch scores exactly.
  bool replay_equivalent = false;
  std::size_t min_train = 8;
  double default_tau = 3.0;
  std::function<std::unique_ptr<DetectorState>(const DetectorConfig&, const TimeSeries&)> fit;
  std::function<std::unique_ptr<MultiDetectorState>(const DetectorConfig&, const Eigen::MatrixXd&)>
      fit_multi;
};

/// Roster in registry order (used for tie-breaking in model selection).
const std::vector<DetectorInfo>& detector_registry();
const DetectorInfo& detector_info(const std::string& name);
double effective_tau(const DetectorConfig& cfg);

std::unique_ptr<DetectorState> fit(const DetectorConfig& cfg, const TimeSeries& train);
std::unique_ptr<MultiDetectorState> fit_multivariate(const DetectorConfig& cfg,
                                                     const Eigen::MatrixXd& train);

ScoreSeries score(const DetectorState& state, const TimeSeries& s);

/// Verdict 1 iff score strictly greater than tau.
VerdictSeries apply_threshold(const ScoreSeries& scores, double tau);

/// Fit on the leading train_fraction prefix, score the full series.
ScoreSeries score_series(const DetectorConfig& cfg, const TimeSeries& s);
VerdictSeries detect(const DetectorConfig& cfg, const TimeSeries& s);

/// Verdict 1 iff at least `quorum` members vote 1 at that timestamp.
VerdictSeries majority_vote(const std::vector<VerdictSeries>& members, int quorum);
VerdictSeries detect_ensemble(const EnsembleConfig& cfg, const TimeSeries& s);

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback);

}  // namespace radf
