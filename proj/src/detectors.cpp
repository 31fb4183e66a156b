#include "radf/detectors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <mutex>
#include <numeric>
#include <random>

#include "radf/decompose.hpp"
#include "radf/stats.hpp"

namespace radf {

namespace {

constexpr double kSigmaFloorScale = 1e-12;

double sigma_floor(double mean) { return kSigmaFloorScale * std::max(1.0, std::abs(mean)); }

struct MeanStd {
  double mean = 0.0, sd = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  const double n = static_cast<double>(v.size());
  for (double x : v) r.mean += x;
  r.mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(var / n);
  r.sd = std::max(r.sd, sigma_floor(r.mean));
  return r;
}

double quantile(std::vector<double> sorted, double q) {
  const std::size_t n = sorted.size();
  double pos = q * static_cast<double>(n - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

std::vector<double> sorted_copy(const std::vector<double>& v) {
  std::vector<double> out = v;
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- zscore

class ZScoreState : public DetectorState {
public:
  ZScoreState(double mean, double sd) : mean_(mean), sd_(sd) {}

  std::vector<double> score_values(const TimeSeries& s) const override {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = std::abs(s.values[i] - mean_) / sd_;
    return out;
  }

  std::unique_ptr<StreamScorer> make_stream_scorer() const override {
    class Scorer : public StreamScorer {
    public:
      Scorer(double m, double sd) : m_(m), sd_(sd) {}
      double push(std::int64_t, double v) override { return std::abs(v - m_) / sd_; }

    private:
      double m_, sd_;
    };
    return std::make_unique<Scorer>(mean_, sd_);
  }

private:
  double mean_, sd_;
};

// ------------------------------------------------------------ mad_zscore

class MadZScoreState : public DetectorState {
public:
  MadZScoreState(double median, double mad) : median_(median), mad_(mad) {}

  std::vector<double> score_values(const TimeSeries& s) const override {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      out[i] = 0.6745 * std::abs(s.values[i] - median_) / mad_;
    return out;
  }

  std::unique_ptr<StreamScorer> make_stream_scorer() const override {
    class Scorer : public StreamScorer {
    public:
      Scorer(double med, double mad) : med_(med), mad_(mad) {}
      double push(std::int64_t, double v) override {
        return 0.6745 * std::abs(v - med_) / mad_;
      }

    private:
      double med_, mad_;
    };
    return std::make_unique<Scorer>(median_, mad_);
  }

private:
  double median_, mad_;
};

// ------------------------------------------------------------------- iqr

class IqrState : public DetectorState {
public:
  IqrState(double q1, double q3, double iqr) : q1_(q1), q3_(q3), iqr_(iqr) {}

  double point_score(double v) const {
    double over = std::max({v - (q3_ + 1.5 * iqr_), (q1_ - 1.5 * iqr_) - v, 0.0});
    return over / iqr_;  // normalized so verdicts are scale-free
  }

  std::vector<double> score_values(const TimeSeries& s) const override {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = point_score(s.values[i]);
    return out;
  }

  std::unique_ptr<StreamScorer> make_stream_scorer() const override {
    class Scorer : public StreamScorer {
    public:
      explicit Scorer(const IqrState& st) : st_(st) {}
      double push(std::int64_t, double v) override { return st_.point_score(v); }

    private:
      IqrState st_;
    };
    return std::make_unique<Scorer>(*this);
  }

private:
  double q1_, q3_, iqr_;
};

// ------------------------------------------------------------ grubbs_esd

/// Generalized ESD scores over a value vector: the point removed at step i
// scores R_i / lambda_i; points never removed score their final deviation
// ratio against the last critical value. A score above 1 marks an outlier.
std::vector<double> esd_scores(const std::vector<double>& v, int max_outliers, double alpha) {
  const int n = static_cast<int>(v.size());
  std::vector<double> scores(n, 0.0);
  if (n < 4) return scores;
  max_outliers = std::clamp(max_outliers, 1, n - 3);

  std::vector<char> removed(n, 0);
  double lambda_last = 1.0;
  int steps = 0;
  for (int i = 1; i <= max_outliers; ++i) {
    int ni = n - i + 1;
    double mean = 0.0;
    for (int j = 0; j < n; ++j)
      if (!removed[j]) mean += v[j];
    mean /= ni;
    double var = 0.0;
    for (int j = 0; j < n; ++j)
      if (!removed[j]) var += (v[j] - mean) * (v[j] - mean);
    double sd = std::max(std::sqrt(var / ni), sigma_floor(mean));

    int arg = -1;
    double r = -1.0;
    for (int j = 0; j < n; ++j) {
      if (removed[j]) continue;
      double d = std::abs(v[j] - mean) / sd;
      if (d > r) {
        r = d;
        arg = j;
      }
    }
    double p = alpha / (2.0 * ni);
    double nu = ni - 2;
    double t = stats::student_t_upper_quantile(p, nu);
    double lambda = (ni - 1) * t / std::sqrt((nu + t * t) * ni);
    scores[arg] = r / lambda;
    removed[arg] = 1;
    lambda_last = lambda;
    steps = i;
  }
  // Remaining points: deviation from the cleaned sample, same scale.
  int nf = n - steps;
  double mean = 0.0;
  for (int j = 0; j < n; ++j)
    if (!removed[j]) mean += v[j];
  mean /= nf;
  double var = 0.0;
  for (int j = 0; j < n; ++j)
    if (!removed[j]) var += (v[j] - mean) * (v[j] - mean);
  double sd = std::max(std::sqrt(var / nf), sigma_floor(mean));
  for (int j = 0; j < n; ++j)
    if (!removed[j]) scores[j] = (std::abs(v[j] - mean) / sd) / lambda_last;
  return scores;
}

class GrubbsEsdState : public DetectorState {
public:
  GrubbsEsdState(double frac, double alpha) : frac_(frac), alpha_(alpha) {}

  std::vector<double> score_values(const TimeSeries& s) const override {
    int k = std::max(1, static_cast<int>(frac_ * static_cast<double>(s.size())));
    return esd_scores(s.values, k, alpha_);
  }

private:
  double frac_, alpha_;
};

// ---------------------------------------------------------- seasonal_esd

class SeasonalEsdState : public DetectorState {
public:
  SeasonalEsdState(int period, double frac, double alpha)
      : period_(period), frac_(frac), alpha_(alpha) {}

  std::vector<double> score_values(const TimeSeries& s) const override {
    if (s.size() < 2 * static_cast<std::size_t>(period_)) throw SeriesTooShort();
    Decomposition d = stl_decompose(s, period_, 2, true);
    int k = std::max(1, static_cast<int>(frac_ * static_cast<double>(s.size())));
    return esd_scores(d.residual.values, k, alpha_);
  }

private:
  int period_;
  double frac_, alpha_;
};

// ---------------------------------------------------------- ewma_control

class EwmaState : public DetectorState {
public:
  EwmaState(double mean, double sd, double lam) : mean_(mean), sd_(sd), lam_(lam) {}

  std::unique_ptr<StreamScorer> make_stream_scorer() const override {
    class Scorer : public StreamScorer {
    public:
      Scorer(double mean, double sd, double lam) : mean_(mean), sd_(sd), lam_(lam), z_(mean) {}
      double push(std::int64_t, double v) override {
        ++t_;
        z_ = lam_ * v + (1.0 - lam_) * z_;
        double var_scale = lam_ / (2.0 - lam_) *
                           (1.0 - std::pow(1.0 - lam_, 2.0 * static_cast<double>(t_)));
        double sz = std::max(sd_ * std::sqrt(var_scale), sigma_floor(mean_));
        return std::abs(z_ - mean_) / sz;
      }

    private:
      double mean_, sd_, lam_, z_;
      long t_ = 0;
    };
    return std::make_unique<Scorer>(mean_, sd_, lam_);
  }

  std::vector<double> score_values(const TimeSeries& s) const override {
    auto scorer = make_stream_scorer();
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = scorer->push(s.timestamps[i], s.values[i]);
    return out;
  }

private:
  double mean_, sd_, lam_;
};

// ------------------------------------------------------------ percentile

class PercentileState : public DetectorState {
public:
  PercentileState(double qlo, double qhi) : qlo_(qlo), qhi_(qhi) {
    span_ = std::max(qhi_ - qlo_, sigma_floor(0.5 * (qlo_ + qhi_)));
  }

  double point_score(double v) const {
    return std::max({v - qhi_, qlo_ - v, 0.0}) / span_;
  }

  std::vector<double> score_values(const TimeSeries& s) const override {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = point_score(s.values[i]);
    return out;
  }

  std::unique_ptr<StreamScorer> make_stream_scorer() const override {
    class Scorer : public StreamScorer {
    public:
      explicit Scorer(const PercentileState& st) : st_(st) {}
      double push(std::int64_t, double v) override { return st_.point_score(v); }

    private:
      PercentileState st_;
    };
    return std::make_unique<Scorer>(*this);
  }

private:
  double qlo_, qhi_, span_;
};

// -------------------------------------------------------- rolling_zscore

class RollingZState : public DetectorState {
public:
  RollingZState(int window, double mean, double sd) : window_(window), mean_(mean), sd_(sd) {}

  std::unique_ptr<StreamScorer> make_stream_scorer() const override {
    class Scorer : public StreamScorer {
    public:
      Scorer(int w, double m, double sd) : w_(w), fit_mean_(m), fit_sd_(sd) {}
      double push(std::int64_t, double v) override {
        double score;
        if (buf_.size() < 2) {
          score = std::abs(v - fit_mean_) / fit_sd_;
        } else {
          double n = static_cast<double>(buf_.size());
          double mean = sum_ / n;
          double var = std::max(0.0, sum2_ / n - mean * mean);
          double sd = std::max(std::sqrt(var), sigma_floor(mean));
          score = std::abs(v - mean) / sd;
        }
        buf_.push_back(v);
        sum_ += v;
        sum2_ += v * v;
        if (static_cast<int>(buf_.size()) > w_) {
          double old = buf_.front();
          buf_.pop_front();
          sum_ -= old;
          sum2_ -= old * old;
        }
        return score;
      }

    private:
      int w_;
      double fit_mean_, fit_sd_;
      std::deque<double> buf_;
      double sum_ = 0.0, sum2_ = 0.0;
    };
    return std::make_unique<Scorer>(window_, mean_, sd_);
  }

  std::vector<double> score_values(const TimeSeries& s) const override {
    auto scorer = make_stream_scorer();
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = scorer->push(s.timestamps[i], s.values[i]);
    return out;
  }

private:
  int window_;
  double mean_, sd_;
};

// -------------------------------------------------------- rate_deviation

class RateDeviationState : public DetectorState {
public:
  RateDeviationState(double dmean, double dsd) : dmean_(dmean), dsd_(dsd) {}

  std::unique_ptr<StreamScorer> make_stream_scorer() const override {
    class Scorer : public StreamScorer {
    public:
      Scorer(double m, double sd) : m_(m), sd_(sd) {}
      double push(std::int64_t, double v) override {
        double score = 0.0;
        if (has_prev_) score = std::abs((v - prev_) - m_) / sd_;
        prev_ = v;
        has_prev_ = true;
        return score;
      }

    private:
      double m_, sd_, prev_ = 0.0;
      bool has_prev_ = false;
    };
    return std::make_unique<Scorer>(dmean_, dsd_);
  }

  std::vector<double> score_values(const TimeSeries& s) const override {
    auto scorer = make_stream_scorer();
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = scorer->push(s.timestamps[i], s.values[i]);
    return out;
  }

private:
  double dmean_, dsd_;
};

// ------------------------------------------------------ histogram_rarity

class HistogramState : public DetectorState {
public:
  HistogramState(double lo, double hi, std::vector<long> counts, long total)
      : lo_(lo), hi_(hi), counts_(std::move(counts)), total_(total) {}

  double point_score(double v) const {
    const int bins = static_cast<int>(counts_.size());
    long c = 0;
    if (v >= lo_ && v <= hi_) {
      int b = hi_ > lo_ ? static_cast<int>((v - lo_) / (hi_ - lo_) * bins) : 0;
      b = std::clamp(b, 0, bins - 1);
      c = counts_[b];
    }
    double p = static_cast<double>(c + 1) / static_cast<double>(total_ + bins);
    return -std::log(p);
  }

  std::vector<double> score_values(const TimeSeries& s) const override {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = point_score(s.values[i]);
    return out;
  }

  std::unique_ptr<StreamScorer> make_stream_scorer() const override {
    class Scorer : public StreamScorer {
    public:
      explicit Scorer(const HistogramState& st) : st_(st) {}
      double push(std::int64_t, double v) override { return st_.point_score(v); }

    private:
      HistogramState st_;
    };
    return std::make_unique<Scorer>(*this);
  }

private:
  double lo_, hi_;
  std::vector<long> counts_;
  long total_;
};

// ------------------------------------------------------ static_threshold

class StaticThresholdState : public DetectorState {
public:
  StaticThresholdState(double lo, double hi) : lo_(lo), hi_(hi) {}

  std::unique_ptr<StreamScorer> make_stream_scorer() const override {
    class Scorer : public StreamScorer {
    public:
      Scorer(double lo, double hi) : lo_(lo), hi_(hi) {}
      double push(std::int64_t, double v) override {
        return std::max({v - hi_, lo_ - v, 0.0});
      }

    private:
      double lo_, hi_;
    };
    return std::make_unique<Scorer>(lo_, hi_);
  }

  std::vector<double> score_values(const TimeSeries& s) const override {
    auto scorer = make_stream_scorer();
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = scorer->push(s.timestamps[i], s.values[i]);
    return out;
  }

private:
  double lo_, hi_;
};

// -------------------------------------------------------- rate_of_change

class RateOfChangeState : public DetectorState {
public:
  explicit RateOfChangeState(double limit) : limit_(limit) {}

  std::unique_ptr<StreamScorer> make_stream_scorer() const override {
    class Scorer : public StreamScorer {
    public:
      explicit Scorer(double limit) : limit_(limit) {}
      double push(std::int64_t ts, double v) override {
        double score = 0.0;
        if (has_prev_) {
          double dt = static_cast<double>(ts - prev_ts_) / 1000.0;
          if (dt > 0.0) score = (std::abs(v - prev_) / dt) / limit_;
        }
        prev_ = v;
        prev_ts_ = ts;
        has_prev_ = true;
        return score;
      }

    private:
      double limit_, prev_ = 0.0;
      std::int64_t prev_ts_ = 0;
      bool has_prev_ = false;
    };
    return std::make_unique<Scorer>(limit_);
  }

  std::vector<double> score_values(const TimeSeries& s) const override {
    auto scorer = make_stream_scorer();
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = scorer->push(s.timestamps[i], s.values[i]);
    return out;
  }

private:
  double limit_;
};

// ----------------------------------------------------- spectral_residual

std::mutex g_fftw_mutex;  // FFTW planner is not thread-safe

void fft(std::vector<std::complex<double>>& data, bool inverse) {
  const int n = static_cast<int>(data.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(data.data()),
                            reinterpret_cast<fftw_complex*>(data.data()),
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    fftw_destroy_plan(plan);
  }
  if (inverse)
    for (auto& c : data) c /= static_cast<double>(n);
}

std::vector<double> clipped_mean_filter(const std::vector<double>& v, int window) {
  const int n = static_cast<int>(v.size());
  const int h = window / 2;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    int lo = std::max(0, i - h), hi = std::min(n - 1, i + h);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += v[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

class SpectralResidualState : public DetectorState {
public:
  SpectralResidualState(int spectrum_window, int saliency_window)
      : qw_(spectrum_window), sw_(saliency_window) {}

  std::vector<double> score_values(const TimeSeries& s) const override {
    const std::size_t n = s.size();
    MeanStd ms = mean_std(s.values);
    double raw_sd = 0.0;
    for (double v : s.values) raw_sd += (v - ms.mean) * (v - ms.mean);
    raw_sd = std::sqrt(raw_sd / static_cast<double>(n));
    if (raw_sd < sigma_floor(ms.mean)) return std::vector<double>(n, 0.0);

    std::vector<std::complex<double>> spec(n);
    for (std::size_t i = 0; i < n; ++i) spec[i] = s.values[i];
    fft(spec, false);

    std::vector<double> logamp(n);
    for (std::size_t i = 0; i < n; ++i)
      logamp[i] = std::log(std::abs(spec[i]) + 1e-12);
    std::vector<double> avg = clipped_mean_filter(logamp, qw_);
    for (std::size_t i = 0; i < n; ++i) {
      double mag = std::exp(logamp[i] - avg[i]);
      double amp = std::abs(spec[i]);
      spec[i] = amp > 1e-12 ? spec[i] / amp * mag : std::complex<double>(mag, 0.0);
    }
    fft(spec, true);

    std::vector<double> saliency(n);
    for (std::size_t i = 0; i < n; ++i) saliency[i] = std::abs(spec[i]);
    std::vector<double> local = clipped_mean_filter(saliency, sw_);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = std::max(0.0, (saliency[i] - local[i]) / (local[i] + 1e-12));
    return out;
  }

private:
  int qw_, sw_;
};

// ------------------------------------------------------ window embedding

std::vector<std::vector<double>> window_embed(const std::vector<double>& v, int w) {
  std::vector<std::vector<double>> rows;
  if (static_cast<int>(v.size()) < w) return rows;
  for (std::size_t i = w - 1; i < v.size(); ++i)
    rows.emplace_back(v.begin() + (i - w + 1), v.begin() + i + 1);
  return rows;
}

// ------------------------------------------------------ iforest_windowed

struct IfNode {
  int feature = -1;
  double split = 0.0;
  int left = -1, right = -1;
  int size = 0;  // leaf population
};

double avg_path_c(double n) {
  if (n <= 1.0) return 0.0;
  if (n == 2.0) return 1.0;
  const double euler = 0.5772156649015329;
  return 2.0 * (std::log(n - 1.0) + euler) - 2.0 * (n - 1.0) / n;
}

class IForestState : public DetectorState {
public:
  IForestState(int window, int trees, int subsample, std::uint64_t seed,
               const std::vector<std::vector<double>>& data)
      : window_(window) {
    std::mt19937_64 rng(seed);
    const int n = static_cast<int>(data.size());
    psi_ = std::min(subsample, n);
    int max_depth = static_cast<int>(std::ceil(std::log2(std::max(2, psi_))));
    forest_.resize(trees);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int t = 0; t < trees; ++t) {
      std::vector<int> sample = idx;
      for (int i = 0; i < psi_; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(sample[i], sample[pick(rng)]);
      }
      sample.resize(psi_);
      build(forest_[t], data, sample, 0, max_depth, rng);
    }
  }

  double embed_score(const std::vector<double>& x) const {
    double total = 0.0;
    for (const auto& tree : forest_) total += path_length(tree, x);
    double e = total / static_cast<double>(forest_.size());
    return std::pow(2.0, -e / avg_path_c(static_cast<double>(psi_)));
  }

  std::vector<double> score_values(const TimeSeries& s) const override {
    auto rows = window_embed(s.values, window_);
    if (rows.empty()) throw ShapeMismatch("series shorter than embedding window");
    std::vector<double> out(s.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      out[r + window_ - 1] = embed_score(rows[r]);
    for (int i = 0; i < window_ - 1; ++i) out[i] = out[window_ - 1];
    return out;
  }

private:
  using Tree = std::vector<IfNode>;

  static int build(Tree& tree, const std::vector<std::vector<double>>& data,
                   std::vector<int> idx, int depth, int max_depth, std::mt19937_64& rng) {
    int node = static_cast<int>(tree.size());
    tree.push_back({});
    if (depth >= max_depth || idx.size() <= 1) {
      tree[node].size = static_cast<int>(idx.size());
      return node;
    }
    const int dims = static_cast<int>(data[idx[0]].size());
    std::uniform_int_distribution<int> fpick(0, dims - 1);
    int feature = fpick(rng);
    double lo = data[idx[0]][feature], hi = lo;
    for (int i : idx) {
      lo = std::min(lo, data[i][feature]);
      hi = std::max(hi, data[i][feature]);
    }
    if (hi <= lo) {
      tree[node].size = static_cast<int>(idx.size());
      return node;
    }
    std::uniform_real_distribution<double> spick(lo, hi);
    double split = spick(rng);
    std::vector<int> left, right;
    for (int i : idx) (data[i][feature] < split ? left : right).push_back(i);
    tree[node].feature = feature;
    tree[node].split = split;
    int l = build(tree, data, std::move(left), depth + 1, max_depth, rng);
    int r = build(tree, data, std::move(right), depth + 1, max_depth, rng);
    tree[node].left = l;
    tree[node].right = r;
    return node;
  }

  static double path_length(const Tree& tree, const std::vector<double>& x) {
    int node = 0;
    double depth = 0.0;
    while (tree[node].feature >= 0) {
      node = x[tree[node].feature] < tree[node].split ? tree[node].left : tree[node].right;
      depth += 1.0;
    }
    return depth + avg_path_c(static_cast<double>(tree[node].size));
  }

  int window_, psi_;
  std::vector<Tree> forest_;
};

// ---------------------------------------------------------- lof_windowed

class LofState : public DetectorState {
public:
  LofState(int window, int k, std::vector<std::vector<double>> train)
      : window_(window), k_(k), train_(std::move(train)) {
    const int n = static_cast<int>(train_.size());
    k_ = std::min(k_, n - 1);
    kdist_.resize(n);
    lrd_.resize(n);
    knn_.resize(n);
    for (int i = 0; i < n; ++i) {
      auto nn = nearest(train_[i], i);
      knn_[i] = nn;
      kdist_[i] = nn.back().first;
    }
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (auto& [d, j] : knn_[i]) sum += std::max(d, kdist_[j]);
      lrd_[i] = static_cast<double>(k_) / std::max(sum, 1e-300);
    }
  }

  double embed_score(const std::vector<double>& x) const {
    auto nn = nearest(x, -1);
    double reach_sum = 0.0, lrd_sum = 0.0;
    for (auto& [d, j] : nn) {
      reach_sum += std::max(d, kdist_[j]);
      lrd_sum += lrd_[j];
    }
    double lrd_q = static_cast<double>(k_) / std::max(reach_sum, 1e-300);
    return (lrd_sum / static_cast<double>(k_)) / std::max(lrd_q, 1e-300);
  }

  std::vector<double> score_values(const TimeSeries& s) const override {
    auto rows = window_embed(s.values, window_);
    if (rows.empty()) throw ShapeMismatch("series shorter than embedding window");
    std::vector<double> out(s.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      out[r + window_ - 1] = embed_score(rows[r]);
    for (int i = 0; i < window_ - 1; ++i) out[i] = out[window_ - 1];
    return out;
  }

private:
  std::vector<std::pair<double, int>> nearest(const std::vector<double>& x, int skip) const {
    std::vector<std::pair<double, int>> dist;
    dist.reserve(train_.size());
    for (int j = 0; j < static_cast<int>(train_.size()); ++j) {
      if (j == skip) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < x.size(); ++c) {
        double d = x[c] - train_[j][c];
        d2 += d * d;
      }
      dist.emplace_back(std::sqrt(d2), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());
    dist.resize(k_);
    return dist;
  }

  int window_, k_;
  std::vector<std::vector<double>> train_;
  std::vector<double> kdist_, lrd_;
  std::vector<std::vector<std::pair<double, int>>> knn_;
};

// ----------------------------------------------------- multivariate pair

class MahalanobisState : public MultiDetectorState {
public:
  MahalanobisState(Eigen::VectorXd mean, Eigen::MatrixXd precision)
      : mean_(std::move(mean)), precision_(std::move(precision)) {}

  std::vector<double> score_rows(const Eigen::MatrixXd& X) const override {
    if (X.cols() != mean_.size()) throw ShapeMismatch();
    std::vector<double> out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      Eigen::VectorXd d = X.row(i).transpose() - mean_;
      out[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, d.dot(precision_ * d)));
    }
    return out;
  }

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
};

class PcaReconState : public MultiDetectorState {
public:
  PcaReconState(Eigen::VectorXd mean, Eigen::MatrixXd components)
      : mean_(std::move(mean)), components_(std::move(components)) {}

  std::vector<double> score_rows(const Eigen::MatrixXd& X) const override {
    if (X.cols() != mean_.size()) throw ShapeMismatch();
    std::vector<double> out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      Eigen::VectorXd d = X.row(i).transpose() - mean_;
      Eigen::VectorXd recon = components_ * (components_.transpose() * d);
      out[static_cast<std::size_t>(i)] = (d - recon).norm();
    }
    return out;
  }

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd components_;  // columns are principal directions
};

std::vector<double> series_values_checked(const TimeSeries& s, std::size_t min_n) {
  if (s.size() < min_n) throw SeriesTooShort();
  return s.values;
}

}  // namespace

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

const std::vector<DetectorInfo>& detector_registry() {
  static const std::vector<DetectorInfo> registry = [] {
    std::vector<DetectorInfo> r;

    auto add = [&r](DetectorInfo info) { r.push_back(std::move(info)); };

    add({.name = "zscore",
         .replay_equivalent = true,
         .min_train = 8,
         .default_tau = 3.0,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           auto ms = mean_std(series_values_checked(train, 8));
           (void)cfg;
           return std::make_unique<ZScoreState>(ms.mean, ms.sd);
         }});

    add({.name = "mad_zscore",
         .replay_equivalent = true,
         .min_train = 8,
         .default_tau = 3.5,
         .fit = [](const DetectorConfig&, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           auto v = sorted_copy(series_values_checked(train, 8));
           double med = quantile(v, 0.5);
           std::vector<double> dev(v.size());
           for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
           std::sort(dev.begin(), dev.end());
           double mad = std::max(quantile(dev, 0.5), sigma_floor(med));
           return std::make_unique<MadZScoreState>(med, mad);
         }});

    add({.name = "iqr",
         .replay_equivalent = true,
         .min_train = 8,
         .default_tau = 0.0,
         .fit = [](const DetectorConfig&, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           auto v = sorted_copy(series_values_checked(train, 8));
           double q1 = quantile(v, 0.25), q3 = quantile(v, 0.75);
           double iqr = std::max(q3 - q1, sigma_floor(0.5 * (q1 + q3)));
           return std::make_unique<IqrState>(q1, q3, iqr);
         }});

    add({.name = "grubbs_esd",
         .min_train = 8,
         .default_tau = 1.0,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           series_values_checked(train, 8);
           double frac = get_param(cfg.params, "max_outlier_fraction", 0.05);
           double alpha = get_param(cfg.params, "alpha", 0.05);
           if (frac <= 0.0 || frac > 0.5) throw InvalidParams("max_outlier_fraction in (0,0.5]");
           return std::make_unique<GrubbsEsdState>(frac, alpha);
         }});

    add({.name = "seasonal_esd",
         .min_train = 8,
         .default_tau = 1.0,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           series_values_checked(train, 8);
           int period = static_cast<int>(get_param(cfg.params, "period", 12));
           if (period < 2) throw InvalidParams("period must be >= 2");
           double frac = get_param(cfg.params, "max_outlier_fraction", 0.05);
           double alpha = get_param(cfg.params, "alpha", 0.05);
           return std::make_unique<SeasonalEsdState>(period, frac, alpha);
         }});

    add({.name = "ewma_control",
         .replay_equivalent = true,
         .min_train = 8,
         .default_tau = 3.0,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           auto ms = mean_std(series_values_checked(train, 8));
           double lam = get_param(cfg.params, "lambda", 0.2);
           if (lam <= 0.0 || lam > 1.0) throw InvalidParams("lambda in (0,1]");
           return std::make_unique<EwmaState>(ms.mean, ms.sd, lam);
         }});

    add({.name = "percentile",
         .replay_equivalent = true,
         .min_train = 8,
         .default_tau = 0.0,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           auto v = sorted_copy(series_values_checked(train, 8));
           double lo = get_param(cfg.params, "lower", 0.01);
           double hi = get_param(cfg.params, "upper", 0.99);
           if (!(lo < hi) || lo < 0.0 || hi > 1.0) throw InvalidParams("need 0 <= lower < upper <= 1");
           return std::make_unique<PercentileState>(quantile(v, lo), quantile(v, hi));
         }});

    add({.name = "rolling_zscore",
         .replay_equivalent = true,
         .min_train = 8,
         .default_tau = 3.0,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           auto ms = mean_std(series_values_checked(train, 8));
           int w = static_cast<int>(get_param(cfg.params, "window", 30));
           if (w < 2) throw InvalidParams("window must be >= 2");
           return std::make_unique<RollingZState>(w, ms.mean, ms.sd);
         }});

    add({.name = "rate_deviation",
         .replay_equivalent = true,
         .min_train = 9,
         .default_tau = 3.0,
         .fit = [](const DetectorConfig&, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           auto v = series_values_checked(train, 9);
           std::vector<double> diffs(v.size() - 1);
           for (std::size_t i = 1; i < v.size(); ++i) diffs[i - 1] = v[i] - v[i - 1];
           auto ms = mean_std(diffs);
           return std::make_unique<RateDeviationState>(ms.mean, ms.sd);
         }});

    add({.name = "histogram_rarity",
         .replay_equivalent = true,
         .min_train = 8,
         .default_tau = 5.0,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           auto v = series_values_checked(train, 8);
           int bins = static_cast<int>(get_param(cfg.params, "bins", 20));
           if (bins < 2) throw InvalidParams("bins must be >= 2");
           double lo = *std::min_element(v.begin(), v.end());
           double hi = *std::max_element(v.begin(), v.end());
           if (hi <= lo) hi = lo + 1.0;
           std::vector<long> counts(bins, 0);
           for (double x : v) {
             int b = std::clamp(static_cast<int>((x - lo) / (hi - lo) * bins), 0, bins - 1);
             counts[b]++;
           }
           return std::make_unique<HistogramState>(lo, hi, std::move(counts),
                                                   static_cast<long>(v.size()));
         }});

    add({.name = "mahalanobis",
         .multivariate = true,
         .min_train = 8,
         .default_tau = 3.0,
         .fit_multi = [](const DetectorConfig& cfg, const Eigen::MatrixXd& X)
             -> std::unique_ptr<MultiDetectorState> {
           if (X.rows() < 8) throw SeriesTooShort();
           Eigen::VectorXd mean = X.colwise().mean();
           Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
           Eigen::MatrixXd cov =
               centered.transpose() * centered / static_cast<double>(X.rows());
           double ridge = get_param(cfg.params, "ridge",
                                    1e-6 * std::max(1.0, cov.trace() / cov.rows()));
           cov += ridge * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
           return std::make_unique<MahalanobisState>(std::move(mean), cov.inverse());
         }});

    add({.name = "iforest_windowed",
         .min_train = 24,
         .default_tau = 0.6,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           int w = static_cast<int>(get_param(cfg.params, "window", 16));
           int trees = static_cast<int>(get_param(cfg.params, "trees", 100));
           int sub = static_cast<int>(get_param(cfg.params, "subsample", 256));
           auto seed = static_cast<std::uint64_t>(get_param(cfg.params, "seed", 0));
           if (w < 2 || trees < 1 || sub < 2) throw InvalidParams("bad iforest params");
           auto rows = window_embed(series_values_checked(train, w + 8), w);
           if (rows.size() < 8) throw SeriesTooShort();
           return std::make_unique<IForestState>(w, trees, sub, seed, rows);
         }});

    add({.name = "lof_windowed",
         .min_train = 40,
         .default_tau = 1.5,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           int w = static_cast<int>(get_param(cfg.params, "window", 16));
           int k = static_cast<int>(get_param(cfg.params, "neighbors", 20));
           if (w < 2 || k < 1) throw InvalidParams("bad lof params");
           auto rows = window_embed(series_values_checked(train, w + 4), w);
           if (static_cast<int>(rows.size()) < k + 2) throw SeriesTooShort();
           return std::make_unique<LofState>(w, k, std::move(rows));
         }});

    add({.name = "pca_reconstruction",
         .multivariate = true,
         .min_train = 8,
         .default_tau = 3.0,
         .fit_multi = [](const DetectorConfig& cfg, const Eigen::MatrixXd& X)
             -> std::unique_ptr<MultiDetectorState> {
           if (X.rows() < 8) throw SeriesTooShort();
           int k = static_cast<int>(get_param(cfg.params, "components", 10));
           k = std::min<int>(k, static_cast<int>(X.cols()));
           if (k < 1) throw InvalidParams("components must be >= 1");
           Eigen::VectorXd mean = X.colwise().mean();
           Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
           Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
           Eigen::MatrixXd comps = svd.matrixV().leftCols(k);
           return std::make_unique<PcaReconState>(std::move(mean), std::move(comps));
         }});

    add({.name = "spectral_residual",
         .min_train = 8,
         .default_tau = 3.0,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           series_values_checked(train, 8);
           int qw = static_cast<int>(get_param(cfg.params, "spectrum_window", 3));
           int sw = static_cast<int>(get_param(cfg.params, "saliency_window", 21));
           if (qw < 1 || sw < 1) throw InvalidParams("bad spectral_residual params");
           return std::make_unique<SpectralResidualState>(qw, sw);
         }});

    add({.name = "static_threshold",
         .replay_equivalent = true,
         .min_train = 2,
         .default_tau = 0.0,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           series_values_checked(train, 2);
           double lo = get_param(cfg.params, "lo", -std::numeric_limits<double>::infinity());
           double hi = get_param(cfg.params, "hi", std::numeric_limits<double>::infinity());
           if (!(lo < hi)) throw InvalidParams("need lo < hi");
           return std::make_unique<StaticThresholdState>(lo, hi);
         }});

    add({.name = "rate_of_change",
         .replay_equivalent = true,
         .min_train = 2,
         .default_tau = 1.0,
         .fit = [](const DetectorConfig& cfg, const TimeSeries& train) -> std::unique_ptr<DetectorState> {
           series_values_checked(train, 2);
           double limit = get_param(cfg.params, "limit", 1.0);
           if (!(limit > 0.0)) throw InvalidParams("limit must be > 0");
           return std::make_unique<RateOfChangeState>(limit);
         }});

    return r;
  }();
  return registry;
}

const DetectorInfo& detector_info(const std::string& name) {
  for (const auto& info : detector_registry())
    if (info.name == name) return info;
  throw UnknownDetector("unknown detector: " + name);
}

double effective_tau(const DetectorConfig& cfg) {
  if (std::isnan(cfg.tau)) return detector_info(cfg.name).default_tau;
  if (!std::isfinite(cfg.tau) && cfg.tau > 0) throw InvalidParams("tau must not be +inf NaN");
  return cfg.tau;
}

std::unique_ptr<DetectorState> fit(const DetectorConfig& cfg, const TimeSeries& train) {
  const DetectorInfo& info = detector_info(cfg.name);
  if (!info.fit) throw InvalidParams(cfg.name + " is multivariate; use fit_multivariate");
  if (train.size() < info.min_train) throw SeriesTooShort();
  return info.fit(cfg, train);
}

std::unique_ptr<MultiDetectorState> fit_multivariate(const DetectorConfig& cfg,
                                                     const Eigen::MatrixXd& train) {
  const DetectorInfo& info = detector_info(cfg.name);
  if (!info.fit_multi) throw InvalidParams(cfg.name + " is univariate");
  return info.fit_multi(cfg, train);
}

ScoreSeries score(const DetectorState& state, const TimeSeries& s) {
  ScoreSeries out;
  out.timestamps = s.timestamps;
  out.scores = state.score_values(s);
  for (double v : out.scores)
    if (!std::isfinite(v)) throw ShapeMismatch("non-finite score");
  return out;
}

VerdictSeries apply_threshold(const ScoreSeries& scores, double tau) {
  VerdictSeries out;
  out.key = scores.key;
  out.timestamps = scores.timestamps;
  out.train_end = scores.train_end;
  out.verdicts.resize(scores.scores.size());
  for (std::size_t i = 0; i < scores.scores.size(); ++i)
    out.verdicts[i] = scores.scores[i] > tau ? 1 : 0;
  return out;
}

ScoreSeries score_series(const DetectorConfig& cfg, const TimeSeries& s) {
  const DetectorInfo& info = detector_info(cfg.name);
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0))
    throw InvalidParams("train_fraction must be in (0,1]");
  std::size_t train_len = static_cast<std::size_t>(
      std::ceil(cfg.train_fraction * static_cast<double>(s.size())));
  train_len = std::clamp(train_len, info.min_train, s.size());
  if (s.size() < info.min_train) throw SeriesTooShort();
  auto state = fit(cfg, slice_window(s, 0, train_len));
  ScoreSeries out = score(*state, s);
  out.train_end = train_len;
  return out;
}

VerdictSeries detect(const DetectorConfig& cfg, const TimeSeries& s) {
  VerdictSeries v = apply_threshold(score_series(cfg, s), effective_tau(cfg));
  v.source = cfg.name;
  return v;
}

VerdictSeries majority_vote(const std::vector<VerdictSeries>& members, int quorum) {
  if (members.empty()) throw InvalidParams("majority_vote requires members");
  if (quorum < 1 || quorum > static_cast<int>(members.size()))
    throw InvalidParams("quorum must be in [1, member count]");
  for (const auto& m : members)
    if (m.timestamps != members[0].timestamps) throw MisalignedInputs();
  VerdictSeries out;
  out.key = members[0].key;
  out.timestamps = members[0].timestamps;
  out.train_end = members[0].train_end;
  out.source = "majority_vote";
  out.verdicts.resize(out.timestamps.size());
  for (std::size_t i = 0; i < out.verdicts.size(); ++i) {
    int votes = 0;
    for (const auto& m : members) votes += m.verdicts[i];
    out.verdicts[i] = votes >= quorum ? 1 : 0;
  }
  return out;
}

VerdictSeries detect_ensemble(const EnsembleConfig& cfg, const TimeSeries& s) {
  std::vector<VerdictSeries> votes;
  votes.reserve(cfg.members.size());
  std::size_t max_train_end = 0;
  for (const auto& member : cfg.members) {
    votes.push_back(detect(member, s));
    max_train_end = std::max(max_train_end, votes.back().train_end);
  }
  VerdictSeries out = majority_vote(votes, cfg.quorum);
  out.train_end = max_train_end;
  return out;
}

}  // namespace radf
