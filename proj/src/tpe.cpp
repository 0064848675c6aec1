#include "pipescore/tpe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "pipescore/csvio.hpp"
#include "pipescore/errors.hpp"
#include "pipescore/parallel.hpp"
#include "pipescore/sum.hpp"

namespace pipescore {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void validate_settings(const TpeSettings& s) {
  if (!(s.gamma > 0.0 && s.gamma < 1.0)) throw ValidationError("tpe: gamma must be in (0, 1)");
  if (s.n_startup < 1) throw ValidationError("tpe: n_startup must be >= 1");
  if (s.n_candidates < 1) throw ValidationError("tpe: n_candidates must be >= 1");
}

// One-dimensional Parzen mixture over the transformed coordinate (identity,
// log, or integer grid), with the uniform prior as one extra component.
class ParzenMixture {
public:
  ParzenMixture(const ParamSpec& spec, const std::vector<double>& points) : spec_(spec) {
    lo_ = spec.kind == ParamKind::LogUniform ? std::log(spec.low) : spec.low;
    hi_ = spec.kind == ParamKind::LogUniform ? std::log(spec.high) : spec.high;
    for (double p : points) centers_.push_back(transform(p));

    // Scott's rule over the whole mixture, prior component included (the
    // uniform prior contributes range^2/12 by the law of total variance), so
    // the bandwidth cannot collapse when the good set concentrates. Clamped
    // to [1%, 100%] of the range.
    const double range = hi_ - lo_;
    const double mid = 0.5 * (lo_ + hi_);
    const double m = static_cast<double>(centers_.size());
    const double mean =
        (std::accumulate(centers_.begin(), centers_.end(), 0.0) + mid) / (m + 1.0);
    double var = range * range / 12.0 + (mid - mean) * (mid - mean);
    for (double c : centers_) var += (c - mean) * (c - mean);
    var /= m + 1.0;
    const double scott = std::sqrt(var) * std::pow(m + 1.0, -0.2);
    bandwidth_ = std::clamp(scott, 0.01 * range, range);
  }

  double transform(double v) const {
    return spec_.kind == ParamKind::LogUniform ? std::log(v) : v;
  }

  double untransform(double x) const {
    return spec_.kind == ParamKind::LogUniform ? std::exp(x) : x;
  }

  double clamp_value(double v) const {
    if (spec_.kind == ParamKind::IntegerUniform) {
      return std::clamp(std::round(v), spec_.low, spec_.high);
    }
    return std::clamp(v, spec_.low, spec_.high);
  }

  // Density of the mixture at parameter value v (in parameter space).
  double pdf(double v) const {
    const double x = transform(v);
    const double n_int = std::floor(spec_.high) - std::ceil(spec_.low) + 1.0;
    const double prior = spec_.kind == ParamKind::IntegerUniform ? 1.0 / n_int : 1.0 / (hi_ - lo_);
    double acc = prior;
    for (double c : centers_) {
      if (spec_.kind == ParamKind::IntegerUniform) {
        acc += normal_cdf((x + 0.5 - c) / bandwidth_) - normal_cdf((x - 0.5 - c) / bandwidth_);
      } else {
        const double z = (x - c) / bandwidth_;
        acc += std::exp(-0.5 * z * z) / (bandwidth_ * std::sqrt(2.0 * M_PI));
      }
    }
    return acc / (static_cast<double>(centers_.size()) + 1.0);
  }

  double sample(std::mt19937_64& engine) const {
    std::uniform_int_distribution<size_t> pick(0, centers_.size());
    const size_t idx = pick(engine);
    if (idx == centers_.size()) return sample_prior(spec_, engine);
    std::normal_distribution<double> kernel(centers_[idx], bandwidth_);
    return clamp_value(untransform(kernel(engine)));
  }

  static double sample_prior(const ParamSpec& spec, std::mt19937_64& engine) {
    switch (spec.kind) {
      case ParamKind::LogUniform: {
        std::uniform_real_distribution<double> u(std::log(spec.low), std::log(spec.high));
        return std::exp(u(engine));
      }
      case ParamKind::IntegerUniform: {
        std::uniform_int_distribution<long> u(static_cast<long>(std::ceil(spec.low)),
                                              static_cast<long>(std::floor(spec.high)));
        return static_cast<double>(u(engine));
      }
      default: {
        std::uniform_real_distribution<double> u(spec.low, spec.high);
        return u(engine);
      }
    }
  }

private:
  ParamSpec spec_;
  double lo_ = 0.0, hi_ = 1.0;
  double bandwidth_ = 1.0;
  std::vector<double> centers_;
};

}  // namespace

void ParamSpace::validate() const {
  if (params.empty()) throw ValidationError("tpe: empty parameter space");
  std::set<std::string> names;
  for (const auto& p : params) {
    if (!(p.low < p.high)) {
      throw ValidationError("tpe: parameter '" + p.name + "' requires low < high");
    }
    if (p.kind == ParamKind::LogUniform && !(p.low > 0.0)) {
      throw ValidationError("tpe: log-uniform parameter '" + p.name + "' requires low > 0");
    }
    if (!names.insert(p.name).second) {
      throw ValidationError("tpe: duplicate parameter name '" + p.name + "'");
    }
  }
}

ParamMap suggest_with_engine(const ParamSpace& space, const std::vector<TrialRecord>& history,
                             const TpeSettings& settings, std::mt19937_64& engine) {
  space.validate();
  validate_settings(settings);

  if (static_cast<int>(history.size()) < settings.n_startup) {
    ParamMap out;
    for (const auto& spec : space.params) {
      out[spec.name] = ParzenMixture::sample_prior(spec, engine);
    }
    return out;
  }

  // Split at the gamma quantile: |G| = max(1, ceil(gamma * n)), ties and
  // degenerate histories resolved by trial index.
  const size_t n = history.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (history[a].objective != history[b].objective) {
      return history[a].objective < history[b].objective;
    }
    return history[a].index < history[b].index;
  });
  const size_t n_good = std::max<size_t>(
      1, static_cast<size_t>(std::ceil(settings.gamma * static_cast<double>(n))));

  ParamMap best;
  double best_score = -kInf;
  std::vector<ParzenMixture> good_mix, bad_mix;
  good_mix.reserve(space.params.size());
  bad_mix.reserve(space.params.size());
  for (const auto& spec : space.params) {
    std::vector<double> good_pts, bad_pts;
    for (size_t r = 0; r < n; ++r) {
      const TrialRecord& t = history[order[r]];
      if (r < n_good) {
        // +inf trials never inform the good-set density.
        if (std::isfinite(t.objective)) good_pts.push_back(t.params.at(spec.name));
      } else {
        bad_pts.push_back(t.params.at(spec.name));
      }
    }
    good_mix.emplace_back(spec, good_pts);
    bad_mix.emplace_back(spec, bad_pts);
  }

  for (int c = 0; c < settings.n_candidates; ++c) {
    ParamMap cand;
    double score = 0.0;
    for (size_t p = 0; p < space.params.size(); ++p) {
      const double v = good_mix[p].sample(engine);
      cand[space.params[p].name] = v;
      score += std::log(good_mix[p].pdf(v)) - std::log(bad_mix[p].pdf(v));
    }
    if (score > best_score) {
      best_score = score;
      best = std::move(cand);
    }
  }
  return best;
}

ParamMap suggest(const ParamSpace& space, const std::vector<TrialRecord>& history,
                 const TpeSettings& settings) {
  // Deterministic per (seed, history length) so repeated calls replay.
  std::mt19937_64 engine(settings.seed + 0x9e3779b97f4a7c15ULL * (history.size() + 1));
  return suggest_with_engine(space, history, settings, engine);
}

OptimizeResult optimize(const ParamSpace& space,
                        const std::function<double(const ParamMap&)>& objective, int budget,
                        const TpeSettings& settings) {
  if (budget < 1) throw ValidationError("tpe: budget must be >= 1");
  space.validate();
  validate_settings(settings);

  std::mt19937_64 engine(settings.seed);
  OptimizeResult res;
  res.history.reserve(static_cast<size_t>(budget));
  for (int i = 0; i < budget; ++i) {
    TrialRecord trial;
    trial.index = i;
    trial.params = suggest_with_engine(space, res.history, settings, engine);
    const double value = objective(trial.params);
    trial.objective = std::isfinite(value) ? value : kInf;
    res.history.push_back(std::move(trial));
  }
  res.best = *std::min_element(res.history.begin(), res.history.end(),
                               [](const TrialRecord& a, const TrialRecord& b) {
                                 if (a.objective != b.objective) return a.objective < b.objective;
                                 return a.index < b.index;
                               });
  return res;
}

void save_history_csv(const ParamSpace& space, const std::vector<TrialRecord>& history,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trial history: " + path);
  out << "index";
  for (const auto& p : space.params) out << "," << csv::escape(p.name);
  out << ",objective\n";
  for (const auto& t : history) {
    out << t.index;
    for (const auto& p : space.params) out << "," << csv::format_double(t.params.at(p.name));
    out << "," << (std::isfinite(t.objective) ? csv::format_double(t.objective) : "inf") << "\n";
  }
}

ParamSpace vad_param_space() {
  ParamSpace space;
  space.params = {
      {"threshold_db", ParamKind::Uniform, 0.0, 30.0},
      {"min_speech_ms", ParamKind::IntegerUniform, 30.0, 500.0},
      {"min_silence_ms", ParamKind::IntegerUniform, 30.0, 1000.0},
      {"pad_ms", ParamKind::IntegerUniform, 0.0, 300.0},
  };
  return space;
}

VadParams vad_params_from(const ParamMap& params) {
  VadParams p;
  if (auto it = params.find("threshold_db"); it != params.end()) p.threshold_db = it->second;
  if (auto it = params.find("min_speech_ms"); it != params.end()) p.min_speech_ms = it->second;
  if (auto it = params.find("min_silence_ms"); it != params.end()) p.min_silence_ms = it->second;
  if (auto it = params.find("pad_ms"); it != params.end()) p.pad_ms = it->second;
  return p;
}

double words_per_second(const std::vector<WordSpan>& words) {
  if (words.empty()) return 0.0;
  double speech_time = 0.0;
  for (const auto& w : words) speech_time += w.end_s - w.start_s;
  return speech_time > 0.0 ? static_cast<double>(words.size()) / speech_time : 0.0;
}

double vad_frame_f1(const std::vector<std::pair<Samples, std::vector<WordSpan>>>& items,
                    int sample_rate, const VadParams& params, int jobs) {
  struct Counts {
    long tp = 0, fp = 0, fn = 0;
  };
  std::vector<Counts> counts(items.size());
  parallel_for(static_cast<int64_t>(items.size()), jobs, [&](int64_t i) {
    const auto& [samples, words] = items[static_cast<size_t>(i)];
    if (samples.empty()) return;
    const auto segments = detect(samples, sample_rate, params);
    const double hop_s = 0.010;
    const size_t n_frames = static_cast<size_t>(samples.size()) / static_cast<size_t>(
                                static_cast<int>(std::lround(hop_s * sample_rate)));
    Counts& c = counts[static_cast<size_t>(i)];
    size_t seg_idx = 0, word_idx = 0;
    for (size_t f = 0; f < n_frames; ++f) {
      const double center = (static_cast<double>(f) + 0.5) * hop_s;
      while (seg_idx < segments.size() && segments[seg_idx].end_s <= center) ++seg_idx;
      const bool pred =
          seg_idx < segments.size() && segments[seg_idx].start_s <= center;
      while (word_idx < words.size() && words[word_idx].end_s <= center) ++word_idx;
      const bool ref = word_idx < words.size() && words[word_idx].start_s <= center;
      if (pred && ref) {
        ++c.tp;
      } else if (pred && !ref) {
        ++c.fp;
      } else if (!pred && ref) {
        ++c.fn;
      }
    }
  });
  long tp = 0, fp = 0, fn = 0;
  for (const auto& c : counts) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  if (tp + fp + fn == 0) return 1.0;  // nothing to find and nothing found
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

VadParams tune_vad(const CorpusSnapshot& snapshot, const TimestampMap& words,
                   SpeechRateClass rate_class, const RateBounds& bounds, const ParamSpace& space,
                   int budget, const TpeSettings& settings, const AudioProvider& audio, int jobs,
                   std::vector<TrialRecord>* history_out) {
  // Class membership is decided per source from its word timestamps.
  std::vector<std::pair<Samples, std::vector<WordSpan>>> items;
  for (const auto& u : snapshot.utterances) {
    auto it = words.find(u.source_id);
    if (it == words.end()) {
      throw DataError("tune_vad: no word timestamps for source " + u.source_id);
    }
    if (classify_rate(words_per_second(it->second), bounds) != rate_class) continue;
    // Word times are source-relative; shift into the utterance extent.
    std::vector<WordSpan> local;
    for (const auto& w : it->second) {
      if (w.end_s <= u.start_s || w.start_s >= u.end_s) continue;
      local.push_back({w.word, std::max(w.start_s, u.start_s) - u.start_s,
                       std::min(w.end_s, u.end_s) - u.start_s});
    }
    items.emplace_back(audio(u), std::move(local));
  }
  if (items.empty()) {
    throw DataError(std::string("tune_vad: no utterances in class ") +
                    rate_class_name(rate_class));
  }
  const int rate = snapshot.utterances.front().sample_rate;

  auto objective = [&](const ParamMap& params) {
    return 1.0 - vad_frame_f1(items, rate, vad_params_from(params), jobs);
  };
  OptimizeResult res = optimize(space, objective, budget, settings);
  if (history_out) *history_out = res.history;
  return vad_params_from(res.best.params);
}

}  // namespace pipescore
