#pragma once

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pipescore/corpus.hpp"
#include "pipescore/sidecar.hpp"
#include "pipescore/types.hpp"
#include "pipescore/vad.hpp"

namespace pipescore {

enum class ParamKind { Uniform, LogUniform, IntegerUniform };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::Uniform;
  double low = 0.0;
  double high = 1.0;
};

struct ParamSpace {
  std::vector<ParamSpec> params;
  void validate() const;  // low < high; log-uniform needs low > 0
};

using ParamMap = std::map<std::string, double>;

struct TrialRecord {
  int index = 0;
  ParamMap params;
  double objective = 0.0;  // minimized
};

struct TpeSettings {
  double gamma = 0.25;    // quantile split between good and bad trials
  int n_startup = 10;     // uniform random trials before the surrogate kicks in
  int n_candidates = 24;  // samples drawn from the good-set density per step
  uint64_t seed = 42;
};

// One TPE step: below n_startup returns a seeded uniform sample; otherwise
// splits history at the gamma quantile, fits per-parameter Parzen mixtures
// l(x) over the good set and g(x) over the bad set (uniform prior mixed into
// each), samples n_candidates from l and returns the candidate maximizing
// sum(log l - log g).
ParamMap suggest(const ParamSpace& space, const std::vector<TrialRecord>& history,
                 const TpeSettings& settings);

// Same step against a caller-owned engine (used by optimize so one seed
// drives the whole run).
ParamMap suggest_with_engine(const ParamSpace& space, const std::vector<TrialRecord>& history,
                             const TpeSettings& settings, std::mt19937_64& engine);

struct OptimizeResult {
  TrialRecord best;
  std::vector<TrialRecord> history;
};

// Sequential suggest/evaluate loop. Non-finite objectives are recorded as
// +inf and never enter the good set.
OptimizeResult optimize(const ParamSpace& space,
                        const std::function<double(const ParamMap&)>& objective, int budget,
                        const TpeSettings& settings);

void save_history_csv(const ParamSpace& space, const std::vector<TrialRecord>& history,
                      const std::string& path);

// Search space for the energy VAD, spec'd ranges.
ParamSpace vad_param_space();
VadParams vad_params_from(const ParamMap& params);

// Tunes detect() for the utterances of one speech-rate class by minimizing
// 1 - F1 of frame-level speech decisions against word-timestamp masks.
// words are keyed by source id; rate is classified per source from its
// words-per-second of speech time.
VadParams tune_vad(const CorpusSnapshot& snapshot, const TimestampMap& words,
                   SpeechRateClass rate_class, const RateBounds& bounds, const ParamSpace& space,
                   int budget, const TpeSettings& settings, const AudioProvider& audio,
                   int jobs = 0, std::vector<TrialRecord>* history_out = nullptr);

// Frame-level F1 helper shared by tune_vad and its tests.
double vad_frame_f1(const std::vector<std::pair<Samples, std::vector<WordSpan>>>& items,
                    int sample_rate, const VadParams& params, int jobs = 0);

double words_per_second(const std::vector<WordSpan>& words);

}  // namespace pipescore
