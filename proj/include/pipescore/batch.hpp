#pragma once

#include <map>
#include <string>
#include <vector>

#include "pipescore/corpus.hpp"
#include "pipescore/mcd.hpp"
#include "pipescore/scoring.hpp"
#include "pipescore/sidecar.hpp"
#include "pipescore/sweep.hpp"
#include "pipescore/yin.hpp"

namespace pipescore {

// jobs = 1 runs the serial reference path; anything else fans out with
// OpenMP. Results are written by index, so outputs are identical for every
// jobs value. The benchmark target compares the two paths.
struct BatchOptions {
  int jobs = 0;  // 0 = all cores
};

struct NativeMetricsResult {
  SidecarTable snr;     // WADA estimates
  SidecarTable f0_std;  // YIN dispersion
  // id -> reason for utterances where a statistic was undefined
  std::map<std::string, std::string> skipped;
};

NativeMetricsResult compute_native_metrics(const CorpusSnapshot& snapshot,
                                           const AudioProvider& audio,
                                           const YinParams& yin_params = {},
                                           const BatchOptions& opts = {});

// Per-utterance MCD between time-aligned raw and processed lineages. The
// snapshots must agree on ids and extents.
SidecarTable compute_mcd_table(const CorpusSnapshot& raw, const CorpusSnapshot& processed,
                               const AudioProvider& raw_audio, const AudioProvider& processed_audio,
                               const FramePlan& plan = {}, McdAlign align = McdAlign::None,
                               const BatchOptions& opts = {});

// Runs every grid config; per-config failures are quarantined in the result,
// never thrown. Output order equals grid order.
std::vector<ConfigRunResult> run_sweep(const CorpusSnapshot& raw,
                                       const std::vector<PipelineConfig>& grid,
                                       const std::map<std::string, CorpusSnapshot>& processed,
                                       const Weights& weights = {}, double mcd_reference_db = 5.0,
                                       const BatchOptions& opts = {});

}  // namespace pipescore
