#include "pipescore/batch.hpp"

#include <cmath>

#include "pipescore/errors.hpp"
#include "pipescore/parallel.hpp"
#include "pipescore/wada.hpp"

namespace pipescore {

NativeMetricsResult compute_native_metrics(const CorpusSnapshot& snapshot,
                                           const AudioProvider& audio,
                                           const YinParams& yin_params, const BatchOptions& opts) {
  const size_t n = snapshot.size();
  struct Row {
    bool has_snr = false, has_f0 = false;
    double snr = 0.0, f0 = 0.0;
    std::string skip_reason;
  };
  std::vector<Row> rows(n);

  parallel_for(static_cast<int64_t>(n), opts.jobs, [&](int64_t i) {
    const Utterance& u = snapshot.utterances[static_cast<size_t>(i)];
    Row& row = rows[static_cast<size_t>(i)];
    Samples samples;
    try {
      samples = audio(u);
    } catch (const std::exception& e) {
      row.skip_reason = e.what();
      return;
    }
    try {
      row.snr = wada_snr(samples, u.sample_rate);
      row.has_snr = true;
    } catch (const DataError& e) {
      row.skip_reason = e.what();
    }
    try {
      const F0Track track = yin_f0(samples, u.sample_rate, yin_params);
      row.f0 = f0_std(track);
      row.has_f0 = true;
    } catch (const DataError& e) {
      if (!row.skip_reason.empty()) row.skip_reason += "; ";
      row.skip_reason += e.what();
    }
  });

  NativeMetricsResult res;
  res.snr.metric = MetricKind::Snr;
  res.f0_std.metric = MetricKind::F0Std;
  for (size_t i = 0; i < n; ++i) {
    const std::string& id = snapshot.utterances[i].id;
    if (rows[i].has_snr) res.snr.rows[id] = rows[i].snr;
    if (rows[i].has_f0) res.f0_std.rows[id] = rows[i].f0;
    if (!rows[i].skip_reason.empty()) res.skipped[id] = rows[i].skip_reason;
  }
  return res;
}

SidecarTable compute_mcd_table(const CorpusSnapshot& raw, const CorpusSnapshot& processed,
                               const AudioProvider& raw_audio, const AudioProvider& processed_audio,
                               const FramePlan& plan, McdAlign align, const BatchOptions& opts) {
  if (raw.size() != processed.size()) {
    throw DataError("compute_mcd_table: snapshot sizes differ");
  }
  const size_t n = raw.size();
  std::vector<double> values(n);
  std::vector<std::string> errors(n);
  parallel_for(static_cast<int64_t>(n), opts.jobs, [&](int64_t i) {
    const Utterance& r = raw.utterances[static_cast<size_t>(i)];
    const Utterance& p = processed.utterances[static_cast<size_t>(i)];
    if (r.id != p.id) {
      errors[static_cast<size_t>(i)] = "id mismatch: " + r.id + " vs " + p.id;
      return;
    }
    try {
      const CepstraSequence ref = mfcc(raw_audio(r), r.sample_rate, plan);
      const CepstraSequence proc = mfcc(processed_audio(p), p.sample_rate, plan);
      values[static_cast<size_t>(i)] = mcd(ref, proc, align);
    } catch (const std::exception& e) {
      errors[static_cast<size_t>(i)] = e.what();
    }
  });
  SidecarTable table;
  table.metric = MetricKind::Mcd;
  std::string detail;
  size_t failures = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      ++failures;
      if (failures <= 5) detail += "\n  " + raw.utterances[i].id + ": " + errors[i];
      continue;
    }
    table.rows[raw.utterances[i].id] = values[i];
  }
  if (failures > 0) {
    throw DataError("compute_mcd_table failed for " + std::to_string(failures) + "/" +
                    std::to_string(n) + " utterances:" + detail);
  }
  return table;
}

std::vector<ConfigRunResult> run_sweep(const CorpusSnapshot& raw,
                                       const std::vector<PipelineConfig>& grid,
                                       const std::map<std::string, CorpusSnapshot>& processed,
                                       const Weights& weights, double mcd_reference_db,
                                       const BatchOptions& opts) {
  std::vector<ConfigRunResult> results(grid.size());
  parallel_for(static_cast<int64_t>(grid.size()), opts.jobs, [&](int64_t i) {
    results[static_cast<size_t>(i)] =
        run_config(raw, grid[static_cast<size_t>(i)], processed, weights, mcd_reference_db);
  });
  return results;
}

}  // namespace pipescore
