#include "pipescore/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pipescore/csvio.hpp"
#include "pipescore/errors.hpp"

namespace pipescore {

std::string PipelineConfig::name() const {
  std::ostringstream os;
  os << enhancement << "+" << metric_name(filter_metric) << ":" << csv::format_double(threshold);
  return os.str();
}

std::vector<PipelineConfig> build_grid(
    const std::vector<std::string>& enhancements,
    const std::vector<std::pair<MetricKind, std::vector<double>>>& filters) {
  if (enhancements.empty() || filters.empty()) {
    throw ValidationError("build_grid: enhancement and filter lists must be non-empty");
  }
  for (const auto& [metric, thresholds] : filters) {
    if (thresholds.empty()) {
      throw ValidationError(std::string("build_grid: empty threshold list for ") +
                            metric_name(metric));
    }
    std::set<double> unique(thresholds.begin(), thresholds.end());
    if (unique.size() != thresholds.size()) {
      throw ValidationError(std::string("build_grid: duplicate thresholds for ") +
                            metric_name(metric) + " make a degenerate grid");
    }
  }
  std::vector<PipelineConfig> grid;
  for (const auto& enh : enhancements) {
    for (const auto& [metric, thresholds] : filters) {
      for (double t : thresholds) {
        PipelineConfig cfg;
        cfg.enhancement = enh;
        cfg.filter_metric = metric;
        cfg.threshold = t;
        grid.push_back(std::move(cfg));
      }
    }
  }
  return grid;
}

FilterOutcome apply_filter(const CorpusSnapshot& snapshot, MetricKind metric, double threshold) {
  FilterOutcome out;
  out.threshold = threshold;
  out.retained.name = snapshot.name + "/retained";
  out.eliminated.name = snapshot.name + "/eliminated";
  out.retained.utterances.reserve(snapshot.size());
  out.eliminated.utterances.reserve(snapshot.size());
  for (const auto& u : snapshot.utterances) {
    if (!u.metrics.count(metric)) {
      throw DataError(std::string("apply_filter: utterance ") + u.id + " lacks " +
                      metric_name(metric));
    }
    // Values exactly at the threshold are retained.
    if (u.metrics.at(metric) >= threshold) {
      out.retained.utterances.push_back(u);
    } else {
      out.eliminated.utterances.push_back(u);
    }
  }
  return out;
}

SensitivityReport filter_sensitivity(const CorpusSnapshot& snapshot, MetricKind metric,
                                     const std::vector<double>& thresholds, double delta) {
  if (thresholds.size() < 2) {
    throw ValidationError("filter_sensitivity needs at least 2 thresholds");
  }
  if (snapshot.utterances.empty()) {
    throw DataError("filter_sensitivity: empty snapshot");
  }
  std::vector<double> values;
  values.reserve(snapshot.size());
  for (const auto& u : snapshot.utterances) {
    if (!u.metrics.count(metric)) {
      throw DataError(std::string("filter_sensitivity: utterance ") + u.id + " lacks " +
                      metric_name(metric));
    }
    values.push_back(u.metrics.at(metric));
  }
  std::sort(values.begin(), values.end());
  const size_t n = values.size();

  SensitivityReport report;
  report.metric = metric;
  report.delta = delta;
  report.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  for (double v : values) report.variance += (v - mean) * (v - mean);
  report.variance /= static_cast<double>(n);

  auto retained_fraction = [&](double t) {
    // values sorted ascending; retained = count(v >= t)
    const auto it = std::lower_bound(values.begin(), values.end(), t);
    return static_cast<double>(values.end() - it) / static_cast<double>(n);
  };
  for (double t : thresholds) {
    SensitivityRow row;
    row.threshold = t;
    row.retained_fraction = retained_fraction(t);
    if (row.retained_fraction > 0.0) {
      row.sensitivity =
          std::fabs(row.retained_fraction - retained_fraction(t + delta)) / row.retained_fraction;
    } else {
      row.defined = false;
      row.sensitivity = std::numeric_limits<double>::quiet_NaN();
    }
    report.rows.push_back(row);
  }
  return report;
}

ConfigRunResult run_config(const CorpusSnapshot& raw, const PipelineConfig& config,
                           const std::map<std::string, CorpusSnapshot>& processed_snapshots,
                           const Weights& weights, double mcd_reference_db) {
  ConfigRunResult res;
  res.config = config;
  try {
    auto it = processed_snapshots.find(config.enhancement);
    if (it == processed_snapshots.end()) {
      throw DataError("no processed snapshot for enhancement '" + config.enhancement + "'");
    }
    const CorpusSnapshot& processed = it->second;

    // Lineage check: processed must be the same utterances, time-aligned.
    if (processed.size() != raw.size()) {
      throw DataError("processed snapshot '" + config.enhancement + "' has " +
                      std::to_string(processed.size()) + " utterances, raw has " +
                      std::to_string(raw.size()));
    }
    for (size_t i = 0; i < raw.size(); ++i) {
      const Utterance& r = raw.utterances[i];
      const Utterance& p = processed.utterances[i];
      if (r.id != p.id) {
        throw DataError("id mismatch at position " + std::to_string(i) + ": raw '" + r.id +
                        "' vs processed '" + p.id + "'");
      }
      if (std::fabs(r.duration_s - p.duration_s) > 0.01 * std::max(r.duration_s, p.duration_s)) {
        throw DataError("duration mismatch for utterance " + r.id);
      }
    }

    const bool denoised = config.enhancement != "none";
    res.outcome = apply_filter(processed, config.filter_metric, config.threshold);
    res.retained_count = res.outcome.retained.size();
    res.eliminated_count = res.outcome.eliminated.size();

    const std::set<MetricKind> score_kinds = {MetricKind::Pesq,  MetricKind::Snr,
                                              MetricKind::SiSdr, MetricKind::T30,
                                              MetricKind::C50,   MetricKind::F0Std};
    std::set<MetricKind> retained_kinds = score_kinds;
    if (denoised) retained_kinds.insert(MetricKind::Mcd);

    res.raw_agg = aggregate(raw, score_kinds);
    res.retained_agg = aggregate(res.outcome.retained, retained_kinds);
    if (!res.outcome.eliminated.empty()) {
      res.eliminated_agg = aggregate(res.outcome.eliminated, score_kinds);
    }

    const double dr = score_dr(res.raw_agg, res.retained_agg);
    const double sq = score_sq(res.raw_agg, res.retained_agg);
    const double ap = score_ap(res.raw_agg, res.retained_agg);
    const double sd = score_sd(res.raw_agg, res.retained_agg, denoised, mcd_reference_db);
    res.scores = composite(dr, sq, ap, sd, weights);
    res.ok = true;
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = std::string(e.what()) + " [config " + config.name() + "]";
  }
  return res;
}

}  // namespace pipescore
