#pragma once

#include <map>
#include <string>
#include <vector>

#include "pipescore/scoring.hpp"
#include "pipescore/types.hpp"

namespace pipescore {

struct PipelineConfig {
  std::string enhancement;  // lineage label: which processed snapshot to read
  MetricKind filter_metric = MetricKind::MosNisqa;
  double threshold = 0.0;
  std::string vad_profile;  // informational; segmentation happens upstream

  std::string name() const;  // e.g. "demucs+MOS_DNSMOS:2.7"
};

// Cartesian product in deterministic order: enhancements outer, filters in
// listed order, thresholds in listed order. Duplicate thresholds within one
// filter are a degenerate grid.
std::vector<PipelineConfig> build_grid(
    const std::vector<std::string>& enhancements,
    const std::vector<std::pair<MetricKind, std::vector<double>>>& filters);

struct FilterOutcome {
  CorpusSnapshot retained;    // filter metric >= threshold
  CorpusSnapshot eliminated;  // filter metric < threshold
  double threshold = 0.0;
};

FilterOutcome apply_filter(const CorpusSnapshot& snapshot, MetricKind metric, double threshold);

struct SensitivityRow {
  double threshold = 0.0;
  double retained_fraction = 0.0;
  double sensitivity = 0.0;  // |retained(t) - retained(t+delta)| / retained(t)
  bool defined = true;       // false when retained(t) = 0
};

struct SensitivityReport {
  MetricKind metric = MetricKind::MosNisqa;
  double delta = 0.0;
  double median = 0.0;    // of the metric distribution
  double variance = 0.0;  // population variance of the metric distribution
  std::vector<SensitivityRow> rows;
};

SensitivityReport filter_sensitivity(const CorpusSnapshot& snapshot, MetricKind metric,
                                     const std::vector<double>& thresholds, double delta);

struct ConfigRunResult {
  PipelineConfig config;
  bool ok = false;
  std::string error;  // set when the config was quarantined
  FilterOutcome outcome;
  SubsetScores scores;
  AggregateMetrics raw_agg;
  AggregateMetrics retained_agg;
  AggregateMetrics eliminated_agg;  // stats kinds may be partial; hours always set
  size_t retained_count = 0;
  size_t eliminated_count = 0;
};

// Filters the enhancement's snapshot at the config threshold and scores the
// retained set against the raw snapshot. The MCD term participates exactly
// when enhancement != "none". Raw and processed snapshots must align by id
// with durations within 1%.
ConfigRunResult run_config(const CorpusSnapshot& raw, const PipelineConfig& config,
                           const std::map<std::string, CorpusSnapshot>& processed_snapshots,
                           const Weights& weights = {}, double mcd_reference_db = 5.0);

}  // namespace pipescore
