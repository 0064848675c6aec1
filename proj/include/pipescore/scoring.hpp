#pragma once

#include <set>
#include <string>
#include <vector>

#include "pipescore/types.hpp"

namespace pipescore {

struct MetricStats {
  double mean = 0.0;
  double std_dev = 0.0;                 // population std over utterances
  double duration_weighted_mean = 0.0;  // diagnostic only; never scored
};

struct AggregateMetrics {
  double hours = 0.0;
  std::map<MetricKind, MetricStats> stats;

  bool has(MetricKind kind) const { return stats.count(kind) > 0; }
  double mean(MetricKind kind) const;
};

// Unweighted per-utterance mean and population std for each requested kind.
// Every kind must have full coverage (the strict-merge guarantee).
AggregateMetrics aggregate(const CorpusSnapshot& snapshot, const std::set<MetricKind>& kinds);

// Subset scores over dataset aggregates. Lower is better everywhere.
double score_dr(const AggregateMetrics& raw, const AggregateMetrics& processed);
double score_sq(const AggregateMetrics& raw, const AggregateMetrics& processed);
double score_ap(const AggregateMetrics& raw, const AggregateMetrics& processed);
double score_sd(const AggregateMetrics& raw, const AggregateMetrics& processed, bool denoised,
                double mcd_reference_db = 5.0);

struct Weights {
  double dr = 1.0, sq = 1.0, ap = 1.0, sd = 1.0;
};

struct SubsetScores {
  double dr = 0.0, sq = 0.0, ap = 0.0, sd = 0.0;
  Weights weights;
  double total = 0.0;
};

SubsetScores composite(double dr, double sq, double ap, double sd, const Weights& weights = {});

struct ScoredConfig {
  std::string name;
  SubsetScores scores;
};

// Ascending by total; ties by dr, then name.
std::vector<ScoredConfig> rank(std::vector<ScoredConfig> configs);

}  // namespace pipescore
