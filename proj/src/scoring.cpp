#include "pipescore/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "pipescore/errors.hpp"
#include "pipescore/sum.hpp"

namespace pipescore {

namespace {

// Processed-side means must stay above this; the ratio orientation is
// undefined at or below zero and we refuse to guess.
constexpr double kDenomEpsilon = 1e-6;

double checked_mean(const AggregateMetrics& agg, MetricKind kind, const char* side) {
  if (!agg.has(kind)) {
    throw DataError(std::string("missing ") + metric_name(kind) + " aggregate on " + side +
                    " snapshot");
  }
  return agg.stats.at(kind).mean;
}

double positive_mean(const AggregateMetrics& agg, MetricKind kind, const char* side) {
  const double v = checked_mean(agg, kind, side);
  if (!(v > kDenomEpsilon)) {
    throw DataError(std::string(metric_name(kind)) + " mean on " + side + " snapshot is " +
                    std::to_string(v) + " (<= epsilon floor); ratio orientation undefined");
  }
  return v;
}

}  // namespace

double AggregateMetrics::mean(MetricKind kind) const {
  auto it = stats.find(kind);
  if (it == stats.end()) {
    throw DataError(std::string("aggregate has no ") + metric_name(kind));
  }
  return it->second.mean;
}

AggregateMetrics aggregate(const CorpusSnapshot& snapshot, const std::set<MetricKind>& kinds) {
  if (snapshot.utterances.empty()) {
    throw DataError("aggregate undefined for empty snapshot '" + snapshot.name + "'");
  }
  AggregateMetrics out;
  out.hours = snapshot.total_hours();
  const size_t n = snapshot.utterances.size();
  for (MetricKind kind : kinds) {
    for (const auto& u : snapshot.utterances) {
      if (!u.metrics.count(kind)) {
        throw DataError(std::string("metric ") + metric_name(kind) + " missing on utterance " +
                        u.id + " (strict coverage required)");
      }
    }
    MetricStats stats;
    stats.mean = pairwise_sum(n, [&](size_t i) {
                   return snapshot.utterances[i].metrics.at(kind);
                 }) /
                 static_cast<double>(n);
    stats.std_dev = std::sqrt(
        pairwise_sum(n,
                     [&](size_t i) {
                       const double d = snapshot.utterances[i].metrics.at(kind) - stats.mean;
                       return d * d;
                     }) /
        static_cast<double>(n));
    const double total_dur =
        pairwise_sum(n, [&](size_t i) { return snapshot.utterances[i].duration_s; });
    stats.duration_weighted_mean =
        total_dur > 0.0
            ? pairwise_sum(n,
                           [&](size_t i) {
                             return snapshot.utterances[i].metrics.at(kind) *
                                    snapshot.utterances[i].duration_s;
                           }) /
                  total_dur
            : stats.mean;
    out.stats[kind] = stats;
  }
  return out;
}

double score_dr(const AggregateMetrics& raw, const AggregateMetrics& processed) {
  if (!(raw.hours > 0.0)) throw DataError("score_dr: raw hours must be positive");
  return 1.0 - processed.hours / raw.hours;
}

double score_sq(const AggregateMetrics& raw, const AggregateMetrics& processed) {
  const double pesq = checked_mean(raw, MetricKind::Pesq, "raw") /
                      positive_mean(processed, MetricKind::Pesq, "processed");
  const double sisdr = checked_mean(raw, MetricKind::SiSdr, "raw") /
                       positive_mean(processed, MetricKind::SiSdr, "processed");
  const double snr = checked_mean(raw, MetricKind::Snr, "raw") /
                     positive_mean(processed, MetricKind::Snr, "processed");
  return pesq + sisdr + snr;
}

double score_ap(const AggregateMetrics& raw, const AggregateMetrics& processed) {
  const double t30 = checked_mean(processed, MetricKind::T30, "processed") /
                     positive_mean(raw, MetricKind::T30, "raw");
  const double c50 = checked_mean(raw, MetricKind::C50, "raw") /
                     positive_mean(processed, MetricKind::C50, "processed");
  return t30 + c50;
}

double score_sd(const AggregateMetrics& raw, const AggregateMetrics& processed, bool denoised,
                double mcd_reference_db) {
  const double f0_ratio = checked_mean(processed, MetricKind::F0Std, "processed") /
                          positive_mean(raw, MetricKind::F0Std, "raw");
  double sd = std::fabs(1.0 - f0_ratio);
  if (denoised) {
    // MCD against the fixed reference, only when audio was actually altered.
    sd += checked_mean(processed, MetricKind::Mcd, "processed") / mcd_reference_db;
  }
  return sd;
}

SubsetScores composite(double dr, double sq, double ap, double sd, const Weights& weights) {
  if (weights.dr < 0.0 || weights.sq < 0.0 || weights.ap < 0.0 || weights.sd < 0.0) {
    throw ValidationError("composite: weights must be non-negative");
  }
  if (weights.dr == 0.0 && weights.sq == 0.0 && weights.ap == 0.0 && weights.sd == 0.0) {
    throw ValidationError("composite: weights must not all be zero");
  }
  SubsetScores s;
  s.dr = dr;
  s.sq = sq;
  s.ap = ap;
  s.sd = sd;
  s.weights = weights;
  s.total = weights.dr * dr + weights.sq * sq + weights.ap * ap + weights.sd * sd;
  return s;
}

std::vector<ScoredConfig> rank(std::vector<ScoredConfig> configs) {
  std::stable_sort(configs.begin(), configs.end(), [](const ScoredConfig& a, const ScoredConfig& b) {
    if (a.scores.total != b.scores.total) return a.scores.total < b.scores.total;
    if (a.scores.dr != b.scores.dr) return a.scores.dr < b.scores.dr;
    return a.name < b.name;
  });
  return configs;
}

}  // namespace pipescore
