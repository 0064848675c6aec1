#include "pipescore/types.hpp"

#include <array>
#include <limits>
#include <stdexcept>

#include "pipescore/sum.hpp"

namespace pipescore {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Validation ranges: values must be finite everywhere; MOS scores live on
// [1, 5] and T30 must be positive. Everything else is unconstrained.
const std::array<MetricInfo, 9> kMetricTable = {{
    {"PESQ", "MOS-LQO", MetricDirection::Up, -kInf, kInf},
    {"SNR", "dB", MetricDirection::Up, -kInf, kInf},
    {"SI_SDR", "dB", MetricDirection::Up, -kInf, kInf},
    {"T30", "s", MetricDirection::Down, 1e-9, kInf},
    {"C50", "dB", MetricDirection::Up, -kInf, kInf},
    {"F0_STD", "Hz", MetricDirection::Up, 0.0, kInf},
    {"MCD", "dB", MetricDirection::Down, 0.0, kInf},
    {"MOS_NISQA", "MOS", MetricDirection::Up, 1.0, 5.0},
    {"MOS_DNSMOS", "MOS", MetricDirection::Up, 1.0, 5.0},
}};

}  // namespace

const MetricInfo& metric_info(MetricKind kind) {
  return kMetricTable[static_cast<size_t>(kind)];
}

std::optional<MetricKind> metric_from_name(const std::string& name) {
  for (size_t i = 0; i < kMetricTable.size(); ++i) {
    if (name == kMetricTable[i].name) return static_cast<MetricKind>(i);
  }
  return std::nullopt;
}

const std::vector<MetricKind>& all_metric_kinds() {
  static const std::vector<MetricKind> kinds = [] {
    std::vector<MetricKind> v;
    for (size_t i = 0; i < kMetricTable.size(); ++i) v.push_back(static_cast<MetricKind>(i));
    return v;
  }();
  return kinds;
}

double MetricMap::at(MetricKind kind) const {
  if (!count(kind)) {
    throw std::out_of_range(std::string("metric not present: ") + metric_name(kind));
  }
  return values_[index(kind)];
}

size_t MetricMap::size() const {
  size_t n = 0;
  for (size_t i = 0; i < kMetricCount; ++i) n += (present_ >> i) & 1u;
  return n;
}

double CorpusSnapshot::total_hours() const {
  return pairwise_sum(utterances.size(),
                      [&](size_t i) { return utterances[i].duration_s; }) /
         3600.0;
}

bool CorpusSnapshot::has_metric(MetricKind kind) const {
  if (utterances.empty()) return false;
  for (const auto& u : utterances) {
    if (!u.metrics.count(kind)) return false;
  }
  return true;
}

}  // namespace pipescore
