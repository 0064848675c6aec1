#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pipescore {

// Mono audio, values in [-1, 1].
using Samples = std::vector<float>;

enum class MetricKind {
  Pesq,
  Snr,
  SiSdr,
  T30,
  C50,
  F0Std,
  Mcd,
  MosNisqa,
  MosDnsmos,
};

enum class MetricDirection { Up, Down };

inline constexpr size_t kMetricCount = 9;

// Flat per-utterance metric store. Snapshots copy these by the million during
// sweeps, so no heap, no node churn: one array and a presence mask. Absent
// slots stay zero so equality is plain memberwise comparison.
class MetricMap {
public:
  bool count(MetricKind kind) const { return (present_ >> index(kind)) & 1u; }
  double at(MetricKind kind) const;  // throws std::out_of_range when absent
  double& operator[](MetricKind kind) {
    present_ = static_cast<uint16_t>(present_ | (1u << index(kind)));
    return values_[index(kind)];
  }
  void clear() {
    present_ = 0;
    values_.fill(0.0);
  }
  size_t size() const;
  bool empty() const { return present_ == 0; }
  bool operator==(const MetricMap&) const = default;

private:
  static size_t index(MetricKind kind) { return static_cast<size_t>(kind); }
  std::array<double, kMetricCount> values_{};
  uint16_t present_ = 0;
};

struct MetricInfo {
  const char* name;  // stable identifier used in files and on the CLI
  const char* unit;
  MetricDirection direction;
  double min_value;  // sidecar validation range (inclusive)
  double max_value;
};

const MetricInfo& metric_info(MetricKind kind);
std::optional<MetricKind> metric_from_name(const std::string& name);
const std::vector<MetricKind>& all_metric_kinds();
inline const char* metric_name(MetricKind kind) { return metric_info(kind).name; }

// One audio segment. start_s/end_s locate the extent inside the source
// recording; audio is decoded on demand from source_path.
struct Utterance {
  std::string id;
  std::string source_id;
  std::string source_path;
  std::string speaker_id;  // empty when unknown
  double start_s = 0.0;
  double end_s = 0.0;
  double duration_s = 0.0;
  int sample_rate = 0;
  int channel_count = 1;
  MetricMap metrics;
};

struct CorpusSnapshot {
  std::string name;
  std::vector<Utterance> utterances;
  // Coverage fraction per metric recorded by partial merges (1.0 for strict).
  std::map<std::string, double> coverage;

  double total_hours() const;
  // True when every utterance carries the metric.
  bool has_metric(MetricKind kind) const;
  bool empty() const { return utterances.empty(); }
  size_t size() const { return utterances.size(); }
};

}  // namespace pipescore
