#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pipescore/types.hpp"

namespace pipescore {

struct WordSpan {
  std::string word;
  double start_s = 0.0;
  double end_s = 0.0;
};

using TimestampMap = std::map<std::string, std::vector<WordSpan>>;

// Externally computed per-utterance values for exactly one metric.
struct SidecarTable {
  MetricKind metric;
  std::map<std::string, double> rows;  // utterance id -> value
};

// CSV with an `id,value` header. Values must be finite and inside the
// metric's validation range; duplicates and malformed rows fail with line
// numbers. Unknown utterance ids are fine here; they are matched at merge.
SidecarTable load_sidecar(const std::string& path, MetricKind metric);
void save_sidecar(const SidecarTable& table, const std::string& path);

// JSONL: {"id": ..., "words": [{"w","start","end"}, ...]} per line. Word
// spans must be ordered and non-overlapping.
TimestampMap load_timestamps(const std::string& path);
void save_timestamps(const TimestampMap& words, const std::string& path);

enum class MergePolicy { Strict, Partial };
// Id joins by utterance id; Source propagates one per-recording value to
// every utterance cut from that recording.
enum class MergeJoin { Id, Source };

struct MergeStats {
  size_t matched = 0;
  size_t total = 0;
  double coverage = 0.0;
  std::vector<std::string> replaced_ids;  // ids whose previous value was overwritten
};

// Attaches the table's metric to matching utterances. Strict requires full
// coverage; Partial records the coverage fraction on the snapshot. Never
// touches lineage or duration fields.
MergeStats merge(CorpusSnapshot& snapshot, const SidecarTable& table,
                 MergePolicy policy = MergePolicy::Strict, MergeJoin join = MergeJoin::Id);

}  // namespace pipescore
