#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <string>

#include "pipescore/types.hpp"

namespace pipescore {

struct ManifestRow {
  std::string id;
  std::string path;
  std::string source_id;  // original recording; empty means the row is its own source
  std::string speaker_id;
  std::optional<double> start_s;  // absent start/end means the whole file
  std::optional<double> end_s;
};

// Manifest format: UTF-8 JSONL
// ({"id","path","source_id"?,"speaker_id"?,"start_s"?,"end_s"?}, one object
// per line) or CSV with an `id,path[,source_id,speaker_id,start_s,end_s]`
// header. Chosen by extension: .csv is CSV, anything else JSONL.
std::vector<ManifestRow> parse_manifest(const std::string& path);
void write_manifest(const std::vector<ManifestRow>& rows, const std::string& path);

struct IngestOptions {
  int target_rate = 16000;
  // Fraction of rows allowed to fail decode before the run aborts. 0 = strict.
  double max_error_rate = 0.0;
  int jobs = 0;  // 0 = all cores
};

// One Utterance per manifest row, in manifest order. Audio is decoded once to
// validate and measure; downstream stages re-read it through AudioCache.
CorpusSnapshot ingest_manifest(const std::string& manifest_path, const IngestOptions& opts);

// Snapshot persistence: JSONL, header object first (schema_version, name,
// coverage), then one object per utterance. Double fields round-trip exactly.
void save_snapshot(const CorpusSnapshot& snapshot, const std::string& path);
CorpusSnapshot load_snapshot(const std::string& path);

using AudioProvider = std::function<Samples(const Utterance&)>;

// Decoded-source cache keyed by path. slice() cuts an utterance extent out of
// its source at the working rate. Safe for concurrent use.
class AudioCache {
public:
  explicit AudioCache(int target_rate) : target_rate_(target_rate) {}
  Samples slice(const Utterance& utt);
  const Samples& full(const std::string& path);
  AudioProvider provider() {
    return [this](const Utterance& u) { return slice(u); };
  }

private:
  int target_rate_;
  std::mutex mu_;
  std::map<std::string, Samples> files_;
};

}  // namespace pipescore
