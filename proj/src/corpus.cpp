#include "pipescore/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pipescore/csvio.hpp"
#include "pipescore/errors.hpp"
#include "pipescore/parallel.hpp"
#include "pipescore/wav.hpp"

namespace pipescore {

namespace {

using json = nlohmann::ordered_json;

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double parse_double_field(const std::string& s, const std::string& what, size_t line_no) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("manifest line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
  }
}

std::vector<ManifestRow> parse_manifest_csv(const std::string& path) {
  auto rows = csv::read_rows(path);
  if (rows.empty()) return {};
  const auto& header = rows.front();
  std::map<std::string, size_t> col;
  for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  if (!col.count("id") || !col.count("path")) {
    throw ValidationError("manifest CSV must have 'id' and 'path' columns: " + path);
  }
  auto get = [&](const std::vector<std::string>& r, const char* name) -> std::string {
    auto it = col.find(name);
    if (it == col.end() || it->second >= r.size()) return "";
    return r[it->second];
  };
  std::vector<ManifestRow> out;
  for (size_t i = 1; i < rows.size(); ++i) {
    ManifestRow m;
    m.id = get(rows[i], "id");
    m.path = get(rows[i], "path");
    m.source_id = get(rows[i], "source_id");
    m.speaker_id = get(rows[i], "speaker_id");
    std::string s = get(rows[i], "start_s"), e = get(rows[i], "end_s");
    if (!s.empty()) m.start_s = parse_double_field(s, "start_s", i + 1);
    if (!e.empty()) m.end_s = parse_double_field(e, "end_s", i + 1);
    if (m.id.empty() || m.path.empty()) {
      throw ValidationError("manifest line " + std::to_string(i + 1) + ": id and path are required");
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ManifestRow> parse_manifest_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest: " + path);
  std::vector<ManifestRow> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    ManifestRow m;
    if (!j.contains("id") || !j.contains("path")) {
      throw ValidationError("manifest line " + std::to_string(line_no) + ": id and path are required");
    }
    m.id = j["id"].get<std::string>();
    m.path = j["path"].get<std::string>();
    if (j.contains("source_id") && !j["source_id"].is_null()) {
      m.source_id = j["source_id"].get<std::string>();
    }
    if (j.contains("speaker_id") && !j["speaker_id"].is_null()) {
      m.speaker_id = j["speaker_id"].get<std::string>();
    }
    if (j.contains("start_s") && !j["start_s"].is_null()) m.start_s = j["start_s"].get<double>();
    if (j.contains("end_s") && !j["end_s"].is_null()) m.end_s = j["end_s"].get<double>();
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

std::vector<ManifestRow> parse_manifest(const std::string& path) {
  return ends_with(path, ".csv") ? parse_manifest_csv(path) : parse_manifest_jsonl(path);
}

void write_manifest(const std::vector<ManifestRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  for (const auto& m : rows) {
    json j;
    j["id"] = m.id;
    j["path"] = m.path;
    if (!m.source_id.empty() && m.source_id != m.id) j["source_id"] = m.source_id;
    if (!m.speaker_id.empty()) j["speaker_id"] = m.speaker_id;
    if (m.start_s) j["start_s"] = *m.start_s;
    if (m.end_s) j["end_s"] = *m.end_s;
    out << j.dump() << "\n";
  }
}

CorpusSnapshot ingest_manifest(const std::string& manifest_path, const IngestOptions& opts) {
  if (opts.target_rate <= 0) throw ValidationError("working sample rate must be positive");
  const auto rows = parse_manifest(manifest_path);

  std::set<std::string> seen;
  for (const auto& r : rows) {
    if (!seen.insert(r.id).second) {
      throw ValidationError("duplicate utterance id in manifest: " + r.id);
    }
  }

  std::vector<Utterance> utts(rows.size());
  std::vector<std::string> errors(rows.size());
  parallel_for(static_cast<int64_t>(rows.size()), opts.jobs, [&](int64_t i) {
    const ManifestRow& r = rows[static_cast<size_t>(i)];
    try {
      Samples audio = read_audio(r.path, opts.target_rate);
      const double file_dur = static_cast<double>(audio.size()) / opts.target_rate;
      Utterance u;
      u.id = r.id;
      u.source_id = r.source_id.empty() ? r.id : r.source_id;
      u.source_path = r.path;
      u.speaker_id = r.speaker_id;
      u.start_s = r.start_s.value_or(0.0);
      u.end_s = r.end_s.value_or(file_dur);
      if (u.end_s > file_dur + 1e-6) {
        throw DataError("extent end " + std::to_string(u.end_s) + "s past end of file (" +
                        std::to_string(file_dur) + "s)");
      }
      u.duration_s = u.end_s - u.start_s;
      if (u.duration_s <= 0) throw DataError("non-positive extent duration");
      u.sample_rate = opts.target_rate;
      u.channel_count = 1;
      utts[static_cast<size_t>(i)] = std::move(u);
    } catch (const std::exception& e) {
      errors[static_cast<size_t>(i)] = std::string("row ") + std::to_string(i + 1) + " (id " +
                                       r.id + "): " + e.what();
    }
  });

  size_t failed = 0;
  std::string detail;
  for (const auto& e : errors) {
    if (e.empty()) continue;
    ++failed;
    if (failed <= 10) detail += "\n  " + e;
  }
  if (failed > 0 &&
      static_cast<double>(failed) > opts.max_error_rate * static_cast<double>(rows.size())) {
    throw DataError("ingest failed for " + std::to_string(failed) + "/" +
                    std::to_string(rows.size()) + " rows:" + detail);
  }

  CorpusSnapshot snap;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (errors[i].empty()) snap.utterances.push_back(std::move(utts[i]));
  }
  return snap;
}

void save_snapshot(const CorpusSnapshot& snapshot, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write snapshot: " + path);
  json header;
  header["schema_version"] = 1;
  header["name"] = snapshot.name;
  header["coverage"] = json::object();
  for (const auto& [k, v] : snapshot.coverage) header["coverage"][k] = v;
  out << header.dump() << "\n";
  for (const auto& u : snapshot.utterances) {
    json j;
    j["id"] = u.id;
    j["source_id"] = u.source_id;
    j["source_path"] = u.source_path;
    if (!u.speaker_id.empty()) j["speaker_id"] = u.speaker_id;
    j["start_s"] = u.start_s;
    j["end_s"] = u.end_s;
    j["duration_s"] = u.duration_s;
    j["sample_rate"] = u.sample_rate;
    j["channel_count"] = u.channel_count;
    j["metrics"] = json::object();
    for (MetricKind kind : all_metric_kinds()) {
      if (u.metrics.count(kind)) j["metrics"][metric_name(kind)] = u.metrics.at(kind);
    }
    out << j.dump() << "\n";
  }
}

CorpusSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open snapshot: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty snapshot file: " + path);
  CorpusSnapshot snap;
  try {
    json header = json::parse(line);
    if (header.value("schema_version", 0) != 1) {
      throw ValidationError("unsupported snapshot schema_version in " + path);
    }
    snap.name = header.value("name", "");
    if (header.contains("coverage")) {
      for (auto& [k, v] : header["coverage"].items()) snap.coverage[k] = v.get<double>();
    }
    size_t line_no = 1;
    std::set<std::string> seen_ids;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j = json::parse(line);
      Utterance u;
      u.id = j["id"].get<std::string>();
      if (!seen_ids.insert(u.id).second) {
        throw ValidationError("duplicate utterance id '" + u.id + "' at line " +
                              std::to_string(line_no) + " in " + path);
      }
      u.source_id = j["source_id"].get<std::string>();
      u.source_path = j.value("source_path", "");
      u.speaker_id = j.value("speaker_id", "");
      u.start_s = j["start_s"].get<double>();
      u.end_s = j["end_s"].get<double>();
      u.duration_s = j["duration_s"].get<double>();
      u.sample_rate = j["sample_rate"].get<int>();
      u.channel_count = j["channel_count"].get<int>();
      if (j.contains("metrics")) {
        for (auto& [k, v] : j["metrics"].items()) {
          auto kind = metric_from_name(k);
          if (!kind) throw ValidationError("unknown metric '" + k + "' at line " + std::to_string(line_no));
          u.metrics[*kind] = v.get<double>();
        }
      }
      snap.utterances.push_back(std::move(u));
    }
  } catch (const json::exception& e) {
    throw ValidationError("snapshot parse error in " + path + ": " + e.what());
  }
  return snap;
}

Samples AudioCache::slice(const Utterance& utt) {
  const Samples& file = full(utt.source_path);
  const auto n = static_cast<int64_t>(file.size());
  int64_t a = std::llround(utt.start_s * target_rate_);
  int64_t b = std::llround(utt.end_s * target_rate_);
  a = std::clamp<int64_t>(a, 0, n);
  b = std::clamp<int64_t>(b, a, n);
  return Samples(file.begin() + a, file.begin() + b);
}

const Samples& AudioCache::full(const std::string& path) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = files_.find(path);
    if (it != files_.end()) return it->second;
  }
  Samples audio = read_audio(path, target_rate_);
  std::lock_guard<std::mutex> lock(mu_);
  return files_.emplace(path, std::move(audio)).first->second;
}

}  // namespace pipescore
