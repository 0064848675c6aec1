#include "pipescore/sidecar.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "pipescore/csvio.hpp"
#include "pipescore/errors.hpp"

namespace pipescore {

namespace {

using json = nlohmann::ordered_json;

}  // namespace

SidecarTable load_sidecar(const std::string& path, MetricKind metric) {
  const auto rows = csv::read_rows(path);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "id" || rows[0][1] != "value") {
    throw ValidationError("sidecar must be CSV with an 'id,value' header: " + path);
  }
  const MetricInfo& info = metric_info(metric);
  SidecarTable table;
  table.metric = metric;
  std::vector<std::string> bad;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto line_no = std::to_string(i + 1);
    if (rows[i].size() < 2 || rows[i][0].empty()) {
      bad.push_back("line " + line_no + ": malformed row");
      continue;
    }
    double value = 0.0;
    try {
      size_t pos = 0;
      value = std::stod(rows[i][1], &pos);
      if (pos != rows[i][1].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      bad.push_back("line " + line_no + ": unparseable value '" + rows[i][1] + "'");
      continue;
    }
    if (!std::isfinite(value)) {
      bad.push_back("line " + line_no + ": non-finite value");
      continue;
    }
    if (value < info.min_value || value > info.max_value) {
      bad.push_back("line " + line_no + ": " + std::string(info.name) + " value " + rows[i][1] +
                    " outside [" + std::to_string(info.min_value) + ", " +
                    std::to_string(info.max_value) + "]");
      continue;
    }
    if (table.rows.count(rows[i][0])) {
      throw ValidationError("duplicate id '" + rows[i][0] + "' in sidecar " + path);
    }
    table.rows[rows[i][0]] = value;
  }
  if (!bad.empty()) {
    std::string msg = "sidecar " + path + " has " + std::to_string(bad.size()) + " bad rows:";
    for (size_t i = 0; i < bad.size() && i < 10; ++i) msg += "\n  " + bad[i];
    throw ValidationError(msg);
  }
  return table;
}

void save_sidecar(const SidecarTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write sidecar: " + path);
  out << "id,value\n";
  for (const auto& [id, value] : table.rows) {
    out << csv::escape(id) << "," << csv::format_double(value) << "\n";
  }
}

TimestampMap load_timestamps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open timestamps sidecar: " + path);
  TimestampMap map;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError("timestamps line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string id = j.at("id").get<std::string>();
    if (map.count(id)) {
      throw ValidationError("duplicate id '" + id + "' in timestamps " + path);
    }
    std::vector<WordSpan> words;
    double prev_end = -1.0;
    for (const auto& w : j.at("words")) {
      WordSpan span;
      span.word = w.value("w", "");
      span.start_s = w.at("start").get<double>();
      span.end_s = w.at("end").get<double>();
      if (!(span.end_s > span.start_s) || span.start_s < prev_end) {
        throw ValidationError("timestamps line " + std::to_string(line_no) +
                              ": word spans must be ordered and non-overlapping");
      }
      prev_end = span.end_s;
      words.push_back(std::move(span));
    }
    map[id] = std::move(words);
  }
  return map;
}

void save_timestamps(const TimestampMap& words, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write timestamps: " + path);
  for (const auto& [id, spans] : words) {
    json j;
    j["id"] = id;
    j["words"] = json::array();
    for (const auto& s : spans) {
      j["words"].push_back({{"w", s.word}, {"start", s.start_s}, {"end", s.end_s}});
    }
    out << j.dump() << "\n";
  }
}

MergeStats merge(CorpusSnapshot& snapshot, const SidecarTable& table, MergePolicy policy,
                 MergeJoin join) {
  MergeStats stats;
  stats.total = snapshot.utterances.size();
  std::vector<std::string> missing;
  for (auto& u : snapshot.utterances) {
    const std::string& key = (join == MergeJoin::Id) ? u.id : u.source_id;
    auto it = table.rows.find(key);
    if (it == table.rows.end()) {
      missing.push_back(u.id);
      continue;
    }
    if (u.metrics.count(table.metric) && u.metrics.at(table.metric) != it->second) {
      stats.replaced_ids.push_back(u.id);
    }
    u.metrics[table.metric] = it->second;
    ++stats.matched;
  }
  stats.coverage = stats.total == 0 ? 1.0
                                    : static_cast<double>(stats.matched) /
                                          static_cast<double>(stats.total);
  if (policy == MergePolicy::Strict && !missing.empty()) {
    std::string msg = std::string("strict merge of ") + metric_name(table.metric) + " missing " +
                      std::to_string(missing.size()) + "/" + std::to_string(stats.total) +
                      " utterances:";
    for (size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ... (+" + std::to_string(missing.size() - 20) + " more)";
    throw DataError(msg);
  }
  snapshot.coverage[metric_name(table.metric)] = stats.coverage;
  return stats;
}

}  // namespace pipescore
