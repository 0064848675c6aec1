#include "pipescore/runconfig.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "pipescore/errors.hpp"

namespace pipescore {

namespace {

using json = nlohmann::ordered_json;

MetricKind parse_metric(const std::string& name, const std::string& where) {
  auto kind = metric_from_name(name);
  if (!kind) throw ValidationError("unknown metric '" + name + "' in " + where);
  return *kind;
}

}  // namespace

std::string RunConfig::segmented_manifest(const std::string& enhancement) const {
  auto it = manifests.find(enhancement);
  if (it != manifests.end()) return it->second;
  return out_dir + "/segmented/manifest_" + enhancement + ".jsonl";
}

std::string RunConfig::snapshot_path(const std::string& enhancement) const {
  return out_dir + "/snapshots/" + enhancement + ".jsonl";
}

std::string RunConfig::native_dir(const std::string& enhancement) const {
  return out_dir + "/native/" + enhancement;
}

std::string RunConfig::reports_dir() const { return out_dir + "/reports"; }

std::vector<std::string> RunConfig::enhancement_names() const {
  std::set<std::string> names{"none"};
  for (const auto& [name, dir] : variant_dirs) names.insert(name);
  return {names.begin(), names.end()};
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open run config: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("run config parse error in " + path + ": " + e.what());
  }

  RunConfig cfg;
  try {
    cfg.sample_rate = j.value("sample_rate", cfg.sample_rate);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.raw_manifest = j.value("raw_manifest", "");
    cfg.timestamps = j.value("timestamps", "");
    if (j.contains("variant_dirs")) {
      for (auto& [k, v] : j["variant_dirs"].items()) cfg.variant_dirs[k] = v.get<std::string>();
    }
    if (j.contains("manifests")) {
      for (auto& [k, v] : j["manifests"].items()) cfg.manifests[k] = v.get<std::string>();
    }
    if (j.contains("attach")) {
      for (const auto& e : j["attach"]) {
        AttachEntry entry;
        entry.enhancement = e.value("enhancement", "none");
        entry.metric = parse_metric(e.at("metric").get<std::string>(), "attach");
        entry.path = e.at("path").get<std::string>();
        const std::string join = e.value("join", "id");
        if (join == "id") {
          entry.join = MergeJoin::Id;
        } else if (join == "source") {
          entry.join = MergeJoin::Source;
        } else {
          throw ValidationError("attach join must be 'id' or 'source', got '" + join + "'");
        }
        const std::string policy = e.value("policy", "strict");
        if (policy == "strict") {
          entry.policy = MergePolicy::Strict;
        } else if (policy == "partial") {
          entry.policy = MergePolicy::Partial;
        } else {
          throw ValidationError("attach policy must be 'strict' or 'partial', got '" + policy + "'");
        }
        cfg.attach.push_back(std::move(entry));
      }
    }
    if (j.contains("filters")) {
      for (const auto& f : j["filters"]) {
        const MetricKind kind = parse_metric(f.at("metric").get<std::string>(), "filters");
        std::vector<double> thresholds = f.at("thresholds").get<std::vector<double>>();
        cfg.filters.emplace_back(kind, std::move(thresholds));
      }
    }
    if (j.contains("weights")) {
      const auto& w = j["weights"];
      cfg.weights.dr = w.value("dr", 1.0);
      cfg.weights.sq = w.value("sq", 1.0);
      cfg.weights.ap = w.value("ap", 1.0);
      cfg.weights.sd = w.value("sd", 1.0);
      if (cfg.weights.dr < 0 || cfg.weights.sq < 0 || cfg.weights.ap < 0 || cfg.weights.sd < 0) {
        throw ValidationError("weights must be non-negative");
      }
    }
    cfg.mcd_reference_db = j.value("mcd_reference_db", 5.0);
    if (j.contains("length_target")) {
      const auto& t = j["length_target"];
      cfg.length_target.mean_s = t.value("mean_s", cfg.length_target.mean_s);
      cfg.length_target.std_s = t.value("std_s", cfg.length_target.std_s);
      cfg.length_target.max_gap_s = t.value("max_gap_s", cfg.length_target.max_gap_s);
      cfg.length_target.hard_max_s = t.value("hard_max_s", cfg.length_target.hard_max_s);
      cfg.length_target.min_utt_s = t.value("min_utt_s", cfg.length_target.min_utt_s);
    }
    if (j.contains("rate_bounds")) {
      cfg.rate_bounds.slow_max = j["rate_bounds"].value("slow_max", cfg.rate_bounds.slow_max);
      cfg.rate_bounds.fast_min = j["rate_bounds"].value("fast_min", cfg.rate_bounds.fast_min);
    }
    if (j.contains("tpe")) {
      const auto& t = j["tpe"];
      cfg.tpe_run.tpe.gamma = t.value("gamma", cfg.tpe_run.tpe.gamma);
      cfg.tpe_run.tpe.n_startup = t.value("n_startup", cfg.tpe_run.tpe.n_startup);
      cfg.tpe_run.tpe.n_candidates = t.value("n_candidates", cfg.tpe_run.tpe.n_candidates);
      cfg.tpe_run.budget = t.value("budget", cfg.tpe_run.budget);
    }
    cfg.tpe_run.tpe.seed = cfg.seed;
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      cfg.synth.n_sources = s.value("n_sources", cfg.synth.n_sources);
      cfg.synth.burst_s = s.value("burst_s", cfg.synth.burst_s);
      if (s.contains("variants")) {
        for (const auto& v : s["variants"]) {
          SynthVariant sv;
          sv.name = v.at("name").get<std::string>();
          sv.snr_boost_db = v.value("snr_boost_db", sv.snr_boost_db);
          sv.t60_scale = v.value("t60_scale", sv.t60_scale);
          cfg.synth.variants.push_back(std::move(sv));
        }
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError("run config field error in " + path + ": " + e.what());
  }
  return cfg;
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  json j;
  j["sample_rate"] = cfg.sample_rate;
  j["out_dir"] = cfg.out_dir;
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  if (!cfg.raw_manifest.empty()) j["raw_manifest"] = cfg.raw_manifest;
  if (!cfg.timestamps.empty()) j["timestamps"] = cfg.timestamps;
  if (!cfg.variant_dirs.empty()) {
    j["variant_dirs"] = json::object();
    for (const auto& [k, v] : cfg.variant_dirs) j["variant_dirs"][k] = v;
  }
  if (!cfg.manifests.empty()) {
    j["manifests"] = json::object();
    for (const auto& [k, v] : cfg.manifests) j["manifests"][k] = v;
  }
  if (!cfg.attach.empty()) {
    j["attach"] = json::array();
    for (const auto& e : cfg.attach) {
      j["attach"].push_back({{"enhancement", e.enhancement},
                             {"metric", metric_name(e.metric)},
                             {"path", e.path},
                             {"join", e.join == MergeJoin::Id ? "id" : "source"},
                             {"policy", e.policy == MergePolicy::Strict ? "strict" : "partial"}});
    }
  }
  if (!cfg.filters.empty()) {
    j["filters"] = json::array();
    for (const auto& [metric, thresholds] : cfg.filters) {
      j["filters"].push_back({{"metric", metric_name(metric)}, {"thresholds", thresholds}});
    }
  }
  j["weights"] = {{"dr", cfg.weights.dr},
                  {"sq", cfg.weights.sq},
                  {"ap", cfg.weights.ap},
                  {"sd", cfg.weights.sd}};
  j["mcd_reference_db"] = cfg.mcd_reference_db;
  j["length_target"] = {{"mean_s", cfg.length_target.mean_s},
                        {"std_s", cfg.length_target.std_s},
                        {"max_gap_s", cfg.length_target.max_gap_s},
                        {"hard_max_s", cfg.length_target.hard_max_s},
                        {"min_utt_s", cfg.length_target.min_utt_s}};
  j["rate_bounds"] = {{"slow_max", cfg.rate_bounds.slow_max},
                      {"fast_min", cfg.rate_bounds.fast_min}};
  j["tpe"] = {{"gamma", cfg.tpe_run.tpe.gamma},
              {"n_startup", cfg.tpe_run.tpe.n_startup},
              {"n_candidates", cfg.tpe_run.tpe.n_candidates},
              {"budget", cfg.tpe_run.budget}};
  if (cfg.synth.n_sources > 0) {
    j["synth"] = {{"n_sources", cfg.synth.n_sources}, {"burst_s", cfg.synth.burst_s}};
    j["synth"]["variants"] = json::array();
    for (const auto& v : cfg.synth.variants) {
      j["synth"]["variants"].push_back(
          {{"name", v.name}, {"snr_boost_db", v.snr_boost_db}, {"t60_scale", v.t60_scale}});
    }
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write run config: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace pipescore
