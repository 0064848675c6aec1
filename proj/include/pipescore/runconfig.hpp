#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pipescore/scoring.hpp"
#include "pipescore/sidecar.hpp"
#include "pipescore/tpe.hpp"
#include "pipescore/types.hpp"
#include "pipescore/vad.hpp"

namespace pipescore {

struct AttachEntry {
  std::string enhancement;  // "none" or a variant name
  MetricKind metric = MetricKind::MosNisqa;
  std::string path;
  MergeJoin join = MergeJoin::Id;
  MergePolicy policy = MergePolicy::Strict;
};

struct SynthVariant {
  std::string name;
  double snr_boost_db = 8.0;
  double t60_scale = 0.5;
};

struct SynthSettings {
  int n_sources = 24;
  double burst_s = 1.8;
  std::vector<SynthVariant> variants;
};

struct TpeRunSettings {
  TpeSettings tpe;
  int budget = 30;
};

// Declarative run configuration; one JSON file drives every subcommand.
// CLI flags (--out, --seed, --jobs) override the corresponding fields.
struct RunConfig {
  int sample_rate = 16000;
  std::string out_dir = "out";
  uint64_t seed = 42;
  int jobs = 0;

  std::string raw_manifest;
  std::string timestamps;                         // optional
  std::map<std::string, std::string> variant_dirs;  // enhancement -> audio dir

  // enhancement -> manifest; defaults to <out>/segmented/manifest_<enh>.jsonl
  std::map<std::string, std::string> manifests;

  std::vector<AttachEntry> attach;
  std::vector<std::pair<MetricKind, std::vector<double>>> filters;
  Weights weights;
  double mcd_reference_db = 5.0;

  LengthTarget length_target;
  RateBounds rate_bounds;
  TpeRunSettings tpe_run;
  SynthSettings synth;

  // Derived paths (under out_dir unless overridden by `manifests`).
  std::string segmented_manifest(const std::string& enhancement) const;
  std::string snapshot_path(const std::string& enhancement) const;
  std::string native_dir(const std::string& enhancement) const;
  std::string reports_dir() const;
  std::vector<std::string> enhancement_names() const;  // "none" + variants, sorted
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

}  // namespace pipescore
