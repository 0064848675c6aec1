#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pipescore/commands.hpp"
#include "pipescore/errors.hpp"
#include "pipescore/runconfig.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int jobs = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Run configuration JSON");
  cmd->add_option("--out", flags.out_dir, "Output directory (overrides config)");
  cmd->add_option("--seed", flags.seed, "Random seed (overrides config)");
  cmd->add_option("--jobs", flags.jobs, "Worker count; 0 = all cores, 1 = serial")
      ->envname("PIPESCORE_JOBS");
}

pipescore::RunConfig resolve(const CommonFlags& flags) {
  pipescore::RunConfig cfg;
  if (!flags.config_path.empty()) cfg = pipescore::load_run_config(flags.config_path);
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.seed >= 0) {
    cfg.seed = static_cast<uint64_t>(flags.seed);
    cfg.tpe_run.tpe.seed = cfg.seed;
  }
  if (flags.jobs >= 0) cfg.jobs = flags.jobs;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pipescore: metric-driven evaluation of audio preprocessing pipelines"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string scores_csv;
  int synth_sources = -1;

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  add_common(synth, flags);
  synth->add_option("--sources", synth_sources, "Number of synthetic sources");

  CLI::App* ingest = app.add_subcommand("ingest", "Ingest a manifest into a snapshot file");
  add_common(ingest, flags);

  CLI::App* segment = app.add_subcommand("segment", "Tune VAD per speech-rate class and segment");
  add_common(segment, flags);

  CLI::App* metrics = app.add_subcommand("metrics", "Compute native per-utterance metrics");
  add_common(metrics, flags);

  CLI::App* attach = app.add_subcommand("attach", "Merge sidecar metrics into snapshots");
  add_common(attach, flags);

  CLI::App* sweep = app.add_subcommand("sweep", "Score and rank the configuration grid");
  add_common(sweep, flags);

  CLI::App* rank = app.add_subcommand("rank", "Rank a config,dr,sq,ap,sd CSV");
  add_common(rank, flags);
  rank->add_option("--scores", scores_csv, "Input scores CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    pipescore::RunConfig cfg = resolve(flags);
    if (synth->parsed()) {
      if (synth_sources > 0) cfg.synth.n_sources = synth_sources;
      pipescore::cmd_synth(cfg);
    } else if (ingest->parsed()) {
      pipescore::cmd_ingest(cfg);
    } else if (segment->parsed()) {
      pipescore::cmd_segment(cfg);
    } else if (metrics->parsed()) {
      pipescore::cmd_metrics(cfg);
    } else if (attach->parsed()) {
      pipescore::cmd_attach(cfg);
    } else if (sweep->parsed()) {
      pipescore::cmd_sweep(cfg);
    } else if (rank->parsed()) {
      pipescore::cmd_rank(cfg, scores_csv);
    }
  } catch (const pipescore::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
