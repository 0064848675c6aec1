#pragma once

#include <string>

#include "pipescore/runconfig.hpp"

namespace pipescore {

// Subcommand bodies. They throw ValidationError / DataError; the CLI maps
// those to exit codes 1 / 2. All outputs land under config.out_dir and are
// byte-identical across re-runs on unchanged inputs.

void cmd_synth(const RunConfig& config);
void cmd_ingest(const RunConfig& config);
void cmd_segment(const RunConfig& config);
void cmd_metrics(const RunConfig& config);
void cmd_attach(const RunConfig& config);
void cmd_sweep(const RunConfig& config);
void cmd_rank(const RunConfig& config, const std::string& scores_csv);

}  // namespace pipescore
