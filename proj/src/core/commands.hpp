#pragma once

#include "config.hpp"

namespace aftrl {

// Command implementations behind both the C API and the CLI. Each is a pure
// function of (config, input files); progress goes to stderr, machine-readable
// output to files under cfg.out_dir:
//   dataset.txt, normalizer.json
//   pretrain/seed_<s>/agent/..., pretrain/seed_<s>/metrics.csv
//   pool/seed_<s>.pool, pool/seed_<s>_fitness.csv
//   finetune/<tag>/seed_<s>/agent/..., metrics.csv, q_trajectory.csv
//   eval/<tag>/report.json
//   sweep/results.csv, sweep/<cell>/...
void cmd_collect_data(const CliConfig& cfg);
void cmd_pretrain(const CliConfig& cfg);
void cmd_gen_perturb(const CliConfig& cfg);
void cmd_finetune(const CliConfig& cfg);
void cmd_eval(const CliConfig& cfg);
void cmd_sweep(const CliConfig& cfg);

// <perturb mode>_<curriculum mode>, e.g. "adversarial_fixed"
std::string finetune_tag(const CliConfig& cfg);

std::string dataset_path(const CliConfig& cfg);
std::string normalizer_path(const CliConfig& cfg);
std::string pretrain_dir(const CliConfig& cfg, int run_index);
std::string pool_path(const CliConfig& cfg, int run_index);
std::string finetune_dir(const CliConfig& cfg, int run_index);
std::string eval_report_path(const CliConfig& cfg);

}  // namespace aftrl
