#pragma once

#include <map>
#include <string>
#include <vector>

#include "perturb.hpp"
#include "pipeline.hpp"

namespace aftrl {

// Flat key-value config with [section] headers; keys are stored and
// addressed as "section.key". Every documented default is overridable.
class KeyValueConfig {
public:
    void load_file(const std::string& path);
    void parse_text(const std::string& text, const std::string& origin = "<string>");
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    long get_long(const std::string& key, long def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& def) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& def) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// Full CLI-facing configuration: one run's RunConfig plus multi-run, data
// collection, DE and sweep settings.
struct CliConfig {
    RunConfig run;
    int runs = 5;
    std::uint64_t master_seed = 0;
    std::string out_dir = "out";

    // collect-data
    long dataset_size = 100000;
    double collect_noise = 0.1;
    int normalizer_episodes = 1000;

    // gen-perturb
    DeParams de;
    int pool_size = 10;

    // eval
    std::string eval_target = "finetune";  // "pretrain" or "finetune"
    int eval_report_episodes = 100;

    // sweep grids
    std::vector<double> q_max_grid = {0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    std::vector<double> beta_grid = {0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    std::vector<double> eta_grid = {0.3, 0.7, 1.0};
};

PerturbMode parse_perturb_mode(const std::string& s);
CurriculumMode parse_curriculum_mode(const std::string& s);
std::string perturb_mode_name(PerturbMode m);
std::string curriculum_mode_name(CurriculumMode m);

// Builds the CliConfig from parsed key-values; rejects unknown keys.
CliConfig build_cli_config(const KeyValueConfig& kv);

}  // namespace aftrl
