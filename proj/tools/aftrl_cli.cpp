// Command-line front end. Links only against the public C API so it doubles
// as a smoke test for the shared library surface.
#include <cstdio>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aftrl.h"

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::int64_t seed = -1;
    int runs = -1;
    std::string out_dir;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "Config file (INI-style sections)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Master seed (runs use seed, seed+1, ...)");
    sub->add_option("--runs", opts.runs, "Number of independent runs");
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--set", opts.overrides, "Extra overrides as section.key=value")
        ->type_name("KEY=VALUE");
}

int apply_common(aftrl_config* cfg, const CommonOpts& opts) {
    int rc = 0;
    if (!opts.config_path.empty() && (rc = aftrl_config_load(cfg, opts.config_path.c_str())))
        return rc;
    if (opts.seed >= 0 &&
        (rc = aftrl_config_set(cfg, "run.seed", std::to_string(opts.seed).c_str())))
        return rc;
    if (opts.runs >= 0 &&
        (rc = aftrl_config_set(cfg, "run.runs", std::to_string(opts.runs).c_str())))
        return rc;
    if (!opts.out_dir.empty() && (rc = aftrl_config_set(cfg, "run.out_dir", opts.out_dir.c_str())))
        return rc;
    for (const auto& kv : opts.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
            return 2;
        }
        if ((rc = aftrl_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())))
            return rc;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offline-to-online RL with adversarial action perturbations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(aftrl_version()));

    struct Cmd {
        const char* name;
        const char* help;
        int (*fn)(const aftrl_config*);
        CommonOpts opts;
    };
    std::vector<Cmd> cmds = {
        {"collect-data", "Roll out the scripted expert and write the offline dataset",
         aftrl_cmd_collect_data, {}},
        {"pretrain", "Offline pretraining (TD3+BC) on the collected dataset",
         aftrl_cmd_pretrain, {}},
        {"gen-perturb", "Search adversarial perturbation vectors against the pretrained policy",
         aftrl_cmd_gen_perturb, {}},
        {"finetune", "Online fine-tuning under the configured perturbation curriculum",
         aftrl_cmd_finetune, {}},
        {"eval", "Robustness evaluation report (normal / random / adversarial)",
         aftrl_cmd_eval, {}},
        {"sweep", "Curriculum hyperparameter sweep over the configured grid",
         aftrl_cmd_sweep, {}},
    };
    for (auto& c : cmds) add_common(app.add_subcommand(c.name, c.help), c.opts);

    CLI11_PARSE(app, argc, argv);

    for (auto& c : cmds) {
        if (!app.got_subcommand(c.name)) continue;
        std::unique_ptr<aftrl_config, void (*)(aftrl_config*)> cfg(aftrl_config_new(),
                                                                   aftrl_config_free);
        if (!cfg) {
            std::fprintf(stderr, "error: out of memory\n");
            return 4;
        }
        int rc = apply_common(cfg.get(), c.opts);
        if (rc == 0) rc = c.fn(cfg.get());
        if (rc != 0) {
            const char* msg = aftrl_last_error();
            if (msg && *msg) std::fprintf(stderr, "error: %s\n", msg);
        }
        return rc;
    }
    return 2;
}
