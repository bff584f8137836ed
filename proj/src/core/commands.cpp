#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace aftrl {

namespace fs = std::filesystem;

std::string finetune_tag(const CliConfig& cfg) {
    return perturb_mode_name(cfg.run.perturb_mode) + "_" +
           curriculum_mode_name(cfg.run.curriculum_mode);
}

std::string dataset_path(const CliConfig& cfg) { return cfg.out_dir + "/dataset.txt"; }
std::string normalizer_path(const CliConfig& cfg) { return cfg.out_dir + "/normalizer.json"; }

std::string pretrain_dir(const CliConfig& cfg, int run_index) {
    return cfg.out_dir + "/pretrain/seed_" + std::to_string(run_index);
}

std::string pool_path(const CliConfig& cfg, int run_index) {
    return cfg.out_dir + "/pool/seed_" + std::to_string(run_index) + ".pool";
}

std::string finetune_dir(const CliConfig& cfg, int run_index) {
    return cfg.out_dir + "/finetune/" + finetune_tag(cfg) + "/seed_" + std::to_string(run_index);
}

std::string eval_report_path(const CliConfig& cfg) {
    std::string tag = cfg.eval_target == "pretrain" ? "pretrain" : finetune_tag(cfg);
    return cfg.out_dir + "/eval/" + tag + "/report.json";
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::uint64_t run_seed(const CliConfig& cfg, int run_index) {
    return cfg.master_seed + std::uint64_t(run_index);
}

double rollout_return(const EnvSpec& env, const PolicyFn& policy, Rng& rng) {
    auto [state, obs] = reset(env, rng.next_u64());
    double total = 0.0;
    bool done = false;
    while (!done) {
        StepResult sr = step(env, state, policy(obs));
        total += sr.reward;
        state = std::move(sr.state);
        obs = std::move(sr.obs);
        done = sr.done;
    }
    return total;
}

std::vector<PerturbationVector> load_pool_if_needed(const CliConfig& cfg, int run_index,
                                                    bool required) {
    std::string path = pool_path(cfg, run_index);
    if (!required && !fs::exists(path)) return {};
    if (!fs::exists(path))
        throw ConfigError("perturbation pool not found: " + path +
                          " (run gen-perturb first)");
    return load_pool(path);
}

void write_q_trajectory(const FinetuneResult& res, long eval_interval, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "env_step,q\n";
    for (std::size_t i = 0; i < res.q_trajectory.size(); ++i)
        out << (long(i) + 1) * eval_interval << "," << res.q_trajectory[i] << "\n";
}

}  // namespace

void cmd_collect_data(const CliConfig& cfg) {
    EnvSpec env = env_spec(cfg.run.env_name);
    ensure_dir(cfg.out_dir);

    Rng rng = substream(cfg.master_seed, "collect");
    OfflineDataset ds;
    ds.meta.env = env.name;
    ds.meta.policy_tag = cfg.collect_noise > 0.0 ? "scripted_expert+noise" : "scripted_expert";
    ds.meta.seed = cfg.master_seed;

    std::fprintf(stderr, "[collect-data] env=%s size=%ld noise=%g\n", env.name.c_str(),
                 cfg.dataset_size, cfg.collect_noise);
    while (long(ds.transitions.size()) < cfg.dataset_size) {
        auto [state, obs] = reset(env, rng.next_u64());
        bool done = false;
        while (!done && long(ds.transitions.size()) < cfg.dataset_size) {
            Vec a = scripted_expert(env, obs);
            if (cfg.collect_noise > 0.0)
                for (double& ai : a) ai = clip(ai + rng.normal(0.0, cfg.collect_noise), -1.0, 1.0);
            StepResult sr = step(env, state, a);
            ds.transitions.push_back({obs, a, sr.reward, sr.obs, sr.failed});
            state = std::move(sr.state);
            obs = std::move(sr.obs);
            done = sr.done;
        }
    }
    ds.meta.count = ds.transitions.size();
    save_dataset(ds, dataset_path(cfg));

    // Normalizer references are computed locally: mean return of a uniform
    // random policy and of the scripted expert.
    Rng rnd_rng = substream(cfg.master_seed, "normalizer_random");
    Rng exp_rng = substream(cfg.master_seed, "normalizer_expert");
    double random_ref = 0.0, expert_ref = 0.0;
    PolicyFn random_policy = [&](const Vec&) {
        return rnd_rng.uniform_vec(std::size_t(env.action_dim), -1.0, 1.0);
    };
    PolicyFn expert_policy = [&](const Vec& obs) { return scripted_expert(env, obs); };
    for (int e = 0; e < cfg.normalizer_episodes; ++e) {
        random_ref += rollout_return(env, random_policy, rnd_rng);
        expert_ref += rollout_return(env, expert_policy, exp_rng);
    }
    random_ref /= double(cfg.normalizer_episodes);
    expert_ref /= double(cfg.normalizer_episodes);
    save_normalizer({env.name, random_ref, expert_ref}, normalizer_path(cfg));
    std::fprintf(stderr, "[collect-data] wrote %zu transitions; refs random=%.2f expert=%.2f\n",
                 ds.transitions.size(), random_ref, expert_ref);
}

void cmd_pretrain(const CliConfig& cfg) {
    if (!fs::exists(dataset_path(cfg)))
        throw ConfigError("dataset not found: " + dataset_path(cfg) +
                          " (run collect-data first)");
    OfflineDataset ds = load_dataset(dataset_path(cfg));
    for (int i = 0; i < cfg.runs; ++i) {
        RunConfig rc = cfg.run;
        rc.seed = run_seed(cfg, i);
        std::fprintf(stderr, "[pretrain] run %d/%d seed=%llu steps=%ld\n", i + 1, cfg.runs,
                     (unsigned long long)rc.seed, rc.pretrain_steps);
        std::vector<MetricsRow> metrics;
        AgentState agent = pretrain_offline(ds, rc, &metrics);
        std::string dir = pretrain_dir(cfg, i);
        ensure_dir(dir);
        save_agent(agent, rc.hyper, dir + "/agent");
        write_metrics_csv(metrics, dir + "/metrics.csv");
    }
}

void cmd_gen_perturb(const CliConfig& cfg) {
    EnvSpec env = env_spec(cfg.run.env_name);
    ensure_dir(cfg.out_dir + "/pool");
    for (int i = 0; i < cfg.runs; ++i) {
        std::string agent_dir = pretrain_dir(cfg, i) + "/agent";
        if (!fs::exists(agent_dir + "/manifest.json"))
            throw ConfigError("pretrained checkpoint not found: " + agent_dir +
                              " (run pretrain first)");
        auto [agent, hyper] = load_agent(agent_dir);
        Rng rng = substream(run_seed(cfg, i), "de");
        std::fprintf(stderr, "[gen-perturb] run %d/%d pool_size=%d pop=%d gens=%d\n", i + 1,
                     cfg.runs, cfg.pool_size, cfg.de.population_size, cfg.de.generations);
        AdversarialSet set =
            generate_adversarial_set(actor_policy(agent.actor), env, cfg.run.epsilon, cfg.de,
                                     cfg.pool_size, rng);
        save_pool(set.pool, cfg.run.epsilon, pool_path(cfg, i));

        std::string log_path = cfg.out_dir + "/pool/seed_" + std::to_string(i) + "_fitness.csv";
        std::ofstream log(log_path);
        if (!log) throw IoError("cannot open for writing: " + log_path);
        log << "pool_index,generation,best_fitness\n";
        for (std::size_t k = 0; k < set.fitness_logs.size(); ++k)
            for (std::size_t g = 0; g < set.fitness_logs[k].size(); ++g)
                log << k << "," << g << "," << set.fitness_logs[k][g] << "\n";
    }
}

void cmd_finetune(const CliConfig& cfg) {
    OfflineDataset ds = load_dataset(dataset_path(cfg));
    ScoreNormalizer nz = load_normalizer(normalizer_path(cfg));
    if (nz.env != cfg.run.env_name)
        throw ConfigError("normalizer env mismatch: " + nz.env + " vs " + cfg.run.env_name);
    for (int i = 0; i < cfg.runs; ++i) {
        std::string agent_dir = pretrain_dir(cfg, i) + "/agent";
        if (!fs::exists(agent_dir + "/manifest.json"))
            throw ConfigError("pretrained checkpoint not found: " + agent_dir +
                              " (run pretrain first)");
        auto [agent, hyper] = load_agent(agent_dir);
        auto pool = load_pool_if_needed(cfg, i,
                                        cfg.run.perturb_mode == PerturbMode::Adversarial);
        RunConfig rc = cfg.run;
        rc.seed = run_seed(cfg, i);
        // the run config governs fine-tuning; the checkpoint's stored learning
        // rates only describe how the agent was pretrained
        agent.actor_opt.lr = rc.hyper.actor_lr;
        agent.critic1_opt.lr = rc.hyper.critic_lr;
        agent.critic2_opt.lr = rc.hyper.critic_lr;
        std::fprintf(stderr, "[finetune] run %d/%d tag=%s steps=%ld\n", i + 1, cfg.runs,
                     finetune_tag(cfg).c_str(), rc.finetune_steps);
        FinetuneResult res;
        if (rc.curriculum_mode == CurriculumMode::Fixed)
            res = finetune_fixed(agent, rc, ds, pool, nz);
        else
            res = finetune_curriculum(agent, rc, ds, pool, nz);
        std::string dir = finetune_dir(cfg, i);
        ensure_dir(dir);
        save_agent(agent, rc.hyper, dir + "/agent");
        write_metrics_csv(res.metrics, dir + "/metrics.csv");
        write_q_trajectory(res, rc.eval_interval, dir + "/q_trajectory.csv");
    }
}

namespace {

nlohmann::json condition_json(const std::vector<double>& per_run) {
    double mean = 0.0;
    for (double v : per_run) mean += v;
    mean /= double(per_run.size());
    double var = 0.0;
    for (double v : per_run) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / double(per_run.size()));
    return {{"per_run", per_run}, {"mean", mean}, {"std", sd}};
}

struct EvalAggregate {
    std::vector<double> normal, random, adversarial;

    void add(const EvalReport& rep) {
        normal.push_back(rep.normal.mean_normalized);
        random.push_back(rep.random.mean_normalized);
        adversarial.push_back(rep.adversarial.mean_normalized);
    }

    nlohmann::json to_json() const {
        return {{"normal", condition_json(normal)},
                {"random", condition_json(random)},
                {"adversarial", condition_json(adversarial)}};
    }
};

EvalReport eval_one(const CliConfig& cfg, const AgentState& agent,
                    const std::vector<PerturbationVector>& pool, const ScoreNormalizer& nz,
                    int run_index) {
    EnvSpec env = env_spec(cfg.run.env_name);
    Rng rng = substream(run_seed(cfg, run_index), "robustness_eval");
    return robustness_eval(agent, env, pool, nz, cfg.run.epsilon, rng, cfg.eval_report_episodes);
}

}  // namespace

void cmd_eval(const CliConfig& cfg) {
    ScoreNormalizer nz = load_normalizer(normalizer_path(cfg));
    EvalAggregate agg;
    for (int i = 0; i < cfg.runs; ++i) {
        std::string agent_dir = (cfg.eval_target == "pretrain" ? pretrain_dir(cfg, i)
                                                               : finetune_dir(cfg, i)) +
                                "/agent";
        if (!fs::exists(agent_dir + "/manifest.json"))
            throw ConfigError("checkpoint not found: " + agent_dir);
        auto [agent, hyper] = load_agent(agent_dir);
        auto pool = load_pool_if_needed(cfg, i, true);
        std::fprintf(stderr, "[eval] run %d/%d target=%s\n", i + 1, cfg.runs,
                     cfg.eval_target.c_str());
        agg.add(eval_one(cfg, agent, pool, nz, i));
    }
    std::string path = eval_report_path(cfg);
    ensure_dir(fs::path(path).parent_path().string());
    nlohmann::json report = {{"format", "aftrl-report-v1"},
                             {"env", cfg.run.env_name},
                             {"target", cfg.eval_target == "pretrain" ? "pretrain"
                                                                      : finetune_tag(cfg)},
                             {"episodes", cfg.eval_report_episodes},
                             {"runs", cfg.runs},
                             {"conditions", agg.to_json()}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << report.dump(2) << "\n";
    std::fprintf(stderr, "[eval] wrote %s\n", path.c_str());
}

void cmd_sweep(const CliConfig& cfg) {
    if (cfg.run.curriculum_mode == CurriculumMode::Fixed)
        throw ConfigError("sweep requires curriculum.mode = linear or adaptive");
    OfflineDataset ds = load_dataset(dataset_path(cfg));
    ScoreNormalizer nz = load_normalizer(normalizer_path(cfg));

    struct Cell {
        double q_max = 0.0, beta = 0.0, eta = 0.0;
        std::string tag;
    };
    std::vector<Cell> cells;
    bool linear = cfg.run.curriculum_mode == CurriculumMode::Linear;
    if (linear) {
        for (double qm : cfg.q_max_grid) {
            Cell c;
            c.q_max = qm;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "qmax_%g", qm);
            c.tag = buf;
            cells.push_back(c);
        }
    } else {
        for (double b : cfg.beta_grid)
            for (double e : cfg.eta_grid) {
                Cell c;
                c.beta = b;
                c.eta = e;
                char buf[64];
                std::snprintf(buf, sizeof(buf), "beta_%g_eta_%g", b, e);
                c.tag = buf;
                cells.push_back(c);
            }
    }

    std::string sweep_dir = cfg.out_dir + "/sweep";
    ensure_dir(sweep_dir);
    std::ofstream results(sweep_dir + "/results.csv");
    if (!results) throw IoError("cannot open for writing: " + sweep_dir + "/results.csv");
    results << (linear ? "q_max" : "beta,eta")
            << ",normal_mean,random_mean,adversarial_mean,average\n";

    for (const auto& cell : cells) {
        CliConfig cc = cfg;
        if (linear)
            cc.run.q_max = cell.q_max;
        else {
            cc.run.beta = cell.beta;
            cc.run.eta = cell.eta;
        }
        std::string cell_dir = sweep_dir + "/" + cell.tag;
        ensure_dir(cell_dir);
        EvalAggregate agg;
        for (int i = 0; i < cfg.runs; ++i) {
            std::string agent_dir = pretrain_dir(cfg, i) + "/agent";
            if (!fs::exists(agent_dir + "/manifest.json"))
                throw ConfigError("pretrained checkpoint not found: " + agent_dir);
            auto [agent, hyper] = load_agent(agent_dir);
            auto pool = load_pool_if_needed(cfg, i, true);
            RunConfig rc = cc.run;
            rc.seed = run_seed(cfg, i);
            agent.actor_opt.lr = rc.hyper.actor_lr;
            agent.critic1_opt.lr = rc.hyper.critic_lr;
            agent.critic2_opt.lr = rc.hyper.critic_lr;
            std::fprintf(stderr, "[sweep] cell=%s run %d/%d\n", cell.tag.c_str(), i + 1,
                         cfg.runs);
            FinetuneResult res = finetune_curriculum(agent, rc, ds, pool, nz);
            write_metrics_csv(res.metrics,
                              cell_dir + "/seed_" + std::to_string(i) + "_metrics.csv");
            write_q_trajectory(res, rc.eval_interval,
                               cell_dir + "/seed_" + std::to_string(i) + "_q_trajectory.csv");
            agg.add(eval_one(cc, agent, pool, nz, i));
        }
        nlohmann::json cj = agg.to_json();
        double nm = cj["normal"]["mean"], rm = cj["random"]["mean"],
               am = cj["adversarial"]["mean"];
        double avg = (nm + rm + am) / 3.0;
        char buf[256];
        if (linear)
            std::snprintf(buf, sizeof(buf), "%g,%.6f,%.6f,%.6f,%.6f\n", cell.q_max, nm, rm, am,
                          avg);
        else
            std::snprintf(buf, sizeof(buf), "%g,%g,%.6f,%.6f,%.6f,%.6f\n", cell.beta, cell.eta,
                          nm, rm, am, avg);
        results << buf;
        results.flush();

        std::ofstream cj_out(cell_dir + "/report.json");
        cj_out << nlohmann::json({{"cell", cell.tag}, {"conditions", cj}, {"average", avg}})
                      .dump(2)
               << "\n";
    }
    std::fprintf(stderr, "[sweep] wrote %s/results.csv\n", sweep_dir.c_str());
}

}  // namespace aftrl
