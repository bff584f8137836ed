#include "pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace aftrl {

double normalize(double raw_return, const ScoreNormalizer& nz) {
    if (!(nz.expert_ref > nz.random_ref))
        throw ConfigError("normalizer: expert_ref must exceed random_ref");
    return 100.0 * (raw_return - nz.random_ref) / (nz.expert_ref - nz.random_ref);
}

void save_normalizer(const ScoreNormalizer& nz, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    nlohmann::json j = {{"format", "aftrl-normalizer-v1"},
                        {"env", nz.env},
                        {"random_ref", nz.random_ref},
                        {"expert_ref", nz.expert_ref}};
    out << j.dump(2) << "\n";
}

ScoreNormalizer load_normalizer(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    ScoreNormalizer nz;
    nz.env = j.value("env", "");
    nz.random_ref = j.value("random_ref", 0.0);
    nz.expert_ref = j.value("expert_ref", 1.0);
    if (!(nz.expert_ref > nz.random_ref))
        throw ConfigError(path + ": degenerate normalizer (expert_ref <= random_ref)");
    return nz;
}

void RunConfig::validate() const {
    env_spec(env_name);  // throws on unknown env
    if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
    if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
    if (!(r_off >= 0.0 && r_off <= 1.0)) throw ConfigError("r_off must be in [0,1]");
    if (!(q_init >= 0.0 && q_init <= 1.0)) throw ConfigError("q_init must be in [0,1]");
    if (!(q_max >= 0.0 && q_max <= 1.0)) throw ConfigError("q_max must be in [0,1]");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (pretrain_steps < 0 || finetune_steps < 0) throw ConfigError("step budgets must be >= 0");
    hyper.validate();
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "env_step,eval_condition,R_n_raw,R_n_normalized,q,wall_time\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%ld,%s,%.17g,%.17g,%.17g,%.3f\n", r.env_step,
                      r.eval_condition.c_str(), r.r_raw, r.r_normalized, r.q, r.wall_time);
        out << buf;
    }
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* mode_name(PerturbMode m) {
    switch (m) {
        case PerturbMode::Normal: return "normal";
        case PerturbMode::Random: return "random";
        case PerturbMode::Adversarial: return "adversarial";
    }
    return "?";
}

}  // namespace

AgentState pretrain_offline(const OfflineDataset& dataset, const RunConfig& cfg,
                            std::vector<MetricsRow>* metrics) {
    cfg.validate();
    if (dataset.transitions.empty()) throw ConfigError("pretrain: empty dataset");
    EnvSpec env = env_spec(cfg.env_name);
    if (!dataset.meta.env.empty() && dataset.meta.env != cfg.env_name)
        throw ConfigError("pretrain: dataset env '" + dataset.meta.env +
                          "' does not match configured env '" + cfg.env_name + "'");

    Rng init_rng = substream(cfg.seed, "agent_init");
    Rng batch_rng = substream(cfg.seed, "pretrain_batch");
    Rng noise_rng = substream(cfg.seed, "pretrain_noise");
    AgentState agent = make_agent(env.obs_dim, env.action_dim, cfg.hidden, cfg.hyper, init_rng);

    auto t0 = std::chrono::steady_clock::now();
    const auto& data = dataset.transitions;
    for (long step = 0; step < cfg.pretrain_steps; ++step) {
        std::vector<Transition> batch;
        batch.reserve(std::size_t(cfg.hyper.batch_size));
        for (int i = 0; i < cfg.hyper.batch_size; ++i)
            batch.push_back(data[batch_rng.uniform_int(data.size())]);
        critic_update(agent, cfg.hyper, batch, noise_rng);
        actor_update_td3bc(agent, cfg.hyper, batch, cfg.bc_weight);

        if (metrics && ((step + 1) % cfg.eval_interval == 0 || step + 1 == cfg.pretrain_steps)) {
            double bc_mse = 0.0, mean_q = 0.0;
            for (const auto& t : batch) {
                Vec pi = forward(agent.actor, t.s);
                for (std::size_t j = 0; j < pi.size(); ++j)
                    bc_mse += (pi[j] - t.a[j]) * (pi[j] - t.a[j]);
                Vec sa = t.s;
                sa.insert(sa.end(), pi.begin(), pi.end());
                mean_q += forward(agent.critic1, sa)[0];
            }
            bc_mse /= double(batch.size());
            mean_q /= double(batch.size());
            metrics->push_back(
                {step + 1, "pretrain", bc_mse, mean_q, 0.0, seconds_since(t0)});
        }
    }
    return agent;
}

EpisodeOutcome episode_loop(AgentState& agent, const EnvSpec& env, const PerturbationVector& delta,
                            double q, const Td3Hyper& h, ReplayBuffer& buffer, bool train,
                            long warmup, Rng& env_rng, Rng& train_rng) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("episode_loop: q must be in [0,1]");
    EpisodeOutcome out;
    auto [state, obs] = reset(env, env_rng.next_u64());
    bool done = false;
    while (!done) {
        Vec a = select_action(agent, obs, train, h, train_rng);
        bool perturbed = env_rng.bernoulli(q);
        Vec exec = perturbed ? aftrl::apply(a, delta) : a;
        StepResult sr = step(env, state, exec);
        buffer.push({obs, a, sr.reward, sr.obs, sr.failed});
        out.episode_return += sr.reward;
        ++out.steps;
        if (perturbed) ++out.perturbed_steps;
        if (train && buffer.size() >= std::size_t(std::max<long>(warmup, h.batch_size))) {
            auto batch = buffer.sample(std::size_t(h.batch_size), train_rng);
            critic_update(agent, h, batch, train_rng);
            actor_update_td3(agent, h, batch);
        }
        state = std::move(sr.state);
        obs = std::move(sr.obs);
        done = sr.done;
    }
    return out;
}

double policy_evaluation(const AgentState& agent, const EnvSpec& env, double q, PerturbMode mode,
                         const std::vector<PerturbationVector>& pool, int M, double eps,
                         Rng& rng) {
    if (M < 1) throw ConfigError("policy_evaluation: M must be >= 1");
    double total = 0.0;
    for (int m = 0; m < M; ++m) {
        PerturbationVector delta = make_delta(mode, eps, env.action_dim, pool, rng);
        auto [state, obs] = reset(env, rng.next_u64());
        bool done = false;
        while (!done) {
            Vec a = forward(agent.actor, obs);
            if (rng.bernoulli(q)) a = aftrl::apply(a, delta);
            StepResult sr = step(env, state, a);
            total += sr.reward;
            state = std::move(sr.state);
            obs = std::move(sr.obs);
            done = sr.done;
        }
    }
    return total / double(M);
}

EvalReport robustness_eval(const AgentState& agent, const EnvSpec& env,
                           const std::vector<PerturbationVector>& pool,
                           const ScoreNormalizer& nz, double eps, Rng& rng, int episodes) {
    if (pool.empty()) throw ConfigError("robustness_eval: empty perturbation pool");
    auto run_condition = [&](PerturbMode mode) {
        ConditionStats st;
        st.episodes = episodes;
        for (int m = 0; m < episodes; ++m) {
            double raw = policy_evaluation(agent, env, 1.0, mode, pool, 1, eps, rng);
            st.raw_returns.push_back(raw);
        }
        double mean = 0.0;
        for (double r : st.raw_returns) mean += r;
        mean /= double(episodes);
        st.mean_raw = mean;
        st.mean_normalized = normalize(mean, nz);
        double var = 0.0;
        for (double r : st.raw_returns) {
            double d = normalize(r, nz) - st.mean_normalized;
            var += d * d;
        }
        st.std_normalized = std::sqrt(var / double(episodes));
        return st;
    };
    EvalReport rep;
    rep.normal = run_condition(PerturbMode::Normal);
    rep.random = run_condition(PerturbMode::Random);
    rep.adversarial = run_condition(PerturbMode::Adversarial);
    return rep;
}

namespace {

FinetuneResult finetune_impl(AgentState& agent, const RunConfig& cfg,
                             const OfflineDataset& dataset,
                             const std::vector<PerturbationVector>& pool,
                             const ScoreNormalizer& nz, CurriculumState curriculum) {
    cfg.validate();
    if (cfg.perturb_mode == PerturbMode::Adversarial && pool.empty())
        throw ConfigError("finetune: adversarial mode needs a nonempty pool");
    EnvSpec env = env_spec(cfg.env_name);

    ReplayBuffer buffer(cfg.buffer_capacity);
    Rng offline_rng = substream(cfg.seed, "offline_mix");
    init_with_offline(buffer, dataset, cfg.r_off, offline_rng);

    Rng env_rng = substream(cfg.seed, "env");
    Rng train_rng = substream(cfg.seed, "train");
    Rng perturb_rng = substream(cfg.seed, "perturb");
    Rng eval_rng = substream(cfg.seed, "eval");

    FinetuneResult res;
    auto t0 = std::chrono::steady_clock::now();
    long next_eval = cfg.eval_interval;
    while (res.total_steps < cfg.finetune_steps) {
        PerturbationVector delta =
            make_delta(cfg.perturb_mode, cfg.epsilon, env.action_dim, pool, perturb_rng);
        double q = current_q(curriculum);
        EpisodeOutcome ep = episode_loop(agent, env, delta, q, cfg.hyper, buffer, true,
                                         cfg.warmup_steps, env_rng, train_rng);
        res.total_steps += ep.steps;
        res.perturbed_steps += ep.perturbed_steps;

        while (next_eval <= res.total_steps && next_eval <= cfg.finetune_steps) {
            double eval_q = current_q(curriculum);
            double raw = policy_evaluation(agent, env, eval_q, cfg.perturb_mode, pool,
                                           cfg.eval_episodes, cfg.epsilon, eval_rng);
            double norm = normalize(raw, nz);
            res.metrics.push_back({next_eval, mode_name(cfg.perturb_mode), raw, norm, eval_q,
                                   seconds_since(t0)});
            res.q_trajectory.push_back(eval_q);
            // scores feed the adaptive rule divided by 100 so eta is
            // scale-comparable across environments
            if (curriculum.mode == CurriculumMode::Linear)
                update_linear(curriculum);
            else if (curriculum.mode == CurriculumMode::Adaptive)
                update_adaptive(curriculum, norm / 100.0);
            next_eval += cfg.eval_interval;
        }
    }
    return res;
}

}  // namespace

FinetuneResult finetune_fixed(AgentState& agent, const RunConfig& cfg,
                              const OfflineDataset& dataset,
                              const std::vector<PerturbationVector>& pool,
                              const ScoreNormalizer& nz) {
    return finetune_impl(agent, cfg, dataset, pool, nz, make_fixed(cfg.q_init));
}

FinetuneResult finetune_curriculum(AgentState& agent, const RunConfig& cfg,
                                   const OfflineDataset& dataset,
                                   const std::vector<PerturbationVector>& pool,
                                   const ScoreNormalizer& nz) {
    CurriculumState cur;
    long intervals = cfg.eval_interval > 0 ? cfg.finetune_steps / cfg.eval_interval : 0;
    long ramp = cfg.ramp_intervals > 0 ? cfg.ramp_intervals : intervals;
    switch (cfg.curriculum_mode) {
        case CurriculumMode::Linear:
            cur = make_linear(cfg.q_init, cfg.q_max, ramp);
            break;
        case CurriculumMode::Adaptive:
            cur = make_adaptive(cfg.q_init, cfg.eta, cfg.beta);
            break;
        default:
            throw ConfigError("finetune_curriculum: curriculum mode must be linear or adaptive");
    }
    return finetune_impl(agent, cfg, dataset, pool, nz, cur);
}

}  // namespace aftrl
