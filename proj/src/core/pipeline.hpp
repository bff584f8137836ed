#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "curriculum.hpp"
#include "envs.hpp"
#include "perturb.hpp"
#include "replay.hpp"
#include "td3.hpp"

namespace aftrl {

struct ScoreNormalizer {
    std::string env;
    double random_ref = 0.0;
    double expert_ref = 1.0;
};

double normalize(double raw_return, const ScoreNormalizer& nz);
void save_normalizer(const ScoreNormalizer& nz, const std::string& path);
ScoreNormalizer load_normalizer(const std::string& path);

// Everything a single training/evaluation run needs. Built from the config
// file by the config module; defaults here are the documented defaults.
struct RunConfig {
    std::string env_name = "PointWalker";
    std::uint64_t seed = 0;
    long pretrain_steps = 20000;
    long finetune_steps = 30000;
    long eval_interval = 2000;   // env steps between evaluations
    int eval_episodes = 10;      // M
    long warmup_steps = 500;     // env steps before gradient updates start
    double r_off = 0.1;
    PerturbMode perturb_mode = PerturbMode::Adversarial;
    double epsilon = 0.3;
    CurriculumMode curriculum_mode = CurriculumMode::Fixed;
    double q_init = 0.5;
    double q_max = 1.0;
    long ramp_intervals = 0;  // linear schedule length; 0 = span the whole run
    double eta = 1.0;
    double beta = 0.9;
    std::vector<int> hidden = {32, 32};
    Td3Hyper hyper;
    double bc_weight = 1.0;
    std::size_t buffer_capacity = 1'000'000;
    std::string out_dir = "out";

    void validate() const;
};

struct MetricsRow {
    long env_step = 0;
    std::string eval_condition;
    double r_raw = 0.0;
    double r_normalized = 0.0;
    double q = 0.0;
    double wall_time = 0.0;
};

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);

// TD3+BC gradient steps sampling only from the dataset; no env interaction.
AgentState pretrain_offline(const OfflineDataset& dataset, const RunConfig& cfg,
                            std::vector<MetricsRow>* metrics = nullptr);

struct EpisodeOutcome {
    double episode_return = 0.0;
    long steps = 0;
    long perturbed_steps = 0;
};

// One episode. At each step the selected action is perturbed via apply()
// with probability q before execution; the stored transition carries the
// pre-perturbation action with the realized reward/next state. When train is
// true, one critic_update per env step (after warmup) and one delayed actor
// update.
EpisodeOutcome episode_loop(AgentState& agent, const EnvSpec& env, const PerturbationVector& delta,
                            double q, const Td3Hyper& h, ReplayBuffer& buffer, bool train,
                            long warmup, Rng& env_rng, Rng& train_rng);

// Mean raw return over M episodes, fresh delta per episode, no training and
// no buffer writes.
double policy_evaluation(const AgentState& agent, const EnvSpec& env, double q, PerturbMode mode,
                         const std::vector<PerturbationVector>& pool, int M, double eps, Rng& rng);

struct ConditionStats {
    double mean_normalized = 0.0;
    double std_normalized = 0.0;
    double mean_raw = 0.0;
    int episodes = 0;
    Vec raw_returns;
};

struct EvalReport {
    ConditionStats normal, random, adversarial;
};

// 100 episodes per condition at q = 1 for the perturbed conditions.
EvalReport robustness_eval(const AgentState& agent, const EnvSpec& env,
                           const std::vector<PerturbationVector>& pool,
                           const ScoreNormalizer& nz, double eps, Rng& rng, int episodes = 100);

struct FinetuneResult {
    std::vector<MetricsRow> metrics;
    std::vector<double> q_trajectory;  // q at each evaluation interval
    long total_steps = 0;
    long perturbed_steps = 0;
};

// Algorithm: init buffer with offline fraction, then episode loops with a
// fresh per-episode delta until finetune_steps env steps are consumed;
// periodic policy evaluation logged. Fixed q.
FinetuneResult finetune_fixed(AgentState& agent, const RunConfig& cfg,
                              const OfflineDataset& dataset,
                              const std::vector<PerturbationVector>& pool,
                              const ScoreNormalizer& nz);

// As finetune_fixed but q follows the configured linear or adaptive
// curriculum, updated at each evaluation interval from the current score.
FinetuneResult finetune_curriculum(AgentState& agent, const RunConfig& cfg,
                                   const OfflineDataset& dataset,
                                   const std::vector<PerturbationVector>& pool,
                                   const ScoreNormalizer& nz);

}  // namespace aftrl
