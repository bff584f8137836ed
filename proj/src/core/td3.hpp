#pragma once

#include <string>
#include <vector>

#include "common.hpp"
#include "mlp.hpp"
#include "replay.hpp"
#include "rng.hpp"

namespace aftrl {

struct Td3Hyper {
    double gamma = 0.99;
    double tau = 0.005;
    double target_noise_std = 0.2;   // sigma
    double noise_clip = 0.5;         // c
    int policy_delay = 2;            // d
    double exploration_noise_std = 0.1;
    int batch_size = 64;
    double actor_lr = 3e-4;
    double critic_lr = 3e-4;
    // Optional TD3+BC Q-scale normalization: weight the Q term by
    // bc_alpha / mean|Q| in the BC actor objective. Off by default.
    bool bc_q_normalize = false;
    double bc_alpha = 2.5;

    void validate() const;
};

// Actor, twin critics, their target copies, and per-network Adam state.
// Critics take concat(s, a) and output a scalar.
struct AgentState {
    MlpParams actor, critic1, critic2;
    MlpParams actor_target, critic1_target, critic2_target;
    AdamState actor_opt, critic1_opt, critic2_opt;
    long update_count = 0;

    int obs_dim() const { return actor.spec.input_dim; }
    int action_dim() const { return actor.spec.output_dim; }
};

AgentState make_agent(int obs_dim, int action_dim, const std::vector<int>& hidden,
                      const Td3Hyper& h, Rng& rng);

// y_i = r_i + gamma * (1 - done_i) * min(Q1-, Q2-)(s', clip(pi-(s') + eps, -1, 1)),
// eps ~ clip(N(0, sigma^2), -c, c) drawn per batch item, per action dimension.
Vec compute_target(const AgentState& agent, const Td3Hyper& h,
                   const std::vector<Transition>& batch, Rng& rng);

// One Adam step on the Bellman MSE for each critic, against shared targets.
// Increments update_count.
void critic_update(AgentState& agent, const Td3Hyper& h, const std::vector<Transition>& batch,
                   Rng& rng);

// Delayed deterministic policy gradient step (ascent on mean Q1(s, pi(s)))
// followed by soft target updates. No-op unless update_count is a multiple of
// policy_delay.
void actor_update_td3(AgentState& agent, const Td3Hyper& h, const std::vector<Transition>& batch);

// As above but maximizing mean[Q1(s, pi(s)) - bc_weight * |pi(s) - a|^2].
void actor_update_td3bc(AgentState& agent, const Td3Hyper& h,
                        const std::vector<Transition>& batch, double bc_weight);

Vec select_action(const AgentState& agent, const Vec& obs, bool explore, const Td3Hyper& h,
                  Rng& rng);

// Checkpoint directory: manifest.json naming the six parameter sets and
// hyperparameters, one .mlp file per network, adam.bin for optimizer state.
void save_agent(const AgentState& agent, const Td3Hyper& h, const std::string& dir);
std::pair<AgentState, Td3Hyper> load_agent(const std::string& dir);

// FNV-1a over the raw parameter bytes of all six networks; used by purity tests.
std::uint64_t agent_param_hash(const AgentState& agent);

}  // namespace aftrl
