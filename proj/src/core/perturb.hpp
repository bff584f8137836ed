#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "common.hpp"
#include "envs.hpp"
#include "mlp.hpp"
#include "rng.hpp"

namespace aftrl {

// delta in [-eps_bound, eps_bound]^{action_dim}, applied multiplicatively:
// a' = clip(a + delta .* a, -1, 1).
struct PerturbationVector {
    Vec delta;
    double eps_bound = 0.0;
};

enum class PerturbMode { Normal, Random, Adversarial };

struct DeParams {
    int population_size = 20;  // >= 4 required by rand/1 mutation
    int generations = 30;
    double differential_weight = 0.5;  // F
    double crossover_rate = 0.9;       // CR
    int fitness_episodes = 2;          // E
    std::vector<std::uint64_t> fitness_seeds = {101, 202};
};

Vec apply(const Vec& a, const PerturbationVector& delta);
PerturbationVector sample_random(double eps, int action_dim, Rng& rng);
PerturbationVector make_delta(PerturbMode mode, double eps, int action_dim,
                              const std::vector<PerturbationVector>& pool, Rng& rng);

using PolicyFn = std::function<Vec(const Vec& obs)>;

// Mean episodic return of `policy` with `delta` applied on every step (q = 1)
// over the fixed fitness seeds. This is the (deterministic) DE objective.
double perturbed_return(const PolicyFn& policy, const EnvSpec& env,
                        const PerturbationVector& delta, int episodes,
                        const std::vector<std::uint64_t>& seeds);

struct DeResult {
    PerturbationVector best;
    Vec best_fitness_per_generation;  // non-increasing, entry 0 = initial population
};

// One DE/rand/1/bin run minimizing perturbed_return over the eps-box.
DeResult de_minimize(const PolicyFn& policy, const EnvSpec& env, double eps,
                     const DeParams& de, Rng& rng);

struct AdversarialSet {
    std::vector<PerturbationVector> pool;
    std::vector<Vec> fitness_logs;  // per pool entry, per generation
};

AdversarialSet generate_adversarial_set(const PolicyFn& policy, const EnvSpec& env, double eps,
                                        const DeParams& de, int pool_size, Rng& rng);

PolicyFn actor_policy(const MlpParams& actor);

// Pool file: JSON header line (epsilon, action_dim, count), then one vector
// per line as hexfloats.
void save_pool(const std::vector<PerturbationVector>& pool, double eps, const std::string& path);
std::vector<PerturbationVector> load_pool(const std::string& path);

}  // namespace aftrl
