#include "perturb.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace aftrl {

Vec apply(const Vec& a, const PerturbationVector& delta) {
    if (a.size() != delta.delta.size())
        throw ShapeError("apply: action/perturbation length mismatch");
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = clip(a[i] + delta.delta[i] * a[i], -1.0, 1.0);
    return out;
}

PerturbationVector sample_random(double eps, int action_dim, Rng& rng) {
    if (!(eps > 0.0)) throw ConfigError("sample_random: eps must be > 0");
    PerturbationVector p;
    p.eps_bound = eps;
    p.delta = rng.uniform_vec(std::size_t(action_dim), -eps, eps);
    return p;
}

PerturbationVector make_delta(PerturbMode mode, double eps, int action_dim,
                              const std::vector<PerturbationVector>& pool, Rng& rng) {
    switch (mode) {
        case PerturbMode::Normal: {
            PerturbationVector p;
            p.eps_bound = eps;
            p.delta.assign(std::size_t(action_dim), 0.0);
            return p;
        }
        case PerturbMode::Random:
            return sample_random(eps, action_dim, rng);
        case PerturbMode::Adversarial:
            if (pool.empty())
                throw ConfigError("make_delta: adversarial mode needs a nonempty pool");
            return pool[rng.uniform_int(pool.size())];
    }
    throw ConfigError("make_delta: bad mode");
}

double perturbed_return(const PolicyFn& policy, const EnvSpec& env,
                        const PerturbationVector& delta, int episodes,
                        const std::vector<std::uint64_t>& seeds) {
    if (episodes < 1 || int(seeds.size()) < episodes)
        throw ConfigError("perturbed_return: need at least `episodes` fitness seeds");
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        auto [state, obs] = reset(env, seeds[std::size_t(e)]);
        double ep_ret = 0.0;
        bool done = false;
        while (!done) {
            Vec a = aftrl::apply(policy(obs), delta);
            StepResult r = step(env, state, a);
            ep_ret += r.reward;
            state = std::move(r.state);
            obs = std::move(r.obs);
            done = r.done;
        }
        total += ep_ret;
    }
    return total / double(episodes);
}

DeResult de_minimize(const PolicyFn& policy, const EnvSpec& env, double eps,
                     const DeParams& de, Rng& rng) {
    if (de.population_size < 4)
        throw ConfigError("de_minimize: population_size must be >= 4");
    const int n = env.action_dim;
    const std::size_t np = std::size_t(de.population_size);

    auto fitness = [&](const Vec& delta) {
        PerturbationVector p{delta, eps};
        return perturbed_return(policy, env, p, de.fitness_episodes, de.fitness_seeds);
    };

    std::vector<Vec> pop(np);
    Vec fit(np);
    for (std::size_t i = 0; i < np; ++i) {
        pop[i] = rng.uniform_vec(std::size_t(n), -eps, eps);
        fit[i] = fitness(pop[i]);
    }

    DeResult res;
    auto record_best = [&]() {
        std::size_t bi = 0;
        for (std::size_t i = 1; i < np; ++i)
            if (fit[i] < fit[bi]) bi = i;
        res.best_fitness_per_generation.push_back(fit[bi]);
        return bi;
    };
    record_best();

    for (int g = 0; g < de.generations; ++g) {
        for (std::size_t i = 0; i < np; ++i) {
            // rand/1: three distinct members, all different from i
            std::size_t ia, ib, ic;
            do { ia = rng.uniform_int(np); } while (ia == i);
            do { ib = rng.uniform_int(np); } while (ib == i || ib == ia);
            do { ic = rng.uniform_int(np); } while (ic == i || ic == ia || ic == ib);
            Vec trial = pop[i];
            std::size_t jrand = rng.uniform_int(std::size_t(n));
            for (int j = 0; j < n; ++j) {
                if (std::size_t(j) == jrand || rng.bernoulli(de.crossover_rate)) {
                    double v = pop[ia][std::size_t(j)] +
                               de.differential_weight *
                                   (pop[ib][std::size_t(j)] - pop[ic][std::size_t(j)]);
                    trial[std::size_t(j)] = clip(v, -eps, eps);
                }
            }
            double tf = fitness(trial);
            if (tf <= fit[i]) {
                pop[i] = std::move(trial);
                fit[i] = tf;
            }
        }
        record_best();
    }

    std::size_t bi = 0;
    for (std::size_t i = 1; i < np; ++i)
        if (fit[i] < fit[bi]) bi = i;
    res.best = PerturbationVector{pop[bi], eps};
    return res;
}

AdversarialSet generate_adversarial_set(const PolicyFn& policy, const EnvSpec& env, double eps,
                                        const DeParams& de, int pool_size, Rng& rng) {
    if (pool_size < 1) throw ConfigError("generate_adversarial_set: pool_size must be >= 1");
    AdversarialSet out;
    for (int k = 0; k < pool_size; ++k) {
        Rng run_rng(rng.next_u64());
        DeResult r = de_minimize(policy, env, eps, de, run_rng);
        out.pool.push_back(std::move(r.best));
        out.fitness_logs.push_back(std::move(r.best_fitness_per_generation));
    }
    return out;
}

PolicyFn actor_policy(const MlpParams& actor) {
    return [actor](const Vec& obs) { return forward(actor, obs); };
}

void save_pool(const std::vector<PerturbationVector>& pool, double eps, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    std::size_t dim = pool.empty() ? 0 : pool.front().delta.size();
    nlohmann::json meta = {{"format", "aftrl-pool-v1"},
                           {"epsilon", eps},
                           {"action_dim", dim},
                           {"count", pool.size()}};
    out << meta.dump() << "\n";
    char buf[40];
    for (const auto& p : pool) {
        std::string line;
        for (double x : p.delta) {
            std::snprintf(buf, sizeof(buf), " %a", x);
            line += buf;
        }
        out << line.substr(1) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<PerturbationVector> load_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty pool file: " + path);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ":1: bad pool header: " + e.what());
    }
    if (meta.value("format", "") != "aftrl-pool-v1")
        throw IoError(path + ":1: unknown pool format");
    double eps = meta.value("epsilon", 0.0);
    std::size_t dim = meta.value("action_dim", std::size_t{0});
    std::size_t count = meta.value("count", std::size_t{0});
    std::vector<PerturbationVector> pool;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        PerturbationVector p;
        p.eps_bound = eps;
        const char* ptr = line.c_str();
        char* end = nullptr;
        while (true) {
            double x = std::strtod(ptr, &end);
            if (end == ptr) break;
            p.delta.push_back(x);
            ptr = end;
        }
        if (p.delta.size() != dim)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(dim) + " values");
        pool.push_back(std::move(p));
    }
    if (pool.size() != count) throw IoError(path + ": truncated pool file");
    return pool;
}

}  // namespace aftrl
