#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "core/perturb.hpp"

using namespace aftrl;

namespace {

// closed-form quadratic policy fixture: constant action, so the perturbed
// return of PointWalker is a smooth function of delta with a known optimum
PolicyFn constant_policy(Vec a) {
    return [a = std::move(a)](const Vec&) { return a; };
}

}  // namespace

TEST_CASE("apply computes a + delta .* a with clipping") {
    PerturbationVector d{{0.3, -0.3}, 0.3};
    Vec out = aftrl::apply({0.5, -0.2}, d);
    CHECK(out[0] == doctest::Approx(0.65).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(-0.14).epsilon(1e-15));
    // clipping engages at the box boundary
    Vec big = aftrl::apply({0.9, -0.9}, PerturbationVector{{0.3, 0.3}, 0.3});
    CHECK(big[0] == 1.0);
    CHECK(big[1] == -1.0);
    CHECK_THROWS_AS(aftrl::apply({0.1}, d), ShapeError);
}

TEST_CASE("apply is positively homogeneous below the clip boundary") {
    PerturbationVector d{{0.2, -0.1, 0.05}, 0.2};
    Vec a = {0.1, -0.2, 0.3};
    Vec half = aftrl::apply({0.05, -0.1, 0.15}, d);
    Vec full = aftrl::apply(a, d);
    for (int i = 0; i < 3; ++i)
        CHECK(full[std::size_t(i)] == doctest::Approx(2.0 * half[std::size_t(i)]).epsilon(1e-14));
}

TEST_CASE("zero delta is the identity on in-range actions") {
    PerturbationVector d{{0.0, 0.0}, 0.3};
    Vec a = {0.7, -0.4};
    CHECK(aftrl::apply(a, d) == a);
}

TEST_CASE("random deltas fill the box uniformly") {
    Rng rng(31);
    double eps = 0.3;
    Vec mean(4, 0.0);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        PerturbationVector d = sample_random(eps, 4, rng);
        REQUIRE(d.delta.size() == 4);
        CHECK(d.eps_bound == eps);
        for (int j = 0; j < 4; ++j) {
            REQUIRE(std::abs(d.delta[std::size_t(j)]) <= eps);
            mean[std::size_t(j)] += d.delta[std::size_t(j)];
        }
    }
    for (double m : mean) CHECK(std::abs(m / n) < 0.01);  // ~5 sigma for U[-0.3,0.3]
    CHECK_THROWS_AS(sample_random(0.0, 4, rng), ConfigError);
    CHECK_THROWS_AS(sample_random(-0.1, 4, rng), ConfigError);
}

TEST_CASE("make_delta covers the three modes") {
    Rng rng(17);
    std::vector<PerturbationVector> pool = {{{0.1, 0.1}, 0.3}, {{-0.2, 0.2}, 0.3}};
    PerturbationVector none = make_delta(PerturbMode::Normal, 0.3, 2, pool, rng);
    CHECK(none.delta == Vec{0.0, 0.0});
    PerturbationVector rnd = make_delta(PerturbMode::Random, 0.3, 2, pool, rng);
    for (double d : rnd.delta) CHECK(std::abs(d) <= 0.3);
    bool seen0 = false, seen1 = false;
    for (int i = 0; i < 200; ++i) {
        PerturbationVector adv = make_delta(PerturbMode::Adversarial, 0.3, 2, pool, rng);
        if (adv.delta == pool[0].delta) seen0 = true;
        if (adv.delta == pool[1].delta) seen1 = true;
    }
    CHECK(seen0);
    CHECK(seen1);
    CHECK_THROWS_AS(make_delta(PerturbMode::Adversarial, 0.3, 2, {}, rng), ConfigError);
}

TEST_CASE("perturbed return is deterministic over frozen fitness seeds") {
    EnvSpec env = env_spec("PointWalker");
    PolicyFn p = constant_policy({0.6, 0.0});
    PerturbationVector d{{-0.1, 0.05}, 0.3};
    std::vector<std::uint64_t> seeds = {101, 202};
    double r1 = perturbed_return(p, env, d, 2, seeds);
    double r2 = perturbed_return(p, env, d, 2, seeds);
    CHECK(r1 == r2);
    CHECK_THROWS_AS(perturbed_return(p, env, d, 3, seeds), ConfigError);
}

TEST_CASE("throttle-inflating delta hurts an over-throttled constant policy") {
    // executed throttle 0.8*(1+0.3) clips to 1.0, far past the reward peak
    EnvSpec env = env_spec("PointWalker");
    PolicyFn p = constant_policy({0.8, 0.0});
    std::vector<std::uint64_t> seeds = {101, 202};
    double base = perturbed_return(p, env, {{0.0, 0.0}, 0.3}, 2, seeds);
    double hurt = perturbed_return(p, env, {{0.3, 0.0}, 0.3}, 2, seeds);
    CHECK(hurt < base - 50.0);
}

TEST_CASE("DE: best-so-far fitness is monotone and the result stays in the box") {
    EnvSpec env = env_spec("PointWalker");
    PolicyFn p = constant_policy({0.6, 0.0});
    DeParams de;
    de.population_size = 12;
    de.generations = 10;
    de.fitness_episodes = 1;
    de.fitness_seeds = {101};
    Rng rng(5);
    DeResult res = de_minimize(p, env, 0.3, de, rng);
    REQUIRE(res.best_fitness_per_generation.size() == 11);  // init + 10 generations
    for (std::size_t g = 1; g < res.best_fitness_per_generation.size(); ++g)
        CHECK(res.best_fitness_per_generation[g] <= res.best_fitness_per_generation[g - 1]);
    for (double d : res.best.delta) CHECK(std::abs(d) <= 0.3);
    CHECK(res.best.eps_bound == 0.3);
    // the reported fitness matches an independent re-evaluation
    double refit = perturbed_return(p, env, res.best, de.fitness_episodes, de.fitness_seeds);
    CHECK(refit == doctest::Approx(res.best_fitness_per_generation.back()).epsilon(1e-12));
}

TEST_CASE("DE with zero generations reduces to the best initial sample") {
    EnvSpec env = env_spec("PointWalker");
    PolicyFn p = constant_policy({0.6, 0.0});
    DeParams de;
    de.population_size = 8;
    de.generations = 0;
    de.fitness_episodes = 1;
    de.fitness_seeds = {101};
    Rng rng(6);
    DeResult res = de_minimize(p, env, 0.3, de, rng);
    CHECK(res.best_fitness_per_generation.size() == 1);
    double refit = perturbed_return(p, env, res.best, 1, de.fitness_seeds);
    CHECK(refit == doctest::Approx(res.best_fitness_per_generation[0]).epsilon(1e-12));
}

TEST_CASE("DE requires at least four population members") {
    EnvSpec env = env_spec("PointWalker");
    DeParams de;
    de.population_size = 3;
    Rng rng(1);
    CHECK_THROWS_AS(de_minimize(constant_policy({0.0, 0.0}), env, 0.3, de, rng), ConfigError);
}

TEST_CASE("DE finds the throttle-killing corner for a constant policy") {
    // for a = (0.8, 0) the per-step reward peaks at executed throttle 0.6, so
    // over the reachable range [0.56, 1.0] the unique minimizer is delta_0 = +eps
    EnvSpec env = env_spec("PointWalker");
    PolicyFn p = constant_policy({0.8, 0.0});
    DeParams de;
    de.population_size = 16;
    de.generations = 25;
    de.fitness_episodes = 1;
    de.fitness_seeds = {101};
    Rng rng(13);
    DeResult res = de_minimize(p, env, 0.3, de, rng);
    // every delta_0 >= 0.25 clips the executed throttle to 1.0, so the
    // minimizer set is the flat region [0.25, eps]
    CHECK(res.best.delta[0] >= 0.25 - 1e-9);
}

TEST_CASE("adversarial set generation yields the requested pool with logs") {
    EnvSpec env = env_spec("PointWalker");
    PolicyFn p = constant_policy({0.6, 0.0});
    DeParams de;
    de.population_size = 6;
    de.generations = 3;
    de.fitness_episodes = 1;
    de.fitness_seeds = {101};
    Rng rng(21);
    AdversarialSet set = generate_adversarial_set(p, env, 0.3, de, 4, rng);
    CHECK(set.pool.size() == 4);
    CHECK(set.fitness_logs.size() == 4);
    for (const auto& log : set.fitness_logs) CHECK(log.size() == 4);
    // independent runs produce distinct vectors almost surely
    CHECK(set.pool[0].delta != set.pool[1].delta);
}

TEST_CASE("pool round trip is bit exact") {
    std::vector<PerturbationVector> pool = {{{0.1, -0.2}, 0.3},
                                            {{0.25, 0.3}, 0.3},
                                            {{-0.3, 1e-17}, 0.3}};
    std::string path = (std::filesystem::temp_directory_path() / "pool_roundtrip.pool").string();
    save_pool(pool, 0.3, path);
    auto back = load_pool(path);
    REQUIRE(back.size() == pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        CHECK(back[i].delta == pool[i].delta);
        CHECK(back[i].eps_bound == pool[i].eps_bound);
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_pool(path), IoError);
}

TEST_CASE("actor_policy wraps an MLP as a deterministic policy") {
    MlpSpec spec{2, {4}, 2, Activation::Tanh};
    Rng rng(8);
    MlpParams actor = init_params(spec, rng);
    PolicyFn p = actor_policy(actor);
    Vec obs = {0.3, -0.1};
    CHECK(p(obs) == forward(actor, obs));
}
