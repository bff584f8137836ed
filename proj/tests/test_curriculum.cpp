#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/curriculum.hpp"
#include "core/rng.hpp"

using namespace aftrl;

TEST_CASE("fixed schedule never moves") {
    CurriculumState s = make_fixed(0.37);
    CHECK(current_q(s) == 0.37);
    update_adaptive(s, 0.9);  // wrong-mode updates are rejected
    CHECK(current_q(s) == 0.37);
}

TEST_CASE("q clipping") {
    CHECK(clip_q(-0.2) == 0.0);
    CHECK(clip_q(0.0) == 0.0);
    CHECK(clip_q(0.42) == 0.42);
    CHECK(clip_q(1.0) == 1.0);
    CHECK(clip_q(1.7) == 1.0);
    CHECK_THROWS_AS(clip_q(std::nan("")), NumericError);
}

TEST_CASE("linear schedule hits q_max exactly at the final interval") {
    CurriculumState s = make_linear(0.1, 0.9, 8);
    CHECK(s.step_c == doctest::Approx(0.1).epsilon(1e-15));
    for (int i = 0; i < 8; ++i) update_linear(s);
    CHECK(current_q(s) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(s.n == 8);
}

TEST_CASE("linear schedule supports a decreasing target") {
    CurriculumState s = make_linear(0.5, 0.1, 4);
    CHECK(s.step_c == doctest::Approx(-0.1).epsilon(1e-15));
    for (int i = 0; i < 4; ++i) update_linear(s);
    CHECK(current_q(s) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("adaptive update reproduces the worked example") {
    // EMA 0.5, score 0.7, beta 0.9: new EMA = 0.9*0.7 + 0.1*0.5 = 0.68,
    // delta-q = eta * (0.68 - 0.5) = 0.18 at eta = 1.
    CurriculumState s = make_adaptive(0.2, 1.0, 0.9);
    update_adaptive(s, 0.5);  // first call pins the EMA, q unchanged
    CHECK(s.ema == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(current_q(s) == doctest::Approx(0.2).epsilon(1e-15));
    update_adaptive(s, 0.7);
    CHECK(s.ema == doctest::Approx(0.68).epsilon(1e-15));
    CHECK(current_q(s) == doctest::Approx(0.38).epsilon(1e-12));
}

TEST_CASE("adaptive q moves with the sign of the EMA change") {
    CurriculumState s = make_adaptive(0.5, 0.7, 0.9);
    update_adaptive(s, 0.4);
    double q0 = current_q(s);
    update_adaptive(s, 0.9);  // improving score -> q up
    CHECK(current_q(s) > q0);
    double q1 = current_q(s);
    update_adaptive(s, 0.0);  // collapsing score -> q down
    CHECK(current_q(s) < q1);
}

TEST_CASE("adaptive increments telescope to the EMA displacement when unclipped") {
    CurriculumState s = make_adaptive(0.5, 0.25, 0.8);
    Rng rng(3);
    update_adaptive(s, 0.5);
    double ema_first = s.ema;
    for (int i = 0; i < 50; ++i) update_adaptive(s, rng.uniform(0.3, 0.7));
    // with eta=0.25 and scores in [0.3,0.7] no update can clip, so
    // q - q_init = eta * (ema - ema_first)
    CHECK(current_q(s) - 0.5 == doctest::Approx(0.25 * (s.ema - ema_first)).epsilon(1e-10));
}

TEST_CASE("EMA converges geometrically to a constant signal") {
    CurriculumState s = make_adaptive(0.0, 1.0, 0.9);
    update_adaptive(s, 0.0);
    for (int i = 0; i < 40; ++i) update_adaptive(s, 1.0);
    CHECK(std::abs(s.ema - 1.0) == doctest::Approx(std::pow(0.1, 40)).epsilon(1e-6));
}

TEST_CASE("fuzz: q stays in [0,1] under arbitrary score sequences") {
    Rng rng(2718);
    for (int trial = 0; trial < 20; ++trial) {
        CurriculumState s = make_adaptive(rng.uniform(0.0, 1.0), rng.uniform(0.1, 3.0),
                                          rng.uniform(0.05, 1.0));
        for (int i = 0; i < 5000; ++i) {
            update_adaptive(s, rng.uniform(-5.0, 5.0));
            REQUIRE(current_q(s) >= 0.0);
            REQUIRE(current_q(s) <= 1.0);
        }
    }
    for (int trial = 0; trial < 20; ++trial) {
        CurriculumState s = make_linear(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
                                        1 + long(rng.uniform_int(50)));
        for (int i = 0; i < 200; ++i) {
            update_linear(s);
            REQUIRE(current_q(s) >= 0.0);
            REQUIRE(current_q(s) <= 1.0);
        }
    }
}

TEST_CASE("constructors validate their arguments") {
    CHECK_THROWS_AS(make_fixed(-0.1), ConfigError);
    CHECK_THROWS_AS(make_fixed(1.1), ConfigError);
    CHECK_THROWS_AS(make_linear(0.0, 1.0, 0), ConfigError);
    CHECK_THROWS_AS(make_adaptive(0.5, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(make_adaptive(0.5, 1.0, 1.5), ConfigError);
}
