#include "curriculum.hpp"

#include <cmath>

namespace aftrl {

namespace {

double checked_q(double q, const char* what) {
    if (!std::isfinite(q) || q < 0.0 || q > 1.0)
        throw ConfigError(std::string(what) + " must be in [0,1]");
    return q;
}

}  // namespace

CurriculumState make_fixed(double q) {
    CurriculumState s;
    s.mode = CurriculumMode::Fixed;
    s.q = s.q_init = checked_q(q, "fixed q");
    return s;
}

CurriculumState make_linear(double q_init, double q_max, long total_updates) {
    if (total_updates < 1) throw ConfigError("linear curriculum needs >= 1 update interval");
    CurriculumState s;
    s.mode = CurriculumMode::Linear;
    s.q = s.q_init = checked_q(q_init, "q_init");
    s.q_max = checked_q(q_max, "q_max");
    s.step_c = (s.q_max - s.q_init) / double(total_updates);
    s.total_updates = total_updates;
    return s;
}

CurriculumState make_adaptive(double q_init, double eta, double beta) {
    if (!std::isfinite(eta) || eta <= 0.0) throw ConfigError("eta must be positive");
    if (!std::isfinite(beta) || beta <= 0.0 || beta > 1.0)
        throw ConfigError("beta must be in (0,1]");
    CurriculumState s;
    s.mode = CurriculumMode::Adaptive;
    s.q = s.q_init = checked_q(q_init, "q_init");
    s.eta = eta;
    s.beta = beta;
    return s;
}

double clip_q(double q_raw) {
    if (!std::isfinite(q_raw)) throw NumericError("clip_q: non-finite q");
    return clip(q_raw, 0.0, 1.0);
}

void update_linear(CurriculumState& state) {
    ++state.n;
    // Recomputed from the interval index (not accumulated) so the schedule
    // lands on q_max exactly and a short ramp holds q_max afterwards.
    if (state.n >= state.total_updates)
        state.q = clip_q(state.q_max);
    else
        state.q = clip_q(state.q_init + double(state.n) * state.step_c);
}

void update_adaptive(CurriculumState& state, double R_n) {
    if (!std::isfinite(R_n)) throw NumericError("update_adaptive: non-finite score");
    if (!state.ema_initialized) {
        state.ema = state.prev_ema = R_n;
        state.ema_initialized = true;
        ++state.n;
        return;
    }
    double new_ema = state.beta * R_n + (1.0 - state.beta) * state.ema;
    double dq = state.eta * (new_ema - state.ema);
    state.prev_ema = state.ema;
    state.ema = new_ema;
    state.q = clip_q(state.q + dq);
    ++state.n;
}

double current_q(const CurriculumState& state) {
    if (state.mode == CurriculumMode::Fixed) return state.q_init;
    return state.q;
}

}  // namespace aftrl
