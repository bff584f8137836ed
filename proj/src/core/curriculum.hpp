#pragma once

#include "common.hpp"

namespace aftrl {

enum class CurriculumMode { Fixed, Linear, Adaptive };

// Perturbation-probability schedule. Linear adds a constant step per
// evaluation interval; Adaptive follows the change of an EMA of evaluation
// scores. q is clipped to [0,1] after every update.
struct CurriculumState {
    CurriculumMode mode = CurriculumMode::Fixed;
    double q = 0.0;
    double q_init = 0.0;
    double q_max = 1.0;     // Linear target
    double step_c = 0.0;    // Linear increment per update
    long total_updates = 0;  // Linear ramp length; q holds q_max afterwards
    double eta = 1.0;       // Adaptive gain
    double beta = 0.9;      // Adaptive EMA smoothing factor
    double ema = 0.0;
    double prev_ema = 0.0;
    bool ema_initialized = false;
    long n = 0;  // evaluation counter
};

CurriculumState make_fixed(double q);
// step_c is derived from (q_init, q_max, total_updates) so the schedule hits
// q_max exactly at the final interval.
CurriculumState make_linear(double q_init, double q_max, long total_updates);
CurriculumState make_adaptive(double q_init, double eta, double beta);

double clip_q(double q_raw);
void update_linear(CurriculumState& state);
// R_n is the normalized evaluation score for interval n. The first call
// initializes the EMA to R_n, so the first increment is zero.
void update_adaptive(CurriculumState& state, double R_n);
double current_q(const CurriculumState& state);

}  // namespace aftrl
