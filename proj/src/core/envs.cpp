#include "envs.hpp"

#include <algorithm>

namespace aftrl {

using namespace dyn;

// PointWalker: drag-limited 2D point mass, phys = [x, y, vx, vy], no failure
// state. Forward is +x.
// PointHopper: forward point mass with a thrust-held height coordinate,
// phys = [x, vx, h, vh, vy]; falls (terminal) when h < kMinHeight.

EnvSpec env_spec(const std::string& name) {
    if (name == "PointWalker") {
        EnvSpec s;
        s.name = name;
        s.obs_dim = 2;
        s.action_dim = 2;
        // steady-state reward peaks at throttle 0.6 (cruise speed 1.5)
        s.w_action_cost = 6.25;
        return s;
    }
    if (name == "PointHopper") {
        EnvSpec s;
        s.name = name;
        s.obs_dim = 4;
        s.action_dim = 3;
        s.w_action_cost = 1.0;
        // hovering near the target height must beat climbing away, otherwise
        // saturated-thrust policies dominate and the height dynamics go dead
        s.w_height = 3.0;
        return s;
    }
    throw ConfigError("unknown environment: " + name);
}

std::vector<std::string> env_names() { return {"PointWalker", "PointHopper"}; }

std::pair<EnvState, Vec> reset(const EnvSpec& spec, std::uint64_t seed) {
    Rng rng(mix64(seed ^ hash_name(spec.name)));
    EnvState st;
    st.step_count = 0;
    if (spec.name == "PointWalker") {
        // x = y = 0, vx = 0 by construction, vy in [-0.05, 0.05]
        st.phys = {0.0, 0.0, 0.0, rng.uniform(-0.05, 0.05)};
    } else if (spec.name == "PointHopper") {
        // x = 0, vx = 0, h in [0.95, 1.05], vh = 0, vy in [-0.05, 0.05]
        st.phys = {0.0, 0.0, rng.uniform(0.95, 1.05), 0.0, rng.uniform(-0.05, 0.05)};
    } else {
        throw ConfigError("unknown environment: " + spec.name);
    }
    return {st, observe(spec, st)};
}

Vec observe(const EnvSpec& spec, const EnvState& state) {
    if (spec.name == "PointWalker") return {state.phys[2], state.phys[3]};
    return {state.phys[1], state.phys[2], state.phys[3], state.phys[4]};
}

StepResult step(const EnvSpec& spec, const EnvState& state, const Vec& action) {
    if (int(action.size()) != spec.action_dim)
        throw ShapeError("step: action length != action_dim for " + spec.name);
    if (!all_finite(action)) throw NumericError("step: non-finite action");

    Vec a = action;
    clip_inplace(a, -1.0, 1.0);

    StepResult res;
    res.state = state;
    Vec& p = res.state.phys;
    double v_fwd = 0.0;

    if (spec.name == "PointWalker") {
        p[0] += kDt * p[2];
        p[1] += kDt * p[3];
        p[2] = (1.0 - kDrag) * p[2] + kGain * a[0];
        p[3] = (1.0 - kDrag) * p[3] + kGain * a[1];
        v_fwd = p[2];
    } else {
        p[0] += kDt * p[1];
        p[1] = (1.0 - kDrag) * p[1] + kGain * a[0];
        p[3] += kDt * (kThrust * a[1] - kGravity);
        p[2] += kDt * p[3];  // semi-implicit height update
        p[4] = (1.0 - kDrag) * p[4] + kGain * a[2];
        v_fwd = p[1];
        res.failed = p[2] < kMinHeight;
    }

    res.state.step_count = state.step_count + 1;
    res.reward = spec.w_velocity * v_fwd - spec.w_action_cost * squared_norm(a) + spec.alive_bonus;
    if (spec.name == "PointHopper") {
        double dh = p[2] - kTargetHeight;
        res.reward -= spec.w_height * std::min(dh * dh, kHeightPenaltyCap);
    }
    res.done = res.failed || res.state.step_count >= spec.horizon;
    res.obs = observe(spec, res.state);
    return res;
}

Vec scripted_expert(const EnvSpec& spec, const Vec& obs) {
    if (spec.name == "PointWalker") {
        // full-throttle proportional controller toward the cruise speed
        double a0 = clip(kWalkerKp * (kTargetSpeed - obs[0]), -1.0, 1.0);
        double a1 = clip(-kWalkerKp * obs[1], -1.0, 1.0);
        return {a0, a1};
    }
    if (spec.name == "PointHopper") {
        // obs = [vx, h, vh, vy]; hold height with a PD hover controller
        double a0 = clip(kExpertKp * (kTargetSpeed - obs[0]), -1.0, 1.0);
        double a1 = clip((kGravity + kHoverKp * (kTargetHeight - obs[1]) - kHoverKd * obs[2]) / kThrust,
                         -1.0, 1.0);
        double a2 = clip(-kExpertKp * obs[3], -1.0, 1.0);
        return {a0, a1, a2};
    }
    throw ConfigError("unknown environment: " + spec.name);
}

}  // namespace aftrl
