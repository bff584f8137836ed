#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace aftrl {

// Deterministic toy continuous-control environments. Actions live in
// [-1,1]^{action_dim}; reward = w_velocity * v_fwd - w_action_cost * |a|^2 + alive_bonus.
struct EnvSpec {
    std::string name;
    int obs_dim = 0;
    int action_dim = 0;
    int horizon = 200;
    double w_velocity = 3.0;
    double w_action_cost = 0.1;
    double w_height = 0.0;  // height-tracking penalty (PointHopper only)
    double alive_bonus = 1.0;
};

struct EnvState {
    Vec phys;
    int step_count = 0;
};

struct StepResult {
    EnvState state;
    Vec obs;
    double reward = 0.0;
    bool done = false;
    // True only when the failure predicate fired (PointHopper fell). Horizon
    // exhaustion sets done but not failed; targets bootstrap through it.
    bool failed = false;
};

// Registry keyed by name; throws ConfigError for unknown names.
EnvSpec env_spec(const std::string& name);
std::vector<std::string> env_names();

std::pair<EnvState, Vec> reset(const EnvSpec& spec, std::uint64_t seed);
Vec observe(const EnvSpec& spec, const EnvState& state);
StepResult step(const EnvSpec& spec, const EnvState& state, const Vec& action);

// Deterministic near-optimal controller used to collect offline data.
Vec scripted_expert(const EnvSpec& spec, const Vec& obs);

// Dynamics constants, exposed for the closed-form oracles in tests.
namespace dyn {
inline constexpr double kDt = 0.05;
inline constexpr double kDrag = 0.1;
inline constexpr double kGain = 0.25;
inline constexpr double kGravity = 1.0;
inline constexpr double kThrust = 2.0;
inline constexpr double kMinHeight = 0.5;
inline constexpr double kTargetHeight = 1.0;
// squared height error is capped so runaway altitude cannot blow up the return scale
inline constexpr double kHeightPenaltyCap = 1.0;
inline constexpr double kTargetSpeed = 1.5;
inline constexpr double kExpertKp = 4.0;
// the walker expert is deliberately low-gain: it pushes full throttle from rest
// but compensates actuator scaling only partially, leaving fine-tuning headroom
inline constexpr double kWalkerKp = 2.0 / 3.0;
inline constexpr double kHoverKp = 0.75;
inline constexpr double kHoverKd = 1.5;
}  // namespace dyn

}  // namespace aftrl
