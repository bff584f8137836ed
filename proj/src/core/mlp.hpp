#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace aftrl {

enum class Activation { Tanh, Identity };

// Architecture of a small fully connected network. Hidden activation is ReLU.
struct MlpSpec {
    int input_dim = 0;
    std::vector<int> hidden_dims;
    int output_dim = 0;
    Activation output_activation = Activation::Identity;

    void validate() const;
    bool operator==(const MlpSpec&) const = default;
};

struct Layer {
    // Row-major weight matrix, rows() x cols(), plus bias of length rows().
    Vec weights;
    Vec bias;
    int in_dim = 0;
    int out_dim = 0;

    double w(int row, int col) const { return weights[std::size_t(row) * in_dim + col]; }
    double& w(int row, int col) { return weights[std::size_t(row) * in_dim + col]; }
};

struct MlpParams {
    MlpSpec spec;
    std::vector<Layer> layers;

    std::size_t param_count() const;
    bool finite() const;
};

// Gradient with the same layer structure as MlpParams, plus the gradient
// w.r.t. the network input (needed to differentiate the actor loss through
// the critic).
struct MlpGrad {
    std::vector<Layer> layers;
    Vec input_grad;

    void add_scaled(const MlpGrad& other, double scale);
    void scale(double s);
    bool finite() const;
};

struct AdamState {
    Vec m;  // first moment, flat length param_count
    Vec v;  // second moment
    long t = 0;
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_stability = 1e-8;
};

MlpParams init_params(const MlpSpec& spec, Rng& rng);
MlpParams zero_params(const MlpSpec& spec);
MlpGrad zero_grad(const MlpParams& params);
AdamState make_adam(const MlpParams& params, double lr);

Vec forward(const MlpParams& params, const Vec& x);

// Exact reverse-mode gradient of <upstream, forward(params, x)>.
MlpGrad grad(const MlpParams& params, const Vec& x, const Vec& upstream);

// Bias-corrected Adam step. Aborts (NumericError) on non-finite gradients,
// leaving params and state untouched.
void adam_step(MlpParams& params, const MlpGrad& g, AdamState& state);

// target <- tau * online + (1 - tau) * target, per coordinate.
void soft_update(MlpParams& target, const MlpParams& online, double tau);

// Checkpoint format: text header describing the spec, then the flat parameter
// vector as little-endian 64-bit floats. Layout documented in the README.
void save_mlp(const MlpParams& params, const std::string& path);
MlpParams load_mlp(const std::string& path);

}  // namespace aftrl
