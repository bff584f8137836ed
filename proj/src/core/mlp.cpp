#include "mlp.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace aftrl {

void MlpSpec::validate() const {
    if (input_dim < 1 || output_dim < 1)
        throw ConfigError("MlpSpec: dimensions must be >= 1");
    for (int h : hidden_dims)
        if (h < 1) throw ConfigError("MlpSpec: hidden dims must be >= 1");
}

std::size_t MlpParams::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

bool MlpParams::finite() const {
    for (const auto& l : layers)
        if (!all_finite(l.weights) || !all_finite(l.bias)) return false;
    return true;
}

void MlpGrad::add_scaled(const MlpGrad& other, double scale) {
    for (std::size_t li = 0; li < layers.size(); ++li) {
        auto& dst = layers[li];
        const auto& src = other.layers[li];
        for (std::size_t i = 0; i < dst.weights.size(); ++i) dst.weights[i] += scale * src.weights[i];
        for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] += scale * src.bias[i];
    }
    for (std::size_t i = 0; i < input_grad.size(); ++i) input_grad[i] += scale * other.input_grad[i];
}

void MlpGrad::scale(double s) {
    for (auto& l : layers) {
        for (double& x : l.weights) x *= s;
        for (double& x : l.bias) x *= s;
    }
    for (double& x : input_grad) x *= s;
}

bool MlpGrad::finite() const {
    for (const auto& l : layers)
        if (!all_finite(l.weights) || !all_finite(l.bias)) return false;
    return all_finite(input_grad);
}

static std::vector<int> layer_dims(const MlpSpec& spec) {
    std::vector<int> dims;
    dims.push_back(spec.input_dim);
    for (int h : spec.hidden_dims) dims.push_back(h);
    dims.push_back(spec.output_dim);
    return dims;
}

MlpParams init_params(const MlpSpec& spec, Rng& rng) {
    spec.validate();
    MlpParams p;
    p.spec = spec;
    auto dims = layer_dims(spec);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        l.in_dim = dims[i];
        l.out_dim = dims[i + 1];
        double bound = 1.0 / std::sqrt(double(l.in_dim));
        l.weights = rng.uniform_vec(std::size_t(l.in_dim) * l.out_dim, -bound, bound);
        l.bias = rng.uniform_vec(std::size_t(l.out_dim), -bound, bound);
        p.layers.push_back(std::move(l));
    }
    return p;
}

MlpParams zero_params(const MlpSpec& spec) {
    spec.validate();
    MlpParams p;
    p.spec = spec;
    auto dims = layer_dims(spec);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        l.in_dim = dims[i];
        l.out_dim = dims[i + 1];
        l.weights.assign(std::size_t(l.in_dim) * l.out_dim, 0.0);
        l.bias.assign(std::size_t(l.out_dim), 0.0);
        p.layers.push_back(std::move(l));
    }
    return p;
}

MlpGrad zero_grad(const MlpParams& params) {
    MlpGrad g;
    for (const auto& l : params.layers) {
        Layer gl;
        gl.in_dim = l.in_dim;
        gl.out_dim = l.out_dim;
        gl.weights.assign(l.weights.size(), 0.0);
        gl.bias.assign(l.bias.size(), 0.0);
        g.layers.push_back(std::move(gl));
    }
    g.input_grad.assign(std::size_t(params.spec.input_dim), 0.0);
    return g;
}

AdamState make_adam(const MlpParams& params, double lr) {
    AdamState s;
    s.m.assign(params.param_count(), 0.0);
    s.v.assign(params.param_count(), 0.0);
    s.lr = lr;
    return s;
}

// Forward pass keeping post-activation values of every layer.
static std::vector<Vec> forward_cached(const MlpParams& params, const Vec& x) {
    if (int(x.size()) != params.spec.input_dim)
        throw ShapeError("forward: input length " + std::to_string(x.size()) + " != input_dim " +
                         std::to_string(params.spec.input_dim));
    std::vector<Vec> acts;
    acts.reserve(params.layers.size() + 1);
    acts.push_back(x);
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        const Layer& l = params.layers[li];
        const Vec& in = acts.back();
        Vec out(std::size_t(l.out_dim));
        for (int r = 0; r < l.out_dim; ++r) {
            const double* wrow = &l.weights[std::size_t(r) * l.in_dim];
            double s = l.bias[std::size_t(r)];
            for (int c = 0; c < l.in_dim; ++c) s += wrow[c] * in[std::size_t(c)];
            out[std::size_t(r)] = s;
        }
        bool last = li + 1 == params.layers.size();
        if (last) {
            if (params.spec.output_activation == Activation::Tanh)
                for (double& v : out) v = std::tanh(v);
        } else {
            for (double& v : out) v = v > 0.0 ? v : 0.0;  // ReLU
        }
        acts.push_back(std::move(out));
    }
    return acts;
}

Vec forward(const MlpParams& params, const Vec& x) {
    return forward_cached(params, x).back();
}

MlpGrad grad(const MlpParams& params, const Vec& x, const Vec& upstream) {
    if (int(upstream.size()) != params.spec.output_dim)
        throw ShapeError("grad: upstream length != output_dim");
    auto acts = forward_cached(params, x);
    MlpGrad g = zero_grad(params);

    // delta starts as upstream pushed through the output activation
    Vec delta = upstream;
    if (params.spec.output_activation == Activation::Tanh) {
        const Vec& y = acts.back();
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= (1.0 - y[i] * y[i]);
    }

    for (int li = int(params.layers.size()) - 1; li >= 0; --li) {
        const Layer& l = params.layers[std::size_t(li)];
        Layer& gl = g.layers[std::size_t(li)];
        const Vec& in = acts[std::size_t(li)];
        for (int r = 0; r < l.out_dim; ++r) {
            double d = delta[std::size_t(r)];
            gl.bias[std::size_t(r)] += d;
            double* grow = &gl.weights[std::size_t(r) * l.in_dim];
            for (int c = 0; c < l.in_dim; ++c) grow[c] += d * in[std::size_t(c)];
        }
        Vec prev(std::size_t(l.in_dim), 0.0);
        for (int r = 0; r < l.out_dim; ++r) {
            double d = delta[std::size_t(r)];
            if (d == 0.0) continue;
            const double* wrow = &l.weights[std::size_t(r) * l.in_dim];
            for (int c = 0; c < l.in_dim; ++c) prev[std::size_t(c)] += d * wrow[c];
        }
        if (li > 0) {
            // push through the preceding ReLU: acts[li] is post-activation
            const Vec& post = acts[std::size_t(li)];
            for (std::size_t i = 0; i < prev.size(); ++i)
                if (post[i] <= 0.0) prev[i] = 0.0;
        }
        delta = std::move(prev);
    }
    g.input_grad = delta;
    return g;
}

void adam_step(MlpParams& params, const MlpGrad& g, AdamState& state) {
    if (g.layers.size() != params.layers.size())
        throw ShapeError("adam_step: gradient/param layer mismatch");
    if (!g.finite())
        throw NumericError("adam_step: non-finite gradient");
    long t = state.t + 1;
    double bc1 = 1.0 - std::pow(state.beta1, double(t));
    double bc2 = 1.0 - std::pow(state.beta2, double(t));
    std::size_t k = 0;
    auto update = [&](double& p, double gi) {
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * gi;
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * gi * gi;
        double mhat = state.m[k] / bc1;
        double vhat = state.v[k] / bc2;
        p -= state.lr * mhat / (std::sqrt(vhat) + state.eps_stability);
        ++k;
    };
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        Layer& pl = params.layers[li];
        const Layer& gl = g.layers[li];
        if (gl.weights.size() != pl.weights.size() || gl.bias.size() != pl.bias.size())
            throw ShapeError("adam_step: gradient shape mismatch");
        for (std::size_t i = 0; i < pl.weights.size(); ++i) update(pl.weights[i], gl.weights[i]);
        for (std::size_t i = 0; i < pl.bias.size(); ++i) update(pl.bias[i], gl.bias[i]);
    }
    state.t = t;
}

void soft_update(MlpParams& target, const MlpParams& online, double tau) {
    for (std::size_t li = 0; li < target.layers.size(); ++li) {
        Layer& tl = target.layers[li];
        const Layer& ol = online.layers[li];
        for (std::size_t i = 0; i < tl.weights.size(); ++i)
            tl.weights[i] = tau * ol.weights[i] + (1.0 - tau) * tl.weights[i];
        for (std::size_t i = 0; i < tl.bias.size(); ++i)
            tl.bias[i] = tau * ol.bias[i] + (1.0 - tau) * tl.bias[i];
    }
}

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

void save_mlp(const MlpParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "aftrl-mlp v1\n";
    out << "input_dim " << params.spec.input_dim << "\n";
    out << "hidden";
    for (int h : params.spec.hidden_dims) out << " " << h;
    out << "\n";
    out << "output_dim " << params.spec.output_dim << "\n";
    out << "activation "
        << (params.spec.output_activation == Activation::Tanh ? "tanh" : "identity") << "\n";
    out << "param_count " << params.param_count() << "\n";
    out << "binary\n";
    for (const auto& l : params.layers) {
        out.write(reinterpret_cast<const char*>(l.weights.data()),
                  std::streamsize(l.weights.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(l.bias.data()),
                  std::streamsize(l.bias.size() * sizeof(double)));
    }
    if (!out) throw IoError("write failed: " + path);
}

MlpParams load_mlp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string line, tag;
    auto expect_line = [&](const std::string& what) {
        if (!std::getline(in, line)) throw IoError("truncated checkpoint header (" + what + "): " + path);
        return std::istringstream(line);
    };
    std::getline(in, line);
    if (line != "aftrl-mlp v1") throw IoError("bad checkpoint magic: " + path);
    MlpSpec spec;
    {
        auto ss = expect_line("input_dim");
        ss >> tag >> spec.input_dim;
    }
    {
        auto ss = expect_line("hidden");
        ss >> tag;
        int h;
        while (ss >> h) spec.hidden_dims.push_back(h);
    }
    {
        auto ss = expect_line("output_dim");
        ss >> tag >> spec.output_dim;
    }
    {
        auto ss = expect_line("activation");
        std::string act;
        ss >> tag >> act;
        spec.output_activation = act == "tanh" ? Activation::Tanh : Activation::Identity;
    }
    std::size_t count = 0;
    {
        auto ss = expect_line("param_count");
        ss >> tag >> count;
    }
    expect_line("binary");
    MlpParams p = zero_params(spec);
    if (p.param_count() != count)
        throw IoError("checkpoint param_count mismatch: " + path);
    for (auto& l : p.layers) {
        in.read(reinterpret_cast<char*>(l.weights.data()),
                std::streamsize(l.weights.size() * sizeof(double)));
        in.read(reinterpret_cast<char*>(l.bias.data()),
                std::streamsize(l.bias.size() * sizeof(double)));
    }
    if (!in) throw IoError("truncated checkpoint payload: " + path);
    return p;
}

}  // namespace aftrl
