#include "td3.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace aftrl {

void Td3Hyper::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("td3: gamma must be in (0,1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("td3: tau must be in (0,1]");
    if (noise_clip < 0.0) throw ConfigError("td3: noise_clip must be >= 0");
    if (policy_delay < 1) throw ConfigError("td3: policy_delay must be >= 1");
    if (exploration_noise_std < 0.0) throw ConfigError("td3: exploration noise must be >= 0");
    if (batch_size < 1) throw ConfigError("td3: batch_size must be >= 1");
}

AgentState make_agent(int obs_dim, int action_dim, const std::vector<int>& hidden,
                      const Td3Hyper& h, Rng& rng) {
    h.validate();
    MlpSpec actor_spec{obs_dim, hidden, action_dim, Activation::Tanh};
    MlpSpec critic_spec{obs_dim + action_dim, hidden, 1, Activation::Identity};
    AgentState a;
    a.actor = init_params(actor_spec, rng);
    a.critic1 = init_params(critic_spec, rng);
    a.critic2 = init_params(critic_spec, rng);
    a.actor_target = a.actor;
    a.critic1_target = a.critic1;
    a.critic2_target = a.critic2;
    a.actor_opt = make_adam(a.actor, h.actor_lr);
    a.critic1_opt = make_adam(a.critic1, h.critic_lr);
    a.critic2_opt = make_adam(a.critic2, h.critic_lr);
    return a;
}

static Vec concat_sa(const Vec& s, const Vec& a) {
    Vec x;
    x.reserve(s.size() + a.size());
    x.insert(x.end(), s.begin(), s.end());
    x.insert(x.end(), a.begin(), a.end());
    return x;
}

Vec compute_target(const AgentState& agent, const Td3Hyper& h,
                   const std::vector<Transition>& batch, Rng& rng) {
    if (batch.empty()) throw std::logic_error("compute_target: empty batch");
    Vec y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Transition& t = batch[i];
        Vec a_next = forward(agent.actor_target, t.s_next);
        for (double& ai : a_next) {
            double eps = rng.normal(0.0, h.target_noise_std);
            eps = clip(eps, -h.noise_clip, h.noise_clip);
            ai = clip(ai + eps, -1.0, 1.0);
        }
        Vec sa = concat_sa(t.s_next, a_next);
        double q1 = forward(agent.critic1_target, sa)[0];
        double q2 = forward(agent.critic2_target, sa)[0];
        y[i] = t.r + h.gamma * (t.done ? 0.0 : 1.0) * std::min(q1, q2);
    }
    return y;
}

void critic_update(AgentState& agent, const Td3Hyper& h, const std::vector<Transition>& batch,
                   Rng& rng) {
    Vec y = compute_target(agent, h, batch, rng);
    const double inv_n = 1.0 / double(batch.size());
    auto update_one = [&](MlpParams& critic, AdamState& opt) {
        MlpGrad g = zero_grad(critic);
        double loss = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            Vec sa = concat_sa(batch[i].s, batch[i].a);
            double q = forward(critic, sa)[0];
            double diff = q - y[i];
            loss += diff * diff * inv_n;
            // d/dq of mean squared error
            g.add_scaled(grad(critic, sa, {2.0 * diff * inv_n}), 1.0);
        }
        if (!std::isfinite(loss)) throw NumericError("critic_update: non-finite loss");
        adam_step(critic, g, opt);
    };
    update_one(agent.critic1, agent.critic1_opt);
    update_one(agent.critic2, agent.critic2_opt);
    ++agent.update_count;
}

static void soft_update_targets(AgentState& agent, double tau) {
    soft_update(agent.actor_target, agent.actor, tau);
    soft_update(agent.critic1_target, agent.critic1, tau);
    soft_update(agent.critic2_target, agent.critic2, tau);
}

// Shared deterministic-policy-gradient step; bc_weight = 0 gives plain TD3.
static void actor_step(AgentState& agent, const Td3Hyper& h, const std::vector<Transition>& batch,
                       double bc_weight) {
    if (agent.update_count % h.policy_delay != 0) return;
    const double inv_n = 1.0 / double(batch.size());

    double q_scale = 1.0;
    if (h.bc_q_normalize && bc_weight != 0.0) {
        double abs_q = 0.0;
        for (const auto& t : batch) {
            Vec a = forward(agent.actor, t.s);
            abs_q += std::abs(forward(agent.critic1, concat_sa(t.s, a))[0]);
        }
        abs_q *= inv_n;
        if (abs_q > 0.0) q_scale = h.bc_alpha / abs_q;
    }

    MlpGrad g = zero_grad(agent.actor);
    for (const auto& t : batch) {
        Vec a = forward(agent.actor, t.s);
        Vec sa = concat_sa(t.s, a);
        // dQ1/da, taken from the critic's input gradient
        MlpGrad cg = grad(agent.critic1, sa, {1.0});
        Vec upstream(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            double dq_da = cg.input_grad[t.s.size() + j];
            double bc = 2.0 * bc_weight * (a[j] - t.a[j]);
            // descent on -(q_scale * Q - bc_weight * |pi - a|^2)
            upstream[j] = -(q_scale * dq_da - bc) * inv_n;
        }
        g.add_scaled(grad(agent.actor, t.s, upstream), 1.0);
    }
    adam_step(agent.actor, g, agent.actor_opt);
    soft_update_targets(agent, h.tau);
}

void actor_update_td3(AgentState& agent, const Td3Hyper& h,
                      const std::vector<Transition>& batch) {
    actor_step(agent, h, batch, 0.0);
}

void actor_update_td3bc(AgentState& agent, const Td3Hyper& h,
                        const std::vector<Transition>& batch, double bc_weight) {
    actor_step(agent, h, batch, bc_weight);
}

Vec select_action(const AgentState& agent, const Vec& obs, bool explore, const Td3Hyper& h,
                  Rng& rng) {
    Vec a = forward(agent.actor, obs);
    if (explore && h.exploration_noise_std > 0.0) {
        for (double& ai : a) ai = clip(ai + rng.normal(0.0, h.exploration_noise_std), -1.0, 1.0);
    }
    return a;
}

static void write_doubles(std::ofstream& out, const Vec& v) {
    std::size_t n = v.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(n * sizeof(double)));
}

static Vec read_doubles(std::ifstream& in) {
    std::size_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    Vec v(n);
    in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
    return v;
}

static void save_adam(const AdamState& s, std::ofstream& out) {
    write_doubles(out, s.m);
    write_doubles(out, s.v);
    out.write(reinterpret_cast<const char*>(&s.t), sizeof(s.t));
}

static AdamState load_adam(std::ifstream& in, double lr) {
    AdamState s;
    s.m = read_doubles(in);
    s.v = read_doubles(in);
    in.read(reinterpret_cast<char*>(&s.t), sizeof(s.t));
    s.lr = lr;
    return s;
}

static const char* kNetNames[6] = {"actor",         "critic1",        "critic2",
                                   "actor_target",  "critic1_target", "critic2_target"};

void save_agent(const AgentState& agent, const Td3Hyper& h, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    const MlpParams* nets[6] = {&agent.actor,        &agent.critic1,        &agent.critic2,
                                &agent.actor_target, &agent.critic1_target, &agent.critic2_target};
    nlohmann::json manifest;
    manifest["format"] = "aftrl-agent-v1";
    manifest["update_count"] = agent.update_count;
    manifest["hyper"] = {{"gamma", h.gamma},
                         {"tau", h.tau},
                         {"target_noise_std", h.target_noise_std},
                         {"noise_clip", h.noise_clip},
                         {"policy_delay", h.policy_delay},
                         {"exploration_noise_std", h.exploration_noise_std},
                         {"batch_size", h.batch_size},
                         {"actor_lr", h.actor_lr},
                         {"critic_lr", h.critic_lr},
                         {"bc_q_normalize", h.bc_q_normalize},
                         {"bc_alpha", h.bc_alpha}};
    nlohmann::json nets_json = nlohmann::json::array();
    for (int i = 0; i < 6; ++i) {
        std::string fname = std::string(kNetNames[i]) + ".mlp";
        save_mlp(*nets[i], dir + "/" + fname);
        nets_json.push_back({{"name", kNetNames[i]}, {"file", fname}});
    }
    manifest["networks"] = nets_json;
    manifest["adam_file"] = "adam.bin";
    {
        std::ofstream out(dir + "/manifest.json");
        if (!out) throw IoError("cannot write manifest: " + dir);
        out << manifest.dump(2) << "\n";
    }
    std::ofstream ad(dir + "/adam.bin", std::ios::binary);
    if (!ad) throw IoError("cannot write adam state: " + dir);
    save_adam(agent.actor_opt, ad);
    save_adam(agent.critic1_opt, ad);
    save_adam(agent.critic2_opt, ad);
}

std::pair<AgentState, Td3Hyper> load_agent(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw IoError("cannot open manifest: " + dir + "/manifest.json");
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(dir + "/manifest.json: " + e.what());
    }
    if (manifest.value("format", "") != "aftrl-agent-v1")
        throw IoError(dir + ": unknown agent checkpoint format");
    Td3Hyper h;
    const auto& hj = manifest.at("hyper");
    h.gamma = hj.value("gamma", h.gamma);
    h.tau = hj.value("tau", h.tau);
    h.target_noise_std = hj.value("target_noise_std", h.target_noise_std);
    h.noise_clip = hj.value("noise_clip", h.noise_clip);
    h.policy_delay = hj.value("policy_delay", h.policy_delay);
    h.exploration_noise_std = hj.value("exploration_noise_std", h.exploration_noise_std);
    h.batch_size = hj.value("batch_size", h.batch_size);
    h.actor_lr = hj.value("actor_lr", h.actor_lr);
    h.critic_lr = hj.value("critic_lr", h.critic_lr);
    h.bc_q_normalize = hj.value("bc_q_normalize", h.bc_q_normalize);
    h.bc_alpha = hj.value("bc_alpha", h.bc_alpha);

    AgentState a;
    MlpParams* nets[6] = {&a.actor,        &a.critic1,        &a.critic2,
                          &a.actor_target, &a.critic1_target, &a.critic2_target};
    for (int i = 0; i < 6; ++i) *nets[i] = load_mlp(dir + "/" + std::string(kNetNames[i]) + ".mlp");
    a.update_count = manifest.value("update_count", 0L);
    std::ifstream ad(dir + "/adam.bin", std::ios::binary);
    if (!ad) throw IoError("cannot open adam state: " + dir + "/adam.bin");
    a.actor_opt = load_adam(ad, h.actor_lr);
    a.critic1_opt = load_adam(ad, h.critic_lr);
    a.critic2_opt = load_adam(ad, h.critic_lr);
    if (!ad) throw IoError("truncated adam state: " + dir + "/adam.bin");
    return {std::move(a), h};
}

std::uint64_t agent_param_hash(const AgentState& agent) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&](const MlpParams& p) {
        for (const auto& l : p.layers) {
            auto feed = [&](const Vec& v) {
                for (double d : v) {
                    std::uint64_t bits;
                    std::memcpy(&bits, &d, sizeof(bits));
                    for (int b = 0; b < 8; ++b) {
                        hash ^= (bits >> (8 * b)) & 0xff;
                        hash *= 0x100000001b3ULL;
                    }
                }
            };
            feed(l.weights);
            feed(l.bias);
        }
    };
    mix(agent.actor);
    mix(agent.critic1);
    mix(agent.critic2);
    mix(agent.actor_target);
    mix(agent.critic1_target);
    mix(agent.critic2_target);
    return hash;
}

}  // namespace aftrl
