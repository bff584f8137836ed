#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace aftrl {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void KeyValueConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    parse_text(ss.str(), path);
}

void KeyValueConfig::parse_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (std::size_t hash = value.find('#'); hash != std::string::npos)
            value = trim(value.substr(0, hash));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (key.find('.') == std::string::npos) {
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": key outside any [section]");
            key = section + "." + key;
        }
        values_[key] = value;
    }
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + it->second);
    }
}

long KeyValueConfig::get_long(const std::string& key, long def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    try {
        std::size_t pos = 0;
        long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: " + it->second);
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': not a boolean: " + it->second);
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    const std::vector<double>& def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::vector<double> out;
    std::string norm = it->second;
    for (char& c : norm)
        if (c == ',') c = ' ';
    std::istringstream ss(norm);
    std::string tok;
    while (ss >> tok) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != tok.size())
            throw ConfigError("config key '" + key + "': not a number list: " + it->second);
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              const std::vector<int>& def) const {
    auto doubles = get_double_list(key, {});
    if (doubles.empty()) return def;
    std::vector<int> out;
    for (double d : doubles) out.push_back(int(d));
    return out;
}

PerturbMode parse_perturb_mode(const std::string& s) {
    if (s == "normal") return PerturbMode::Normal;
    if (s == "random") return PerturbMode::Random;
    if (s == "adversarial") return PerturbMode::Adversarial;
    throw ConfigError("unknown perturbation mode: " + s);
}

CurriculumMode parse_curriculum_mode(const std::string& s) {
    if (s == "fixed") return CurriculumMode::Fixed;
    if (s == "linear") return CurriculumMode::Linear;
    if (s == "adaptive") return CurriculumMode::Adaptive;
    throw ConfigError("unknown curriculum mode: " + s);
}

std::string perturb_mode_name(PerturbMode m) {
    switch (m) {
        case PerturbMode::Normal: return "normal";
        case PerturbMode::Random: return "random";
        case PerturbMode::Adversarial: return "adversarial";
    }
    return "?";
}

std::string curriculum_mode_name(CurriculumMode m) {
    switch (m) {
        case CurriculumMode::Fixed: return "fixed";
        case CurriculumMode::Linear: return "linear";
        case CurriculumMode::Adaptive: return "adaptive";
    }
    return "?";
}

CliConfig build_cli_config(const KeyValueConfig& kv) {
    static const std::set<std::string> known = {
        "run.env", "run.seed", "run.runs", "run.out_dir",
        "approx.hidden", "approx.actor_lr", "approx.critic_lr",
        "replay.capacity", "replay.r_off",
        "td3.gamma", "td3.tau", "td3.sigma", "td3.noise_clip", "td3.policy_delay",
        "td3.exploration_noise", "td3.batch_size", "td3.bc_weight", "td3.bc_normalize",
        "td3.bc_alpha",
        "perturb.mode", "perturb.epsilon", "perturb.pool_size", "perturb.de_population",
        "perturb.de_generations", "perturb.de_f", "perturb.de_cr", "perturb.de_episodes",
        "curriculum.mode", "curriculum.q_init", "curriculum.q_max", "curriculum.ramp_intervals", "curriculum.eta",
        "curriculum.beta",
        "pipeline.pretrain_steps", "pipeline.finetune_steps", "pipeline.eval_interval",
        "pipeline.eval_episodes", "pipeline.warmup_steps",
        "data.size", "data.noise", "data.normalizer_episodes",
        "eval.target", "eval.episodes",
        "sweep.q_max_grid", "sweep.beta_grid", "sweep.eta_grid",
    };
    for (const auto& [k, v] : kv.entries())
        if (!known.count(k)) throw ConfigError("unknown config key: " + k);

    CliConfig c;
    c.run.env_name = kv.get_string("run.env", c.run.env_name);
    c.master_seed = std::uint64_t(kv.get_long("run.seed", 0));
    c.runs = int(kv.get_long("run.runs", c.runs));
    if (c.runs < 1) throw ConfigError("run.runs must be >= 1");
    c.out_dir = kv.get_string("run.out_dir", c.out_dir);
    c.run.out_dir = c.out_dir;

    c.run.hidden = kv.get_int_list("approx.hidden", c.run.hidden);
    c.run.hyper.actor_lr = kv.get_double("approx.actor_lr", c.run.hyper.actor_lr);
    c.run.hyper.critic_lr = kv.get_double("approx.critic_lr", c.run.hyper.critic_lr);

    c.run.buffer_capacity = std::size_t(kv.get_long("replay.capacity", long(c.run.buffer_capacity)));
    c.run.r_off = kv.get_double("replay.r_off", c.run.r_off);

    c.run.hyper.gamma = kv.get_double("td3.gamma", c.run.hyper.gamma);
    c.run.hyper.tau = kv.get_double("td3.tau", c.run.hyper.tau);
    c.run.hyper.target_noise_std = kv.get_double("td3.sigma", c.run.hyper.target_noise_std);
    c.run.hyper.noise_clip = kv.get_double("td3.noise_clip", c.run.hyper.noise_clip);
    c.run.hyper.policy_delay = int(kv.get_long("td3.policy_delay", c.run.hyper.policy_delay));
    c.run.hyper.exploration_noise_std =
        kv.get_double("td3.exploration_noise", c.run.hyper.exploration_noise_std);
    c.run.hyper.batch_size = int(kv.get_long("td3.batch_size", c.run.hyper.batch_size));
    c.run.bc_weight = kv.get_double("td3.bc_weight", c.run.bc_weight);
    c.run.hyper.bc_q_normalize = kv.get_bool("td3.bc_normalize", c.run.hyper.bc_q_normalize);
    c.run.hyper.bc_alpha = kv.get_double("td3.bc_alpha", c.run.hyper.bc_alpha);

    c.run.perturb_mode = parse_perturb_mode(kv.get_string("perturb.mode", "adversarial"));
    c.run.epsilon = kv.get_double("perturb.epsilon", c.run.epsilon);
    c.pool_size = int(kv.get_long("perturb.pool_size", c.pool_size));
    c.de.population_size = int(kv.get_long("perturb.de_population", c.de.population_size));
    c.de.generations = int(kv.get_long("perturb.de_generations", c.de.generations));
    c.de.differential_weight = kv.get_double("perturb.de_f", c.de.differential_weight);
    c.de.crossover_rate = kv.get_double("perturb.de_cr", c.de.crossover_rate);
    c.de.fitness_episodes = int(kv.get_long("perturb.de_episodes", c.de.fitness_episodes));
    c.de.fitness_seeds.clear();
    for (int e = 0; e < c.de.fitness_episodes; ++e)
        c.de.fitness_seeds.push_back(std::uint64_t(1000 + e));

    c.run.curriculum_mode = parse_curriculum_mode(kv.get_string("curriculum.mode", "fixed"));
    c.run.q_init = kv.get_double("curriculum.q_init", c.run.q_init);
    c.run.q_max = kv.get_double("curriculum.q_max", c.run.q_max);
    c.run.ramp_intervals = kv.get_long("curriculum.ramp_intervals", c.run.ramp_intervals);
    c.run.eta = kv.get_double("curriculum.eta", c.run.eta);
    c.run.beta = kv.get_double("curriculum.beta", c.run.beta);

    c.run.pretrain_steps = kv.get_long("pipeline.pretrain_steps", c.run.pretrain_steps);
    c.run.finetune_steps = kv.get_long("pipeline.finetune_steps", c.run.finetune_steps);
    c.run.eval_interval = kv.get_long("pipeline.eval_interval", c.run.eval_interval);
    c.run.eval_episodes = int(kv.get_long("pipeline.eval_episodes", c.run.eval_episodes));
    c.run.warmup_steps = kv.get_long("pipeline.warmup_steps", c.run.warmup_steps);

    c.dataset_size = kv.get_long("data.size", c.dataset_size);
    c.collect_noise = kv.get_double("data.noise", c.collect_noise);
    c.normalizer_episodes = int(kv.get_long("data.normalizer_episodes", c.normalizer_episodes));

    c.eval_target = kv.get_string("eval.target", c.eval_target);
    if (c.eval_target != "pretrain" && c.eval_target != "finetune")
        throw ConfigError("eval.target must be 'pretrain' or 'finetune'");
    c.eval_report_episodes = int(kv.get_long("eval.episodes", c.eval_report_episodes));

    c.q_max_grid = kv.get_double_list("sweep.q_max_grid", c.q_max_grid);
    c.beta_grid = kv.get_double_list("sweep.beta_grid", c.beta_grid);
    c.eta_grid = kv.get_double_list("sweep.eta_grid", c.eta_grid);

    c.run.validate();
    return c;
}

}  // namespace aftrl
