#include "replay.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace aftrl {

void ReplayBuffer::push(const Transition& t) {
    data_.push_back(t);
    ++inserted_;
    if (data_.size() > capacity_) data_.pop_front();
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    if (data_.empty()) throw std::logic_error("ReplayBuffer::sample: empty buffer");
    std::vector<Transition> batch;
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i)
        batch.push_back(data_[rng.uniform_int(data_.size())]);
    return batch;
}

void init_with_offline(ReplayBuffer& buffer, const OfflineDataset& dataset, double r_off,
                       Rng& rng) {
    if (!(r_off >= 0.0 && r_off <= 1.0))
        throw ConfigError("r_off must be in [0,1]");
    std::size_t n = dataset.transitions.size();
    std::size_t take = std::size_t(r_off * double(n));
    take = std::min(take, n);
    // partial Fisher-Yates over an index vector: uniform without replacement
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < take; ++i) {
        std::size_t j = i + std::size_t(rng.uniform_int(n - i));
        std::swap(idx[i], idx[j]);
        buffer.push(dataset.transitions[idx[i]]);
    }
}

static void write_vec_hex(std::string& line, const Vec& v) {
    char buf[40];
    for (double x : v) {
        std::snprintf(buf, sizeof(buf), " %a", x);
        line += buf;
    }
}

void save_dataset(const OfflineDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    std::size_t obs_dim = dataset.transitions.empty() ? 0 : dataset.transitions.front().s.size();
    std::size_t act_dim = dataset.transitions.empty() ? 0 : dataset.transitions.front().a.size();
    nlohmann::json meta = {
        {"format", "aftrl-dataset-v1"},
        {"env", dataset.meta.env},
        {"policy", dataset.meta.policy_tag},
        {"seed", dataset.meta.seed},
        {"count", dataset.transitions.size()},
        {"obs_dim", obs_dim},
        {"action_dim", act_dim},
    };
    out << meta.dump() << "\n";
    char buf[40];
    for (const auto& t : dataset.transitions) {
        std::string line;
        write_vec_hex(line, t.s);
        write_vec_hex(line, t.a);
        std::snprintf(buf, sizeof(buf), " %a", t.r);
        line += buf;
        write_vec_hex(line, t.s_next);
        line += t.done ? " 1" : " 0";
        out << line.substr(1) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

OfflineDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ":1: bad metadata header: " + e.what());
    }
    if (meta.value("format", "") != "aftrl-dataset-v1")
        throw IoError(path + ":1: unknown dataset format");
    OfflineDataset ds;
    ds.meta.env = meta.value("env", "");
    ds.meta.policy_tag = meta.value("policy", "");
    ds.meta.seed = meta.value("seed", std::uint64_t{0});
    ds.meta.count = meta.value("count", std::size_t{0});
    std::size_t obs_dim = meta.value("obs_dim", std::size_t{0});
    std::size_t act_dim = meta.value("action_dim", std::size_t{0});
    std::size_t fields = 2 * obs_dim + act_dim + 2;

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Transition t;
        const char* p = line.c_str();
        char* end = nullptr;
        std::vector<double> vals;
        vals.reserve(fields);
        while (true) {
            double x = std::strtod(p, &end);
            if (end == p) break;
            vals.push_back(x);
            p = end;
        }
        if (vals.size() != fields)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(fields) + " fields, got " + std::to_string(vals.size()));
        auto it = vals.begin();
        t.s.assign(it, it + obs_dim);
        it += obs_dim;
        t.a.assign(it, it + act_dim);
        it += act_dim;
        t.r = *it++;
        t.s_next.assign(it, it + obs_dim);
        it += obs_dim;
        t.done = *it != 0.0;
        ds.transitions.push_back(std::move(t));
    }
    if (ds.transitions.size() != ds.meta.count)
        throw IoError(path + ": truncated: header count " + std::to_string(ds.meta.count) +
                      " but " + std::to_string(ds.transitions.size()) + " records");
    return ds;
}

}  // namespace aftrl
