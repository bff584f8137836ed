#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace aftrl {

// One environment step. `a` is the policy's pre-perturbation action; `r` and
// `s_next` come from the executed (possibly perturbed) action. `done` marks
// failure-predicate termination only; horizon exhaustion bootstraps through.
struct Transition {
    Vec s;
    Vec a;
    double r = 0.0;
    Vec s_next;
    bool done = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 1'000'000) : capacity_(capacity) {}

    void push(const Transition& t);
    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t inserted() const { return inserted_; }
    const Transition& at(std::size_t i) const { return data_[i]; }

private:
    std::size_t capacity_;
    std::uint64_t inserted_ = 0;
    std::deque<Transition> data_;
};

struct DatasetMeta {
    std::string env;
    std::string policy_tag;
    std::uint64_t seed = 0;
    std::size_t count = 0;
};

struct OfflineDataset {
    DatasetMeta meta;
    std::vector<Transition> transitions;
};

// Inserts exactly floor(r_off * |dataset|) transitions, sampled uniformly
// without replacement, before any online data.
void init_with_offline(ReplayBuffer& buffer, const OfflineDataset& dataset, double r_off,
                       Rng& rng);

// Line-delimited text format with a JSON metadata header line; floats are
// written as hexfloats so round trips are bit-exact.
void save_dataset(const OfflineDataset& dataset, const std::string& path);
OfflineDataset load_dataset(const std::string& path);

}  // namespace aftrl
