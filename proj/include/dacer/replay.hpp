#pragma once

#include <cstddef>
#include <vector>

#include "dacer/errors.hpp"
#include "dacer/rng.hpp"

namespace dacer {

struct Transition {
    std::vector<double> s;  // state
    std::vector<double> a;  // action as executed (post exploration noise)
    double r = 0.0;         // stored reward (already scaled)
    std::vector<double> s2; // next state
    double done = 0.0;      // 1 = terminal for bootstrapping, 0 otherwise
};

// Fixed-capacity ring with uniform with-replacement sampling.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw ConfigError("replay: capacity must be positive");
        storage_.reserve(capacity < 4096 ? capacity : 4096);
    }

    void push(Transition t) {
        if (storage_.size() < capacity_) {
            storage_.push_back(std::move(t));
        } else {
            storage_[cursor_] = std::move(t);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    size_t size() const { return storage_.size(); }
    size_t capacity() const { return capacity_; }
    const Transition& at(size_t i) const { return storage_[i]; }

    std::vector<const Transition*> sample(size_t n, Rng& rng) const {
        if (storage_.size() < n)
            throw ContractError("replay: asked for " + std::to_string(n) + " samples but only " +
                                std::to_string(storage_.size()) + " stored");
        std::vector<const Transition*> out(n);
        for (size_t i = 0; i < n; ++i)
            out[i] = &storage_[rng.uniform_int(storage_.size())];
        return out;
    }

  private:
    size_t capacity_;
    size_t cursor_ = 0;
    std::vector<Transition> storage_;
};

} // namespace dacer
