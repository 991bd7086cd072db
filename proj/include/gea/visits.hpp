#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gea/mdp.hpp"

namespace gea {

// Per-agent visit counts c(s,a) and c(s) = sum_a c(s,a).
class VisitCounter {
  public:
    VisitCounter() = default;
    VisitCounter(std::size_t num_states, std::size_t num_actions)
        : num_actions_(num_actions), pair_(num_states * num_actions, 0), state_(num_states, 0) {}

    // Counts one visit of (s, a); returns the new c(s, a).
    std::uint64_t record(StateId s, ActionId a) {
        ++state_.at(s);
        return ++pair_.at(s * num_actions_ + a);
    }

    std::uint64_t pair_visits(StateId s, ActionId a) const { return pair_.at(s * num_actions_ + a); }
    std::uint64_t state_visits(StateId s) const { return state_.at(s); }
    std::size_t num_states() const noexcept { return state_.size(); }
    std::size_t num_actions() const noexcept { return num_actions_; }
    const std::vector<std::uint64_t>& pair_counts() const noexcept { return pair_; }

  private:
    std::size_t num_actions_ = 0;
    std::vector<std::uint64_t> pair_;
    std::vector<std::uint64_t> state_;
};

}  // namespace gea
