#pragma once

// Comparison learners: Q-learning with a count-based, graph-weighted UCB
// bonus, and independent epsilon-greedy Q-learning.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gea/exploration.hpp"
#include "gea/learners.hpp"
#include "gea/mdp.hpp"
#include "gea/rng.hpp"
#include "gea/visits.hpp"

namespace gea {

struct GucbParams {
    double beta_const = 0.1;
    double horizon = 1.0;
    double iota = 1.0;
    std::vector<double> weights;  // w_k per agent

    void validate() const;
};

// beta_const * sqrt(H^3 iota / (w_k max(count, 1)))
double gucb_bonus(const GucbParams& p, std::size_t agent, std::uint64_t count);

// Untried actions (count 0) first, lowest index; otherwise argmax of
// Q + bonus with lowest-index ties.
ActionId gucb_action(std::span<const double> q_row, std::span<const std::uint64_t> counts, const GucbParams& p,
                     std::size_t agent);

struct BaselineStepResult {
    ActionId action = 0;
    double reward = 0.0;
    StateId next = 0;
    double delta = 0.0;
};

// `neighborhood_counts` are the counts c(s, .) summed over the agent's
// neighborhood as published at the start of the iteration.
BaselineStepResult gucb_step(QTable& own, std::span<const std::uint64_t> neighborhood_counts, StateId s,
                             const TabularMdp& mdp, const StepSchedule& schedule, VisitCounter& visits,
                             const GucbParams& params, std::size_t agent, Rng& rng);

BaselineStepResult epsilon_greedy_step(QTable& own, StateId s, const TabularMdp& mdp, const StepSchedule& schedule,
                                       VisitCounter& visits, double epsilon, Rng& rng);

}  // namespace gea
