#pragma once

// Regret accounting against the exact optimal value, and visit coverage.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gea/mdp.hpp"
#include "gea/visits.hpp"

namespace gea {

struct InstantRegret {
    double value = 0.0;  // V*(s0) - V^eta(s0), clipped at 0
    bool clipped = false;  // raw value was below -2 tol
};

// Exact V*(s0) - V^eta(s0) through `evaluator`. Small negative values from
// evaluation error are set to 0; values below -2 tol also set `clipped`.
InstantRegret regret_update(PolicyEvaluator& evaluator, const StochasticPolicy& eta, double v_star_s0, StateId s0,
                            double tol);

// Per-agent instantaneous regret per episode and its running sums.
// Evaluations arrive at increasing episode indices; episodes in between
// are filled by linear interpolation between the two evaluated neighbors.
class RegretLedger {
  public:
    RegretLedger() : RegretLedger(1, 0) {}
    RegretLedger(std::size_t num_agents, std::size_t num_episodes);

    // Records the exact instantaneous regret of every agent at `episode`.
    // The first call must be for episode 0.
    void add_evaluation(std::size_t episode, std::span<const double> per_agent);
    void note_clipped() { ++clipped_; }

    std::size_t num_agents() const noexcept { return num_agents_; }
    std::size_t num_episodes() const noexcept { return num_episodes_; }
    // Episodes [0, filled()) have values.
    std::size_t filled() const noexcept { return filled_; }
    std::size_t clipped_count() const noexcept { return clipped_; }

    double instant(std::size_t episode, std::size_t agent) const;
    double cumulative(std::size_t episode, std::size_t agent) const;
    // Regret(T): mean over agents of the per-agent cumulative sums.
    double total(std::size_t episode) const;
    double mean_instant(std::size_t episode) const;

  private:
    std::size_t num_agents_;
    std::size_t num_episodes_;
    std::size_t filled_ = 0;
    std::size_t clipped_ = 0;
    std::vector<double> instant_;     // episode-major, E x K
    std::vector<double> cumulative_;  // episode-major, E x K
    std::vector<double> last_eval_;
};

// Episodes at which the exact evaluation runs: every `cadence` episodes and
// always the last one.
bool is_evaluation_episode(std::size_t episode, std::size_t num_episodes, std::size_t cadence);
// 1 for depth <= 10, 5 above.
std::size_t default_eval_cadence(std::size_t depth);

struct CoverageReport {
    double fraction = 0.0;  // share of (agent, state, action) with count >= threshold
    std::uint64_t min_count = 0;
    double mean_count = 0.0;
    std::vector<std::uint64_t> per_state;  // c(s) summed over agents
};

// Summary over the given counters. `state_mask` (optional, length S)
// restricts the states considered; per_state still covers all states.
CoverageReport coverage_report(std::span<const VisitCounter> counters, std::uint64_t threshold,
                               const std::vector<bool>* state_mask = nullptr);

}  // namespace gea
