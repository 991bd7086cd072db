#pragma once

// Finite discounted MDPs, the deep-sea benchmark, and exact dynamic
// programming (value iteration and policy evaluation) used as the oracle for
// optimal values and regret.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gea/rng.hpp"

namespace gea {

using StateId = std::size_t;
using ActionId = std::size_t;

struct RewardBounds {
    double min = 0.0;
    double max = 0.0;

    bool operator==(const RewardBounds&) const = default;
};

// Immutable after construction; safe to share across simulation workers.
class TabularMdp {
  public:
    // `transition` and `reward` are row-major S x A x S tensors.
    TabularMdp(std::size_t num_states, std::size_t num_actions, std::vector<double> transition,
               std::vector<double> reward, double discount, StateId initial_state,
               std::vector<StateId> terminal_states = {});

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    double discount() const noexcept { return discount_; }
    StateId initial_state() const noexcept { return initial_state_; }
    bool is_terminal(StateId s) const { return terminal_.at(s) != 0; }
    const std::vector<StateId>& terminal_states() const noexcept { return terminal_list_; }

    double probability(StateId s, ActionId a, StateId next) const;
    double reward(StateId s, ActionId a, StateId next) const;
    std::span<const double> transition_row(StateId s, ActionId a) const;
    std::span<const double> reward_row(StateId s, ActionId a) const;
    // sum_s' P(s'|s,a) r(s,a,s')
    double expected_reward(StateId s, ActionId a) const { return expected_reward_[s * num_actions_ + a]; }
    RewardBounds reward_bounds() const noexcept { return bounds_; }

    void check_state(StateId s) const;
    void check_action(ActionId a) const;

    bool operator==(const TabularMdp&) const = default;

  private:
    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<double> transition_;
    std::vector<double> reward_;
    std::vector<double> expected_reward_;
    double discount_;
    StateId initial_state_;
    std::vector<std::uint8_t> terminal_;
    std::vector<StateId> terminal_list_;
    RewardBounds bounds_;
};

// Deep sea: an H x H grid plus one absorbing terminal state. The agent starts
// at (0, 0) and descends one row per step; only the all-RIGHT path reaches
// the treasure at (H-1, H-1).
struct DeepSeaSpec {
    std::size_t depth = 0;
    std::optional<double> move_right_cost;  // defaults to 0.01 / depth
    double treasure_reward = 1.0;
    double discount = 0.99;

    double right_cost() const { return move_right_cost.value_or(0.01 / static_cast<double>(depth)); }
};

inline constexpr ActionId kLeft = 0;
inline constexpr ActionId kRight = 1;

constexpr StateId deep_sea_state(std::size_t depth, std::size_t row, std::size_t col) { return row * depth + col; }
constexpr StateId deep_sea_terminal(std::size_t depth) { return depth * depth; }

TabularMdp deep_sea_build(const DeepSeaSpec& spec);

struct Transition {
    StateId next;
    double reward;
};

// Samples s' ~ P(.|s,a). Terminal states return (s, 0) without touching rng.
Transition mdp_step(const TabularMdp& mdp, StateId s, ActionId a, Rng& rng);

struct DeterministicPolicy {
    std::vector<ActionId> actions;
};

// Row-major S x A matrix of probabilities pi(a|s).
class StochasticPolicy {
  public:
    StochasticPolicy(std::size_t num_states, std::size_t num_actions);
    StochasticPolicy(std::size_t num_states, std::size_t num_actions, std::vector<double> probs);
    static StochasticPolicy from_deterministic(const DeterministicPolicy& p, std::size_t num_actions);
    static StochasticPolicy uniform(std::size_t num_states, std::size_t num_actions);

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    std::span<const double> row(StateId s) const { return {probs_.data() + s * num_actions_, num_actions_}; }
    std::span<double> row(StateId s) { return {probs_.data() + s * num_actions_, num_actions_}; }
    double operator()(StateId s, ActionId a) const { return probs_[s * num_actions_ + a]; }
    const std::vector<double>& data() const noexcept { return probs_; }

    // Throws ValidationError unless every row is a distribution (1e-12).
    void validate() const;

  private:
    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<double> probs_;
};

struct OptimalSolution {
    std::vector<double> values;    // V*
    std::vector<double> q_values;  // Q*, row-major S x A
    DeterministicPolicy policy;    // greedy on Q*, lowest index on ties
    std::size_t sweeps = 0;

    double q(StateId s, ActionId a, std::size_t num_actions) const { return q_values[s * num_actions + a]; }
};

OptimalSolution value_iteration(const TabularMdp& mdp, double tol);

// |V(s) - max_a sum_s' P(s'|s,a)(r + gamma V(s'))| maximized over s.
double bellman_optimality_residual(const TabularMdp& mdp, std::span<const double> values);

// Actions whose Q* is within `tol` of the best; used where optimal actions tie.
std::vector<std::vector<ActionId>> optimal_action_sets(const TabularMdp& mdp, const OptimalSolution& sol,
                                                       double tol = 1e-9);

enum class EvaluationMethod { iterative, direct };

// Reusable buffers for repeated exact evaluation of changing policies.
class PolicyEvaluator {
  public:
    explicit PolicyEvaluator(const TabularMdp& mdp);

    // Solves V = r_pi + gamma P_pi V. Iterative sweeps stop once the
    // sup-norm change is below tol * (1 - gamma), which bounds the error by tol.
    const std::vector<double>& evaluate(const StochasticPolicy& policy, double tol,
                                        EvaluationMethod method = EvaluationMethod::iterative);
    std::size_t last_sweeps() const noexcept { return sweeps_; }

  private:
    void build_policy_model(const StochasticPolicy& policy);

    const TabularMdp* mdp_;
    std::vector<double> p_pi_;
    std::vector<double> r_pi_;
    std::vector<double> values_;
    std::vector<double> next_;
    std::size_t sweeps_ = 0;
};

std::vector<double> policy_evaluation(const TabularMdp& mdp, const StochasticPolicy& policy, double tol,
                                      EvaluationMethod method = EvaluationMethod::iterative);

// Dirichlet(1) rows (all entries strictly positive) and per-(s,a) rewards in
// [0, 1]; a (1 - reward_sparsity) fraction of (s,a) pairs get reward 0.
TabularMdp random_mdp(std::size_t num_states, std::size_t num_actions, double reward_sparsity, std::uint64_t seed,
                      double discount = 0.9);

// States with positive probability of being reached from `from`, following
// `policy` when given and any action otherwise.
std::vector<bool> reachable_states(const TabularMdp& mdp, StateId from,
                                   const DeterministicPolicy* policy = nullptr);

}  // namespace gea
