#include "gea/mdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "gea/errors.hpp"
#include "gea/kernels.hpp"

namespace gea {

namespace {
constexpr double kRowTol = 1e-12;
}

TabularMdp::TabularMdp(std::size_t num_states, std::size_t num_actions, std::vector<double> transition,
                       std::vector<double> reward, double discount, StateId initial_state,
                       std::vector<StateId> terminal_states)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      discount_(discount),
      initial_state_(initial_state),
      terminal_(num_states, 0),
      terminal_list_(std::move(terminal_states)) {
    if (num_states == 0 || num_actions == 0) throw InvalidSpec("MDP needs at least one state and one action");
    const std::size_t n = num_states * num_actions * num_states;
    if (transition_.size() != n || reward_.size() != n)
        throw InvalidSpec("transition and reward tensors must have shape S x A x S");
    if (!(discount > 0.0 && discount < 1.0)) throw InvalidSpec("discount must lie in (0, 1)");
    if (initial_state >= num_states) throw InvalidSpec("initial state out of range");

    std::sort(terminal_list_.begin(), terminal_list_.end());
    terminal_list_.erase(std::unique(terminal_list_.begin(), terminal_list_.end()), terminal_list_.end());
    for (StateId t : terminal_list_) {
        if (t >= num_states) throw InvalidSpec("terminal state out of range");
        terminal_[t] = 1;
    }

    bounds_ = {reward_[0], reward_[0]};
    expected_reward_.assign(num_states * num_actions, 0.0);
    for (StateId s = 0; s < num_states; ++s) {
        for (ActionId a = 0; a < num_actions; ++a) {
            const auto p = transition_row(s, a);
            const auto r = reward_row(s, a);
            double total = 0.0;
            for (StateId t = 0; t < num_states; ++t) {
                if (!(p[t] >= 0.0) || !std::isfinite(p[t]))
                    throw InvalidSpec("negative or non-finite transition probability at state " + std::to_string(s));
                if (!std::isfinite(r[t])) throw InvalidSpec("non-finite reward at state " + std::to_string(s));
                total += p[t];
                bounds_.min = std::min(bounds_.min, r[t]);
                bounds_.max = std::max(bounds_.max, r[t]);
            }
            if (std::fabs(total - 1.0) > kRowTol)
                throw InvalidSpec("transition row (" + std::to_string(s) + ", " + std::to_string(a) +
                                  ") does not sum to 1");
            if (terminal_[s] && p[s] != 1.0) throw InvalidSpec("terminal state " + std::to_string(s) + " is not absorbing");
            expected_reward_[s * num_actions + a] = kernels::dot(p, r);
        }
    }
}

void TabularMdp::check_state(StateId s) const {
    if (s >= num_states_) throw IndexError("state " + std::to_string(s) + " out of range");
}

void TabularMdp::check_action(ActionId a) const {
    if (a >= num_actions_) throw IndexError("action " + std::to_string(a) + " out of range");
}

double TabularMdp::probability(StateId s, ActionId a, StateId next) const {
    check_state(s);
    check_action(a);
    check_state(next);
    return transition_[(s * num_actions_ + a) * num_states_ + next];
}

double TabularMdp::reward(StateId s, ActionId a, StateId next) const {
    check_state(s);
    check_action(a);
    check_state(next);
    return reward_[(s * num_actions_ + a) * num_states_ + next];
}

std::span<const double> TabularMdp::transition_row(StateId s, ActionId a) const {
    return {transition_.data() + (s * num_actions_ + a) * num_states_, num_states_};
}

std::span<const double> TabularMdp::reward_row(StateId s, ActionId a) const {
    return {reward_.data() + (s * num_actions_ + a) * num_states_, num_states_};
}

TabularMdp deep_sea_build(const DeepSeaSpec& spec) {
    const std::size_t h = spec.depth;
    if (h < 2) throw InvalidSpec("deep sea depth must be at least 2");
    const double cost = spec.right_cost();
    if (!(cost >= 0.0) || !std::isfinite(cost)) throw InvalidSpec("move_right_cost must be finite and >= 0");
    if (!std::isfinite(spec.treasure_reward)) throw InvalidSpec("treasure_reward must be finite");

    const std::size_t num_states = h * h + 1;
    const StateId terminal = deep_sea_terminal(h);
    std::vector<double> p(num_states * 2 * num_states, 0.0);
    std::vector<double> r(p.size(), 0.0);
    auto at = [&](StateId s, ActionId a, StateId t) { return (s * 2 + a) * num_states + t; };

    for (std::size_t row = 0; row < h; ++row) {
        for (std::size_t col = 0; col < h; ++col) {
            const StateId s = deep_sea_state(h, row, col);
            if (row + 1 == h) {
                const double payoff = (col + 1 == h) ? spec.treasure_reward : 0.0;
                for (ActionId a : {kLeft, kRight}) {
                    p[at(s, a, terminal)] = 1.0;
                    r[at(s, a, terminal)] = payoff;
                }
                continue;
            }
            const StateId left = deep_sea_state(h, row + 1, col == 0 ? 0 : col - 1);
            const StateId right = deep_sea_state(h, row + 1, std::min(col + 1, h - 1));
            p[at(s, kLeft, left)] = 1.0;
            p[at(s, kRight, right)] = 1.0;
            r[at(s, kRight, right)] = -cost;
        }
    }
    for (ActionId a : {kLeft, kRight}) p[at(terminal, a, terminal)] = 1.0;

    return TabularMdp(num_states, 2, std::move(p), std::move(r), spec.discount, deep_sea_state(h, 0, 0), {terminal});
}

Transition mdp_step(const TabularMdp& mdp, StateId s, ActionId a, Rng& rng) {
    mdp.check_state(s);
    mdp.check_action(a);
    if (mdp.is_terminal(s)) return {s, 0.0};
    const auto row = mdp.transition_row(s, a);
    const double u = rng.uniform01();
    double cumulative = 0.0;
    StateId last_positive = 0;
    for (StateId t = 0; t < row.size(); ++t) {
        if (row[t] <= 0.0) continue;
        last_positive = t;
        cumulative += row[t];
        if (u < cumulative) return {t, mdp.reward_row(s, a)[t]};
    }
    return {last_positive, mdp.reward_row(s, a)[last_positive]};
}

StochasticPolicy::StochasticPolicy(std::size_t num_states, std::size_t num_actions)
    : num_states_(num_states), num_actions_(num_actions), probs_(num_states * num_actions, 0.0) {}

StochasticPolicy::StochasticPolicy(std::size_t num_states, std::size_t num_actions, std::vector<double> probs)
    : num_states_(num_states), num_actions_(num_actions), probs_(std::move(probs)) {
    if (probs_.size() != num_states * num_actions) throw ValidationError("policy matrix has the wrong shape");
}

StochasticPolicy StochasticPolicy::from_deterministic(const DeterministicPolicy& p, std::size_t num_actions) {
    StochasticPolicy out(p.actions.size(), num_actions);
    for (StateId s = 0; s < p.actions.size(); ++s) {
        if (p.actions[s] >= num_actions) throw ValidationError("deterministic policy action out of range");
        out.probs_[s * num_actions + p.actions[s]] = 1.0;
    }
    return out;
}

StochasticPolicy StochasticPolicy::uniform(std::size_t num_states, std::size_t num_actions) {
    return StochasticPolicy(num_states, num_actions,
                            std::vector<double>(num_states * num_actions, 1.0 / static_cast<double>(num_actions)));
}

void StochasticPolicy::validate() const {
    for (StateId s = 0; s < num_states_; ++s) {
        double total = 0.0;
        for (double x : row(s)) {
            if (!(x >= 0.0) || !std::isfinite(x))
                throw ValidationError("policy row " + std::to_string(s) + " has a negative or non-finite entry");
            total += x;
        }
        if (std::fabs(total - 1.0) > kRowTol)
            throw ValidationError("policy row " + std::to_string(s) + " does not sum to 1");
    }
}

namespace {

// Q(s,a) = rbar(s,a) + gamma * P(.|s,a) . V
void bellman_q(const TabularMdp& mdp, std::span<const double> values, std::span<double> q) {
    const std::size_t na = mdp.num_actions();
    const auto& k = kernels::table(kernels::active_backend());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        for (ActionId a = 0; a < na; ++a) {
            const auto row = mdp.transition_row(s, a);
            q[s * na + a] = mdp.expected_reward(s, a) + mdp.discount() * k.dot(row.data(), values.data(), row.size());
        }
    }
}

ActionId greedy_lowest_index(std::span<const double> q_row) {
    ActionId best = 0;
    for (ActionId a = 1; a < q_row.size(); ++a)
        if (q_row[a] > q_row[best]) best = a;
    return best;
}

}  // namespace

double bellman_optimality_residual(const TabularMdp& mdp, std::span<const double> values) {
    if (values.size() != mdp.num_states()) throw ShapeError("value vector has the wrong length");
    std::vector<double> q(mdp.num_states() * mdp.num_actions());
    bellman_q(mdp, values, q);
    double worst = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        const auto row = std::span<const double>(q).subspan(s * mdp.num_actions(), mdp.num_actions());
        worst = std::max(worst, std::fabs(values[s] - *std::max_element(row.begin(), row.end())));
    }
    return worst;
}

OptimalSolution value_iteration(const TabularMdp& mdp, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
    const std::size_t ns = mdp.num_states();
    const std::size_t na = mdp.num_actions();
    const double stop = tol * (1.0 - mdp.discount());

    OptimalSolution sol;
    sol.values.assign(ns, 0.0);
    sol.q_values.assign(ns * na, 0.0);
    std::vector<double> next(ns);
    for (;;) {
        bellman_q(mdp, sol.values, sol.q_values);
        for (StateId s = 0; s < ns; ++s) {
            const auto row = std::span<const double>(sol.q_values).subspan(s * na, na);
            next[s] = *std::max_element(row.begin(), row.end());
        }
        ++sol.sweeps;
        const double change = kernels::max_abs_diff(next, sol.values);
        sol.values.swap(next);
        if (change <= stop) break;
    }
    bellman_q(mdp, sol.values, sol.q_values);
    sol.policy.actions.resize(ns);
    for (StateId s = 0; s < ns; ++s)
        sol.policy.actions[s] = greedy_lowest_index(std::span<const double>(sol.q_values).subspan(s * na, na));
    return sol;
}

std::vector<std::vector<ActionId>> optimal_action_sets(const TabularMdp& mdp, const OptimalSolution& sol,
                                                       double tol) {
    const std::size_t na = mdp.num_actions();
    std::vector<std::vector<ActionId>> out(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        double best = sol.q(s, 0, na);
        for (ActionId a = 1; a < na; ++a) best = std::max(best, sol.q(s, a, na));
        for (ActionId a = 0; a < na; ++a)
            if (sol.q(s, a, na) >= best - tol) out[s].push_back(a);
    }
    return out;
}

PolicyEvaluator::PolicyEvaluator(const TabularMdp& mdp)
    : mdp_(&mdp),
      p_pi_(mdp.num_states() * mdp.num_states()),
      r_pi_(mdp.num_states()),
      values_(mdp.num_states()),
      next_(mdp.num_states()) {}

void PolicyEvaluator::build_policy_model(const StochasticPolicy& policy) {
    const TabularMdp& mdp = *mdp_;
    const std::size_t ns = mdp.num_states();
    std::fill(p_pi_.begin(), p_pi_.end(), 0.0);
    const auto& k = kernels::table(kernels::active_backend());
    for (StateId s = 0; s < ns; ++s) {
        double r = 0.0;
        double* dest = p_pi_.data() + s * ns;
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            const double w = policy(s, a);
            if (w == 0.0) continue;
            k.axpy(w, mdp.transition_row(s, a).data(), dest, ns);
            r += w * mdp.expected_reward(s, a);
        }
        r_pi_[s] = r;
    }
}

const std::vector<double>& PolicyEvaluator::evaluate(const StochasticPolicy& policy, double tol,
                                                     EvaluationMethod method) {
    const TabularMdp& mdp = *mdp_;
    const std::size_t ns = mdp.num_states();
    if (!(tol > 0.0)) throw std::invalid_argument("policy_evaluation: tol must be positive");
    if (policy.num_states() != ns || policy.num_actions() != mdp.num_actions())
        throw ValidationError("policy shape does not match the MDP");
    policy.validate();
    build_policy_model(policy);
    const double gamma = mdp.discount();

    if (method == EvaluationMethod::direct) {
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns));
        for (StateId s = 0; s < ns; ++s)
            for (StateId t = 0; t < ns; ++t)
                lhs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) -= gamma * p_pi_[s * ns + t];
        const Eigen::Map<const Eigen::VectorXd> rhs(r_pi_.data(), static_cast<Eigen::Index>(ns));
        const Eigen::VectorXd v = lhs.partialPivLu().solve(rhs);
        for (StateId s = 0; s < ns; ++s) values_[s] = v(static_cast<Eigen::Index>(s));
        sweeps_ = 0;
        return values_;
    }

    const double stop = tol * (1.0 - gamma);
    const auto& k = kernels::table(kernels::active_backend());
    std::fill(values_.begin(), values_.end(), 0.0);
    sweeps_ = 0;
    for (;;) {
        for (StateId s = 0; s < ns; ++s) next_[s] = r_pi_[s] + gamma * k.dot(p_pi_.data() + s * ns, values_.data(), ns);
        ++sweeps_;
        const double change = k.max_abs_diff(next_.data(), values_.data(), ns);
        values_.swap(next_);
        if (!std::isfinite(change)) throw std::runtime_error("policy evaluation diverged");
        if (change <= stop) break;
    }
    return values_;
}

std::vector<double> policy_evaluation(const TabularMdp& mdp, const StochasticPolicy& policy, double tol,
                                      EvaluationMethod method) {
    PolicyEvaluator evaluator(mdp);
    return evaluator.evaluate(policy, tol, method);
}

TabularMdp random_mdp(std::size_t num_states, std::size_t num_actions, double reward_sparsity, std::uint64_t seed,
                      double discount) {
    if (num_states < 2 || num_actions < 2) throw InvalidSpec("random_mdp needs S >= 2 and A >= 2");
    if (!(reward_sparsity >= 0.0 && reward_sparsity <= 1.0)) throw InvalidSpec("reward_sparsity must lie in [0, 1]");
    Rng rng(seed);
    const std::size_t ns = num_states;
    const std::size_t pairs = num_states * num_actions;
    std::vector<double> p(pairs * ns);
    for (std::size_t row = 0; row < pairs; ++row) {
        double total = 0.0;
        for (StateId t = 0; t < ns; ++t) {
            // Exponential(1) draws normalize to a Dirichlet(1) row; 1 - u > 0.
            const double e = -std::log1p(-rng.uniform01());
            p[row * ns + t] = std::max(e, 1e-300);
            total += p[row * ns + t];
        }
        for (StateId t = 0; t < ns; ++t) p[row * ns + t] /= total;
    }

    std::vector<std::size_t> order(pairs);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = pairs; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    const auto zeroed = static_cast<std::size_t>(std::llround((1.0 - reward_sparsity) * static_cast<double>(pairs)));
    std::vector<double> pair_reward(pairs, 0.0);
    for (std::size_t i = 0; i < pairs; ++i) {
        const double draw = rng.uniform01();
        if (i >= zeroed) pair_reward[order[i]] = draw;
    }
    std::vector<double> r(pairs * ns);
    for (std::size_t row = 0; row < pairs; ++row) std::fill_n(r.begin() + static_cast<std::ptrdiff_t>(row * ns), ns, pair_reward[row]);

    return TabularMdp(num_states, num_actions, std::move(p), std::move(r), discount, 0, {});
}

std::vector<bool> reachable_states(const TabularMdp& mdp, StateId from, const DeterministicPolicy* policy) {
    mdp.check_state(from);
    std::vector<bool> seen(mdp.num_states(), false);
    std::queue<StateId> frontier;
    seen[from] = true;
    frontier.push(from);
    while (!frontier.empty()) {
        const StateId s = frontier.front();
        frontier.pop();
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            if (policy != nullptr && policy->actions.at(s) != a) continue;
            const auto row = mdp.transition_row(s, a);
            for (StateId t = 0; t < row.size(); ++t) {
                if (row[t] > 0.0 && !seen[t]) {
                    seen[t] = true;
                    frontier.push(t);
                }
            }
        }
    }
    return seen;
}

}  // namespace gea
