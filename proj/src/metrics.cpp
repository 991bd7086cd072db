#include "gea/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gea/errors.hpp"

namespace gea {

InstantRegret regret_update(PolicyEvaluator& evaluator, const StochasticPolicy& eta, double v_star_s0, StateId s0,
                            double tol) {
    const auto& v = evaluator.evaluate(eta, tol);
    const double raw = v_star_s0 - v.at(s0);
    if (!std::isfinite(raw)) throw std::runtime_error("policy evaluation produced a non-finite value");
    InstantRegret out;
    out.value = std::max(raw, 0.0);
    out.clipped = raw < -2.0 * tol;
    return out;
}

RegretLedger::RegretLedger(std::size_t num_agents, std::size_t num_episodes)
    : num_agents_(num_agents),
      num_episodes_(num_episodes),
      instant_(num_agents * num_episodes, 0.0),
      cumulative_(num_agents * num_episodes, 0.0) {
    if (num_agents == 0) throw InvalidSpec("regret ledger needs at least one agent");
}

void RegretLedger::add_evaluation(std::size_t episode, std::span<const double> per_agent) {
    if (per_agent.size() != num_agents_) throw ShapeError("one regret value per agent is required");
    if (episode >= num_episodes_) throw IndexError("episode out of range");
    if (filled_ == 0 && episode != 0) throw InvalidSpec("the first evaluation must be episode 0");
    if (filled_ > 0 && episode < filled_) throw InvalidSpec("evaluations must arrive in increasing episode order");

    const std::size_t start = filled_ == 0 ? 0 : filled_ - 1;  // last evaluated episode
    const std::size_t span = episode - start;
    for (std::size_t e = filled_; e <= episode; ++e) {
        for (std::size_t k = 0; k < num_agents_; ++k) {
            double x = per_agent[k];
            if (e < episode && span > 0) {
                const double t = static_cast<double>(e - start) / static_cast<double>(span);
                x = last_eval_[k] + t * (per_agent[k] - last_eval_[k]);
            }
            instant_[e * num_agents_ + k] = x;
            cumulative_[e * num_agents_ + k] = (e == 0 ? 0.0 : cumulative_[(e - 1) * num_agents_ + k]) + x;
        }
    }
    last_eval_.assign(per_agent.begin(), per_agent.end());
    filled_ = episode + 1;
}

double RegretLedger::instant(std::size_t episode, std::size_t agent) const {
    if (episode >= filled_ || agent >= num_agents_) throw IndexError("regret entry not recorded");
    return instant_[episode * num_agents_ + agent];
}

double RegretLedger::cumulative(std::size_t episode, std::size_t agent) const {
    if (episode >= filled_ || agent >= num_agents_) throw IndexError("regret entry not recorded");
    return cumulative_[episode * num_agents_ + agent];
}

double RegretLedger::total(std::size_t episode) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < num_agents_; ++k) sum += cumulative(episode, k);
    return sum / static_cast<double>(num_agents_);
}

double RegretLedger::mean_instant(std::size_t episode) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < num_agents_; ++k) sum += instant(episode, k);
    return sum / static_cast<double>(num_agents_);
}

bool is_evaluation_episode(std::size_t episode, std::size_t num_episodes, std::size_t cadence) {
    if (cadence == 0) throw InvalidSpec("evaluation cadence must be positive");
    return episode % cadence == 0 || episode + 1 == num_episodes;
}

std::size_t default_eval_cadence(std::size_t depth) { return depth <= 10 ? 1 : 5; }

CoverageReport coverage_report(std::span<const VisitCounter> counters, std::uint64_t threshold,
                               const std::vector<bool>* state_mask) {
    CoverageReport out;
    if (counters.empty()) return out;
    const std::size_t ns = counters.front().num_states();
    const std::size_t na = counters.front().num_actions();
    if (state_mask && state_mask->size() != ns) throw ShapeError("state mask must have one entry per state");
    out.per_state.assign(ns, 0);

    std::uint64_t covered = 0;
    std::uint64_t cells = 0;
    double sum = 0.0;
    std::uint64_t min_count = std::numeric_limits<std::uint64_t>::max();
    for (const auto& c : counters) {
        if (c.num_states() != ns || c.num_actions() != na) throw ShapeError("counters must share one shape");
        for (StateId s = 0; s < ns; ++s) {
            out.per_state[s] += c.state_visits(s);
            if (state_mask && !(*state_mask)[s]) continue;
            for (ActionId a = 0; a < na; ++a) {
                const auto n = c.pair_visits(s, a);
                ++cells;
                if (n >= threshold) ++covered;
                sum += static_cast<double>(n);
                min_count = std::min(min_count, n);
            }
        }
    }
    if (cells == 0) return out;
    out.fraction = static_cast<double>(covered) / static_cast<double>(cells);
    out.min_count = min_count;
    out.mean_count = sum / static_cast<double>(cells);
    return out;
}

}  // namespace gea
