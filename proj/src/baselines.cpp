#include "gea/baselines.hpp"

#include <cmath>
#include <string>

#include "gea/errors.hpp"

namespace gea {

void GucbParams::validate() const {
    if (!(beta_const > 0.0)) throw ConfigError("algorithm.beta_const", "must be > 0");
    if (!(horizon > 0.0)) throw ConfigError("algorithm.horizon", "must be > 0");
    if (!(iota > 0.0)) throw ConfigError("algorithm.iota", "must be > 0");
    for (double w : weights)
        if (!(w > 0.0)) throw ConfigError("algorithm.w_mode", "agent weights must be > 0");
}

double gucb_bonus(const GucbParams& p, std::size_t agent, std::uint64_t count) {
    const double w = p.weights.at(agent);
    const double c = static_cast<double>(count == 0 ? 1 : count);
    return p.beta_const * std::sqrt(p.horizon * p.horizon * p.horizon * p.iota / (w * c));
}

ActionId gucb_action(std::span<const double> q_row, std::span<const std::uint64_t> counts, const GucbParams& p,
                     std::size_t agent) {
    if (q_row.size() != counts.size() || q_row.empty()) throw ShapeError("gucb_action: row/count length mismatch");
    for (ActionId a = 0; a < counts.size(); ++a)
        if (counts[a] == 0) return a;
    ActionId best = 0;
    double best_score = q_row[0] + gucb_bonus(p, agent, counts[0]);
    for (ActionId a = 1; a < q_row.size(); ++a) {
        const double score = q_row[a] + gucb_bonus(p, agent, counts[a]);
        if (score > best_score) {
            best = a;
            best_score = score;
        }
    }
    return best;
}

BaselineStepResult gucb_step(QTable& own, std::span<const std::uint64_t> neighborhood_counts, StateId s,
                             const TabularMdp& mdp, const StepSchedule& schedule, VisitCounter& visits,
                             const GucbParams& params, std::size_t agent, Rng& rng) {
    mdp.check_state(s);
    BaselineStepResult out;
    out.action = gucb_action(own.row(s), neighborhood_counts, params, agent);
    const Transition tr = mdp_step(mdp, s, out.action, rng);
    out.reward = tr.reward;
    out.next = tr.next;
    const double alpha = schedule.alpha(visits.record(s, out.action));
    out.delta = q_update(own, s, out.action, tr.reward, tr.next, alpha, mdp.discount());
    return out;
}

BaselineStepResult epsilon_greedy_step(QTable& own, StateId s, const TabularMdp& mdp, const StepSchedule& schedule,
                                       VisitCounter& visits, double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("algorithm.epsilon", "must lie in [0, 1]");
    mdp.check_state(s);
    BaselineStepResult out;
    if (rng.uniform01() < epsilon)
        out.action = static_cast<ActionId>(rng.uniform_index(mdp.num_actions()));
    else
        out.action = own.greedy_action(s);
    const Transition tr = mdp_step(mdp, s, out.action, rng);
    out.reward = tr.reward;
    out.next = tr.next;
    const double alpha = schedule.alpha(visits.record(s, out.action));
    out.delta = q_update(own, s, out.action, tr.reward, tr.next, alpha, mdp.discount());
    return out;
}

}  // namespace gea
