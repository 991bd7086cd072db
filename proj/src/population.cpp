#include "gea/population.hpp"

#include <algorithm>
#include <utility>

#include "gea/errors.hpp"

namespace gea {

Population::Population(std::shared_ptr<const TabularMdp> mdp, std::shared_ptr<const Graph> graph,
                       std::vector<std::uint64_t> agent_seeds)
    : mdp_(std::move(mdp)), graph_(std::move(graph)) {
    if (!mdp_ || !graph_) throw InvalidSpec("population needs an MDP and a graph");
    if (agent_seeds.size() != graph_->num_agents())
        throw InvalidSpec("one seed per agent is required");
    rngs_.reserve(agent_seeds.size());
    for (auto seed : agent_seeds) rngs_.emplace_back(seed);
    visits_.assign(agent_seeds.size(), VisitCounter(mdp_->num_states(), mdp_->num_actions()));
    states_.assign(agent_seeds.size(), mdp_->initial_state());
}

void Population::reset_episode() { std::fill(states_.begin(), states_.end(), mdp_->initial_state()); }

const std::vector<StepRecord>& Population::iterate() {
    records_.clear();
    read_phase();
    // Agents already in a terminal state sit out the rest of the episode.
    for (AgentId k = 0; k < num_agents(); ++k) {
        if (mdp_->is_terminal(states_[k])) continue;
        records_.push_back(act(k));
    }
    exchange_phase(records_);
    return records_;
}

namespace {

StepRecord from_gea(AgentId k, StateId s, GeaStepResult&& r) {
    StepRecord rec;
    rec.agent = k;
    rec.state = s;
    rec.action = r.action;
    rec.reward = r.reward;
    rec.next = r.next;
    rec.delta = r.delta;
    rec.value = r.value;
    rec.sigma_mean = r.snapshot.sigma_mean();
    rec.beta = r.snapshot.beta.value_or(0.0);
    rec.policy = std::move(r.snapshot.policy);
    rec.sigma = std::move(r.snapshot.sigma);
    return rec;
}

StepRecord from_baseline(AgentId k, StateId s, const BaselineStepResult& r, double value, std::size_t num_actions) {
    StepRecord rec;
    rec.agent = k;
    rec.state = s;
    rec.action = r.action;
    rec.reward = r.reward;
    rec.next = r.next;
    rec.delta = r.delta;
    rec.value = value;
    rec.policy.assign(num_actions, 0.0);
    rec.policy[r.action] = 1.0;
    return rec;
}

DeterministicPolicy greedy_of(const QTable& q) {
    DeterministicPolicy p;
    p.actions.resize(q.num_states());
    for (StateId s = 0; s < q.num_states(); ++s) p.actions[s] = q.greedy_action(s);
    return p;
}

std::vector<QTable> random_tables(const TabularMdp& mdp, const InitDistribution& init, std::vector<Rng>& rngs) {
    std::vector<QTable> out;
    out.reserve(rngs.size());
    for (auto& rng : rngs) out.push_back(QTable::random(mdp, init, rng));
    return out;
}

}  // namespace

// ---- tabular GEA ----

TabularGeaPopulation::TabularGeaPopulation(std::shared_ptr<const TabularMdp> mdp, std::shared_ptr<const Graph> graph,
                                           std::vector<std::uint64_t> agent_seeds, const InitDistribution& init,
                                           GeaSettings settings)
    : Population(std::move(mdp), std::move(graph), std::move(agent_seeds)), settings_(settings) {
    init.validate();
    settings_.schedule.validate();
    settings_.exploration.validate();
    tables_ = random_tables(*mdp_, init, rngs_);
    gathered_.resize(num_agents());
}

void TabularGeaPopulation::gather_rows(AgentId k, StateId s, std::vector<double>& out) const {
    const auto& nbrs = graph_->neighborhood(k);
    const std::size_t na = mdp_->num_actions();
    out.resize(nbrs.size() * na);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const auto row = tables_[nbrs[i]].row(s);
        std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(i * na));
    }
}

void TabularGeaPopulation::set_table(AgentId k, QTable q) {
    if (q.num_states() != mdp_->num_states() || q.num_actions() != mdp_->num_actions())
        throw ShapeError("table shape does not match the MDP");
    tables_.at(k) = std::move(q);
}

void TabularGeaPopulation::read_phase() {
    for (AgentId k = 0; k < num_agents(); ++k)
        if (!mdp_->is_terminal(states_[k])) gather_rows(k, states_[k], gathered_[k]);
}

StepRecord TabularGeaPopulation::act(AgentId k) {
    const StateId s = states_[k];
    auto r = gea_discrete_step(tables_[k], gathered_[k], graph_->neighborhood_size(k), s, *mdp_, visits_[k],
                               settings_, rngs_[k]);
    states_[k] = r.next;
    return from_gea(k, s, std::move(r));
}

StochasticPolicy TabularGeaPopulation::behavior_policy(AgentId k) const {
    const std::size_t na = mdp_->num_actions();
    StochasticPolicy pi(mdp_->num_states(), na);
    std::vector<double> rows;
    for (StateId s = 0; s < mdp_->num_states(); ++s) {
        gather_rows(k, s, rows);
        const auto snap = explore_state(rows, graph_->neighborhood_size(k), tables_[k].row(s), settings_.sigma_q_sq,
                                        settings_.exploration, visits_[k].state_visits(s) + 1);
        std::copy(snap.policy.begin(), snap.policy.end(), pi.row(s).begin());
    }
    return pi;
}

DeterministicPolicy TabularGeaPopulation::greedy_policy(AgentId k) const { return greedy_of(tables_.at(k)); }

// ---- linear GEA ----

LinearGeaPopulation::LinearGeaPopulation(std::shared_ptr<const TabularMdp> mdp, std::shared_ptr<const Graph> graph,
                                         std::vector<std::uint64_t> agent_seeds,
                                         std::shared_ptr<const FeatureMap> features, const InitDistribution& init,
                                         GeaSettings settings)
    : Population(std::move(mdp), std::move(graph), std::move(agent_seeds)), settings_(settings) {
    if (!features) throw InvalidSpec("linear learner needs a feature map");
    if (features->num_actions() != mdp_->num_actions())
        throw ShapeError("feature map action count does not match the MDP");
    init.validate();
    settings_.schedule.validate();
    settings_.exploration.validate();
    models_.reserve(num_agents());
    for (auto& rng : rngs_) models_.push_back(LinearQ::random(features, *mdp_, init, rng));
    gathered_.resize(num_agents());
}

void LinearGeaPopulation::gather_weights(AgentId k, std::vector<double>& out) const {
    const auto& nbrs = graph_->neighborhood(k);
    const std::size_t d = models_.front().dimension();
    out.resize(nbrs.size() * d);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const auto w = models_[nbrs[i]].weights();
        std::copy(w.begin(), w.end(), out.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
}

void LinearGeaPopulation::read_phase() {
    for (AgentId k = 0; k < num_agents(); ++k)
        if (!mdp_->is_terminal(states_[k])) gather_weights(k, gathered_[k]);
}

StepRecord LinearGeaPopulation::act(AgentId k) {
    const StateId s = states_[k];
    auto r = gea_continuous_step(models_[k], gathered_[k], graph_->neighborhood_size(k), s, *mdp_, visits_[k],
                                 settings_, rngs_[k]);
    states_[k] = r.next;
    return from_gea(k, s, std::move(r));
}

std::vector<double> LinearGeaPopulation::estimates(AgentId k) const {
    const auto& m = models_.at(k);
    const std::size_t na = mdp_->num_actions();
    std::vector<double> out(mdp_->num_states() * na);
    for (StateId s = 0; s < mdp_->num_states(); ++s)
        for (ActionId a = 0; a < na; ++a) out[s * na + a] = linear_predict(m, s, a);
    return out;
}

StochasticPolicy LinearGeaPopulation::behavior_policy(AgentId k) const {
    const std::size_t na = mdp_->num_actions();
    const std::size_t nk = graph_->neighborhood_size(k);
    const auto& nbrs = graph_->neighborhood(k);
    std::vector<std::vector<double>> tables;
    tables.reserve(nk);
    for (auto l : nbrs) tables.push_back(estimates(l));
    const auto own = estimates(k);

    StochasticPolicy pi(mdp_->num_states(), na);
    std::vector<double> rows(nk * na);
    for (StateId s = 0; s < mdp_->num_states(); ++s) {
        for (std::size_t i = 0; i < nk; ++i)
            std::copy_n(tables[i].begin() + static_cast<std::ptrdiff_t>(s * na), na,
                        rows.begin() + static_cast<std::ptrdiff_t>(i * na));
        const std::span<const double> own_row(own.data() + s * na, na);
        const auto snap = explore_state(rows, nk, own_row, settings_.sigma_q_sq, settings_.exploration,
                                        visits_[k].state_visits(s) + 1);
        std::copy(snap.policy.begin(), snap.policy.end(), pi.row(s).begin());
    }
    return pi;
}

DeterministicPolicy LinearGeaPopulation::greedy_policy(AgentId k) const {
    const auto q = estimates(k);
    return greedy_of(QTable(mdp_->num_states(), mdp_->num_actions(), q));
}

// ---- GUCB ----

GucbParams make_gucb_params(const Graph& graph, double beta_const, double horizon, double iota, GucbWeightMode mode) {
    GucbParams p;
    p.beta_const = beta_const;
    p.horizon = horizon;
    p.iota = iota;
    p.weights.resize(graph.num_agents());
    for (AgentId k = 0; k < graph.num_agents(); ++k)
        p.weights[k] = mode == GucbWeightMode::unit
                           ? 1.0
                           : static_cast<double>(graph.neighborhood_size(k)) / static_cast<double>(graph.num_agents());
    p.validate();
    return p;
}

GucbPopulation::GucbPopulation(std::shared_ptr<const TabularMdp> mdp, std::shared_ptr<const Graph> graph,
                               std::vector<std::uint64_t> agent_seeds, const InitDistribution& init,
                               StepSchedule schedule, GucbParams params)
    : Population(std::move(mdp), std::move(graph), std::move(agent_seeds)),
      schedule_(schedule),
      params_(std::move(params)) {
    init.validate();
    schedule_.validate();
    params_.validate();
    if (params_.weights.size() != num_agents()) throw InvalidSpec("GUCB needs one weight per agent");
    tables_ = random_tables(*mdp_, init, rngs_);
    pooled_.assign(num_agents(), VisitCounter(mdp_->num_states(), mdp_->num_actions()));
    gathered_.resize(num_agents());
}

std::vector<std::uint64_t> GucbPopulation::neighborhood_counts(AgentId k, StateId s) const {
    const std::size_t na = mdp_->num_actions();
    std::vector<std::uint64_t> out(na, 0);
    for (ActionId a = 0; a < na; ++a) out[a] = pooled_.at(k).pair_visits(s, a);
    return out;
}

void GucbPopulation::read_phase() {
    for (AgentId k = 0; k < num_agents(); ++k)
        if (!mdp_->is_terminal(states_[k])) gathered_[k] = neighborhood_counts(k, states_[k]);
}

StepRecord GucbPopulation::act(AgentId k) {
    const StateId s = states_[k];
    BaselineStepResult r;
    r.action = gucb_action(tables_[k].row(s), gathered_[k], params_, k);
    const Transition tr = mdp_step(*mdp_, s, r.action, rngs_[k]);
    r.reward = tr.reward;
    r.next = tr.next;
    visits_[k].record(s, r.action);
    states_[k] = r.next;
    return from_baseline(k, s, r, 0.0, mdp_->num_actions());
}

void GucbPopulation::exchange_phase(std::vector<StepRecord>& records) {
    // records are in agent order; index them by agent for neighborhood lookups.
    std::vector<const StepRecord*> by_agent(num_agents(), nullptr);
    for (const auto& rec : records) by_agent[rec.agent] = &rec;
    std::vector<double> own_delta(num_agents(), 0.0);
    for (AgentId k = 0; k < num_agents(); ++k) {
        auto apply = [&](AgentId l) {
            const StepRecord* rec = by_agent[l];
            if (!rec) return;
            const double alpha = schedule_.alpha(pooled_[k].record(rec->state, rec->action));
            const double delta =
                q_update(tables_[k], rec->state, rec->action, rec->reward, rec->next, alpha, mdp_->discount());
            if (l == k) own_delta[k] = delta;
        };
        const auto& nbrs = graph_->neighborhood(k);
        bool self_done = false;
        for (auto l : nbrs) {
            if (!self_done && l > k) {
                if (!std::binary_search(nbrs.begin(), nbrs.end(), k)) apply(k);
                self_done = true;
            }
            apply(l);
            if (l == k) self_done = true;
        }
        if (!self_done) apply(k);
    }
    for (auto& rec : records) {
        rec.delta = own_delta[rec.agent];
        rec.value = tables_[rec.agent](rec.state, rec.action);
    }
}

StochasticPolicy GucbPopulation::behavior_policy(AgentId k) const {
    DeterministicPolicy p;
    p.actions.resize(mdp_->num_states());
    for (StateId s = 0; s < mdp_->num_states(); ++s)
        p.actions[s] = gucb_action(tables_[k].row(s), neighborhood_counts(k, s), params_, k);
    return StochasticPolicy::from_deterministic(p, mdp_->num_actions());
}

DeterministicPolicy GucbPopulation::greedy_policy(AgentId k) const { return greedy_of(tables_.at(k)); }

// ---- epsilon-greedy ----

EpsilonGreedyPopulation::EpsilonGreedyPopulation(std::shared_ptr<const TabularMdp> mdp,
                                                 std::shared_ptr<const Graph> graph,
                                                 std::vector<std::uint64_t> agent_seeds, const InitDistribution& init,
                                                 StepSchedule schedule, double epsilon)
    : Population(std::move(mdp), std::move(graph), std::move(agent_seeds)), schedule_(schedule), epsilon_(epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidSpec("epsilon must lie in [0, 1]");
    init.validate();
    schedule_.validate();
    tables_ = random_tables(*mdp_, init, rngs_);
}

StepRecord EpsilonGreedyPopulation::act(AgentId k) {
    const StateId s = states_[k];
    const ActionId g = tables_[k].greedy_action(s);
    const auto r = epsilon_greedy_step(tables_[k], s, *mdp_, schedule_, visits_[k], epsilon_, rngs_[k]);
    states_[k] = r.next;
    auto rec = from_baseline(k, s, r, tables_[k](s, r.action), mdp_->num_actions());
    const std::size_t na = mdp_->num_actions();
    std::fill(rec.policy.begin(), rec.policy.end(), epsilon_ / static_cast<double>(na));
    rec.policy[g] += 1.0 - epsilon_;
    return rec;
}

StochasticPolicy EpsilonGreedyPopulation::behavior_policy(AgentId k) const {
    const std::size_t na = mdp_->num_actions();
    StochasticPolicy pi(mdp_->num_states(), na);
    for (StateId s = 0; s < mdp_->num_states(); ++s) {
        auto row = pi.row(s);
        std::fill(row.begin(), row.end(), epsilon_ / static_cast<double>(na));
        row[tables_[k].greedy_action(s)] += 1.0 - epsilon_;
    }
    return pi;
}

DeterministicPolicy EpsilonGreedyPopulation::greedy_policy(AgentId k) const { return greedy_of(tables_.at(k)); }

}  // namespace gea
