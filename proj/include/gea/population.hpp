#pragma once

// K agents on K independent copies of one MDP, advanced in lockstep: every
// iteration first reads all published neighbor information, then lets each
// agent act and update its own estimates. Results do not depend on the
// order in which agents act within an iteration.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "gea/baselines.hpp"
#include "gea/graph.hpp"
#include "gea/learners.hpp"
#include "gea/mdp.hpp"
#include "gea/rng.hpp"
#include "gea/visits.hpp"

namespace gea {

struct StepRecord {
    AgentId agent = 0;
    StateId state = 0;
    ActionId action = 0;
    double reward = 0.0;
    StateId next = 0;
    double delta = 0.0;
    double value = 0.0;       // own estimate of (state, action) after the update
    double sigma_mean = 0.0;  // 0 for learners without a neighborhood bonus
    double beta = 0.0;        // 0 when the policy was uniform or not Boltzmann
    std::vector<double> policy;  // action distribution used for this decision
    std::vector<double> sigma;   // per-action bonus (GEA only)
};

class Population {
  public:
    Population(std::shared_ptr<const TabularMdp> mdp, std::shared_ptr<const Graph> graph,
               std::vector<std::uint64_t> agent_seeds);
    virtual ~Population() = default;
    Population(const Population&) = delete;
    Population& operator=(const Population&) = delete;

    std::size_t num_agents() const noexcept { return states_.size(); }
    const TabularMdp& mdp() const noexcept { return *mdp_; }
    const Graph& graph() const noexcept { return *graph_; }
    StateId state(AgentId k) const { return states_.at(k); }
    const VisitCounter& visits(AgentId k) const { return visits_.at(k); }
    const std::vector<VisitCounter>& all_visits() const noexcept { return visits_; }

    void reset_episode();
    const std::vector<StepRecord>& iterate();

    // Behavior policy eta_k for every state, frozen at the current time.
    virtual StochasticPolicy behavior_policy(AgentId k) const = 0;
    // argmax of the agent's own estimates, lowest index on ties.
    virtual DeterministicPolicy greedy_policy(AgentId k) const = 0;
    // Own estimates for every (s, a), row-major S x A.
    virtual std::vector<double> estimates(AgentId k) const = 0;
    virtual std::string_view algorithm_name() const = 0;

  protected:
    virtual void read_phase() = 0;
    virtual StepRecord act(AgentId k) = 0;
    // Runs after every agent has acted; may complete the records.
    virtual void exchange_phase(std::vector<StepRecord>&) {}

    std::shared_ptr<const TabularMdp> mdp_;
    std::shared_ptr<const Graph> graph_;
    std::vector<Rng> rngs_;
    std::vector<VisitCounter> visits_;
    std::vector<StateId> states_;

  private:
    std::vector<StepRecord> records_;
};

class TabularGeaPopulation final : public Population {
  public:
    TabularGeaPopulation(std::shared_ptr<const TabularMdp> mdp, std::shared_ptr<const Graph> graph,
                         std::vector<std::uint64_t> agent_seeds, const InitDistribution& init, GeaSettings settings);

    StochasticPolicy behavior_policy(AgentId k) const override;
    DeterministicPolicy greedy_policy(AgentId k) const override;
    std::vector<double> estimates(AgentId k) const override { return tables_.at(k).values(); }
    std::string_view algorithm_name() const override { return "gea_discrete"; }

    const QTable& table(AgentId k) const { return tables_.at(k); }
    // Replaces agent k's estimates (hand-set scenarios); shape must match.
    void set_table(AgentId k, QTable q);

  protected:
    void read_phase() override;
    StepRecord act(AgentId k) override;

  private:
    void gather_rows(AgentId k, StateId s, std::vector<double>& out) const;

    GeaSettings settings_;
    std::vector<QTable> tables_;
    std::vector<std::vector<double>> gathered_;
};

class LinearGeaPopulation final : public Population {
  public:
    LinearGeaPopulation(std::shared_ptr<const TabularMdp> mdp, std::shared_ptr<const Graph> graph,
                        std::vector<std::uint64_t> agent_seeds, std::shared_ptr<const FeatureMap> features,
                        const InitDistribution& init, GeaSettings settings);

    StochasticPolicy behavior_policy(AgentId k) const override;
    DeterministicPolicy greedy_policy(AgentId k) const override;
    std::vector<double> estimates(AgentId k) const override;
    std::string_view algorithm_name() const override { return "gea_continuous"; }

    const LinearQ& model(AgentId k) const { return models_.at(k); }

  protected:
    void read_phase() override;
    StepRecord act(AgentId k) override;

  private:
    void gather_weights(AgentId k, std::vector<double>& out) const;

    GeaSettings settings_;
    std::vector<LinearQ> models_;
    std::vector<std::vector<double>> gathered_;
};

// GUCB weights: w_k = |N_k| / K ("neighborhood") or 1 ("unit").
enum class GucbWeightMode { neighborhood, unit };

class GucbPopulation final : public Population {
  public:
    GucbPopulation(std::shared_ptr<const TabularMdp> mdp, std::shared_ptr<const Graph> graph,
                   std::vector<std::uint64_t> agent_seeds, const InitDistribution& init, StepSchedule schedule,
                   GucbParams params);

    StochasticPolicy behavior_policy(AgentId k) const override;
    DeterministicPolicy greedy_policy(AgentId k) const override;
    std::vector<double> estimates(AgentId k) const override { return tables_.at(k).values(); }
    std::string_view algorithm_name() const override { return "gucb"; }

    const GucbParams& params() const noexcept { return params_; }
    // Counts of (s, .) summed over N_k and k itself; equal to the number of
    // samples behind agent k's estimates.
    std::vector<std::uint64_t> neighborhood_counts(AgentId k, StateId s) const;

  protected:
    void read_phase() override;
    StepRecord act(AgentId k) override;
    // Every agent learns from the transitions of N_k and itself, in agent order.
    void exchange_phase(std::vector<StepRecord>& records) override;

  private:
    StepSchedule schedule_;
    GucbParams params_;
    std::vector<QTable> tables_;
    std::vector<VisitCounter> pooled_;
    std::vector<std::vector<std::uint64_t>> gathered_;
};

GucbParams make_gucb_params(const Graph& graph, double beta_const, double horizon, double iota, GucbWeightMode mode);

class EpsilonGreedyPopulation final : public Population {
  public:
    EpsilonGreedyPopulation(std::shared_ptr<const TabularMdp> mdp, std::shared_ptr<const Graph> graph,
                            std::vector<std::uint64_t> agent_seeds, const InitDistribution& init,
                            StepSchedule schedule, double epsilon);

    StochasticPolicy behavior_policy(AgentId k) const override;
    DeterministicPolicy greedy_policy(AgentId k) const override;
    std::vector<double> estimates(AgentId k) const override { return tables_.at(k).values(); }
    std::string_view algorithm_name() const override { return "epsilon_greedy"; }

  protected:
    void read_phase() override {}
    StepRecord act(AgentId k) override;

  private:
    StepSchedule schedule_;
    double epsilon_;
    std::vector<QTable> tables_;
};

}  // namespace gea
