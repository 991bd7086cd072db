#pragma once

// Value models and the per-agent steps of graph-exploration Q-learning:
// tabular estimates with neighbor rows exchanged per state, and linear
// estimates where each neighbor contributes one weight vector.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gea/exploration.hpp"
#include "gea/mdp.hpp"
#include "gea/rng.hpp"
#include "gea/visits.hpp"

namespace gea {

class QTable {
  public:
    QTable() = default;
    QTable(std::size_t num_states, std::size_t num_actions, std::vector<double> values);
    QTable(std::size_t num_states, std::size_t num_actions)
        : QTable(num_states, num_actions, std::vector<double>(num_states * num_actions, 0.0)) {}

    // Entries drawn i.i.d. from `init` in (s, a) order; rows of terminal
    // states are then set to 0, their known value.
    static QTable random(const TabularMdp& mdp, const InitDistribution& init, Rng& rng);

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    double& operator()(StateId s, ActionId a) { return values_[s * num_actions_ + a]; }
    double operator()(StateId s, ActionId a) const { return values_[s * num_actions_ + a]; }
    std::span<const double> row(StateId s) const { return {values_.data() + s * num_actions_, num_actions_}; }
    double max_value(StateId s) const;
    ActionId greedy_action(StateId s) const;  // lowest index on ties
    const std::vector<double>& values() const noexcept { return values_; }

  private:
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    std::vector<double> values_;
};

// delta = r + gamma max_b Q(s',b) - Q(s,a); Q(s,a) += alpha_step delta.
double q_update(QTable& q, StateId s, ActionId a, double reward, StateId next, double alpha_step, double gamma);

class FeatureMap {
  public:
    virtual ~FeatureMap() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::size_t num_actions() const = 0;
    // Writes f(s, a) into `out` (length dimension()).
    virtual void features(StateId s, ActionId a, std::span<double> out) const = 0;
    // Per-weight scale applied to initial draws so that Q(s,a) at
    // initialization has the variance of the init distribution.
    virtual double init_weight_scale() const { return 1.0; }

    std::vector<double> features(StateId s, ActionId a) const;
};

// f(s, a) = e_{s A + a}; linear estimates reproduce a table exactly.
class OneHotFeatures final : public FeatureMap {
  public:
    OneHotFeatures(std::size_t num_states, std::size_t num_actions) : num_states_(num_states), num_actions_(num_actions) {}
    std::size_t dimension() const override { return num_states_ * num_actions_; }
    std::size_t num_actions() const override { return num_actions_; }
    void features(StateId s, ActionId a, std::span<double> out) const override;
    using FeatureMap::features;

  private:
    std::size_t num_states_;
    std::size_t num_actions_;
};

// Binary tile coding over the normalized deep-sea (row, column) coordinates,
// one independent block per action. Each tiling is a (tiles+1)^2 grid shifted
// by t / (tilings * tiles); exactly `tilings` features are active for every
// grid state and none for the terminal state.
class DeepSeaTileCoding final : public FeatureMap {
  public:
    DeepSeaTileCoding(std::size_t depth, std::size_t tilings, std::size_t tiles_per_dim, std::size_t num_actions = 2);
    std::size_t dimension() const override { return num_actions_ * per_action_; }
    std::size_t num_actions() const override { return num_actions_; }
    void features(StateId s, ActionId a, std::span<double> out) const override;
    double init_weight_scale() const override;
    using FeatureMap::features;

  private:
    std::size_t depth_;
    std::size_t tilings_;
    std::size_t tiles_;
    std::size_t num_actions_;
    std::size_t per_action_;
};

class LinearQ {
  public:
    LinearQ(std::shared_ptr<const FeatureMap> feature_map, std::vector<double> weights);

    // Weights drawn from `init` scaled by feature_map.init_weight_scale();
    // weights touched by terminal-state features are then zeroed.
    static LinearQ random(std::shared_ptr<const FeatureMap> feature_map, const TabularMdp& mdp,
                          const InitDistribution& init, Rng& rng);

    const FeatureMap& feature_map() const noexcept { return *feature_map_; }
    std::shared_ptr<const FeatureMap> feature_map_ptr() const noexcept { return feature_map_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<double> weights() noexcept { return weights_; }
    std::size_t dimension() const noexcept { return weights_.size(); }

  private:
    std::shared_ptr<const FeatureMap> feature_map_;
    std::vector<double> weights_;
};

// Q_v(s,a) = v . f(s,a)
double linear_predict(std::span<const double> weights, std::span<const double> features);
double linear_predict(const LinearQ& lq, StateId s, ActionId a);
// v += alpha_step * delta * f
void linear_update(LinearQ& lq, double delta, double alpha_step, std::span<const double> features);

// Settings shared by both learners.
struct GeaSettings {
    StepSchedule schedule;
    ExplorationParams exploration;
    double sigma_q_sq = 1.0 / 3.0;
};

struct GeaStepResult {
    ActionId action = 0;
    double reward = 0.0;
    StateId next = 0;
    ExplorationSnapshot snapshot;
    double delta = 0.0;
    double alpha = 0.0;
    double value = 0.0;  // own estimate of (s, a) after the update
};

// One decision of agent k at state s. `neighbor_rows` holds the published
// estimates Q_l(s, .) for l in N_k (row-major N_k x A). Updates `own` and
// `visits` in place.
GeaStepResult gea_discrete_step(QTable& own, std::span<const double> neighbor_rows, std::size_t neighborhood_size,
                                StateId s, const TabularMdp& mdp, VisitCounter& visits, const GeaSettings& settings,
                                Rng& rng);

// Same decision with linear estimates. `neighbor_weights` holds the N_k
// published weight vectors (row-major N_k x d); predictions for every action
// are rebuilt from them.
GeaStepResult gea_continuous_step(LinearQ& own, std::span<const double> neighbor_weights,
                                  std::size_t neighborhood_size, StateId s, const TabularMdp& mdp,
                                  VisitCounter& visits, const GeaSettings& settings, Rng& rng);

}  // namespace gea
