#include "gea/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gea/errors.hpp"
#include "gea/kernels.hpp"

namespace gea {

QTable::QTable(std::size_t num_states, std::size_t num_actions, std::vector<double> values)
    : num_states_(num_states), num_actions_(num_actions), values_(std::move(values)) {
    if (values_.size() != num_states * num_actions) throw ShapeError("QTable values must have shape S x A");
    for (double v : values_)
        if (!std::isfinite(v)) throw ValidationError("QTable entries must be finite");
}

QTable QTable::random(const TabularMdp& mdp, const InitDistribution& init, Rng& rng) {
    const std::size_t na = mdp.num_actions();
    std::vector<double> values(mdp.num_states() * na);
    for (double& v : values) v = init.sample(rng);
    for (StateId t : mdp.terminal_states()) std::fill_n(values.begin() + static_cast<std::ptrdiff_t>(t * na), na, 0.0);
    return QTable(mdp.num_states(), na, std::move(values));
}

double QTable::max_value(StateId s) const {
    const auto r = row(s);
    return *std::max_element(r.begin(), r.end());
}

ActionId QTable::greedy_action(StateId s) const {
    const auto r = row(s);
    return static_cast<ActionId>(std::max_element(r.begin(), r.end()) - r.begin());
}

double q_update(QTable& q, StateId s, ActionId a, double reward, StateId next, double alpha_step, double gamma) {
    if (s >= q.num_states() || next >= q.num_states() || a >= q.num_actions())
        throw IndexError("q_update: index out of range");
    const double delta = reward + gamma * q.max_value(next) - q(s, a);
    q(s, a) += alpha_step * delta;
    return delta;
}

std::vector<double> FeatureMap::features(StateId s, ActionId a) const {
    std::vector<double> out(dimension());
    features(s, a, out);
    return out;
}

void OneHotFeatures::features(StateId s, ActionId a, std::span<double> out) const {
    if (out.size() != dimension()) throw ShapeError("feature buffer has the wrong length");
    if (s >= num_states_ || a >= num_actions_) throw IndexError("one-hot features: index out of range");
    std::fill(out.begin(), out.end(), 0.0);
    out[s * num_actions_ + a] = 1.0;
}

DeepSeaTileCoding::DeepSeaTileCoding(std::size_t depth, std::size_t tilings, std::size_t tiles_per_dim,
                                     std::size_t num_actions)
    : depth_(depth),
      tilings_(tilings),
      tiles_(tiles_per_dim),
      num_actions_(num_actions),
      per_action_(tilings * (tiles_per_dim + 1) * (tiles_per_dim + 1)) {
    if (depth < 2 || tilings == 0 || tiles_per_dim == 0 || num_actions == 0)
        throw InvalidSpec("tile coding needs depth >= 2, tilings >= 1, tiles_per_dim >= 1");
}

void DeepSeaTileCoding::features(StateId s, ActionId a, std::span<double> out) const {
    if (out.size() != dimension()) throw ShapeError("feature buffer has the wrong length");
    if (a >= num_actions_ || s > depth_ * depth_) throw IndexError("tile coding: index out of range");
    std::fill(out.begin(), out.end(), 0.0);
    if (s == deep_sea_terminal(depth_)) return;
    const double span = static_cast<double>(depth_ - 1);
    const double x = static_cast<double>(s / depth_) / span;
    const double y = static_cast<double>(s % depth_) / span;
    const std::size_t side = tiles_ + 1;
    const double tiles = static_cast<double>(tiles_);
    for (std::size_t t = 0; t < tilings_; ++t) {
        const double offset = static_cast<double>(t) / (static_cast<double>(tilings_) * tiles);
        const auto ix = std::min(static_cast<std::size_t>((x + offset) * tiles), tiles_);
        const auto iy = std::min(static_cast<std::size_t>((y + offset) * tiles), tiles_);
        out[a * per_action_ + t * side * side + ix * side + iy] = 1.0;
    }
}

double DeepSeaTileCoding::init_weight_scale() const { return 1.0 / std::sqrt(static_cast<double>(tilings_)); }

LinearQ::LinearQ(std::shared_ptr<const FeatureMap> feature_map, std::vector<double> weights)
    : feature_map_(std::move(feature_map)), weights_(std::move(weights)) {
    if (!feature_map_) throw std::invalid_argument("LinearQ needs a feature map");
    if (weights_.empty()) throw ShapeError("LinearQ needs d >= 1");
    if (weights_.size() != feature_map_->dimension())
        throw ShapeError("weight dimension " + std::to_string(weights_.size()) + " does not match feature dimension " +
                         std::to_string(feature_map_->dimension()));
}

LinearQ LinearQ::random(std::shared_ptr<const FeatureMap> feature_map, const TabularMdp& mdp,
                        const InitDistribution& init, Rng& rng) {
    const double scale = feature_map->init_weight_scale();
    std::vector<double> w(feature_map->dimension());
    for (double& v : w) v = scale * init.sample(rng);
    std::vector<double> f(w.size());
    for (StateId t : mdp.terminal_states()) {
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            feature_map->features(t, a, f);
            for (std::size_t i = 0; i < f.size(); ++i)
                if (f[i] != 0.0) w[i] = 0.0;
        }
    }
    return LinearQ(std::move(feature_map), std::move(w));
}

double linear_predict(std::span<const double> weights, std::span<const double> features) {
    if (weights.size() != features.size())
        throw ShapeError("feature dimension " + std::to_string(features.size()) + " does not match weights " +
                         std::to_string(weights.size()));
    return kernels::dot(weights, features);
}

double linear_predict(const LinearQ& lq, StateId s, ActionId a) {
    return linear_predict(lq.weights(), lq.feature_map().features(s, a));
}

void linear_update(LinearQ& lq, double delta, double alpha_step, std::span<const double> features) {
    if (features.size() != lq.dimension()) throw ShapeError("feature dimension does not match weights");
    kernels::axpy(alpha_step * delta, features, lq.weights());
}

GeaStepResult gea_discrete_step(QTable& own, std::span<const double> neighbor_rows, std::size_t neighborhood_size,
                                StateId s, const TabularMdp& mdp, VisitCounter& visits, const GeaSettings& settings,
                                Rng& rng) {
    mdp.check_state(s);
    GeaStepResult out;
    out.snapshot = explore_state(neighbor_rows, neighborhood_size, own.row(s), settings.sigma_q_sq,
                                 settings.exploration, visits.state_visits(s) + 1);
    out.action = sample_index(out.snapshot.policy, rng);
    const Transition tr = mdp_step(mdp, s, out.action, rng);
    out.reward = tr.reward;
    out.next = tr.next;
    out.alpha = settings.schedule.alpha(visits.record(s, out.action));
    out.delta = q_update(own, s, out.action, tr.reward, tr.next, out.alpha, mdp.discount());
    out.value = own(s, out.action);
    return out;
}

GeaStepResult gea_continuous_step(LinearQ& own, std::span<const double> neighbor_weights,
                                  std::size_t neighborhood_size, StateId s, const TabularMdp& mdp,
                                  VisitCounter& visits, const GeaSettings& settings, Rng& rng) {
    mdp.check_state(s);
    const FeatureMap& fm = own.feature_map();
    const std::size_t d = own.dimension();
    const std::size_t na = mdp.num_actions();
    if (fm.num_actions() != na) throw ShapeError("feature map action count does not match the MDP");
    if (neighbor_weights.size() != neighborhood_size * d)
        throw ShapeError("neighbor weights must have shape N_k x d");

    const auto& k = kernels::table(kernels::active_backend());
    std::vector<double> feats(na * d);
    for (ActionId a = 0; a < na; ++a) fm.features(s, a, std::span<double>(feats).subspan(a * d, d));

    std::vector<double> rows(neighborhood_size * na);
    for (std::size_t l = 0; l < neighborhood_size; ++l)
        for (ActionId a = 0; a < na; ++a)
            rows[l * na + a] = k.dot(neighbor_weights.data() + l * d, feats.data() + a * d, d);
    std::vector<double> own_row(na);
    for (ActionId a = 0; a < na; ++a) own_row[a] = k.dot(own.weights().data(), feats.data() + a * d, d);

    GeaStepResult out;
    out.snapshot = explore_state(rows, neighborhood_size, own_row, settings.sigma_q_sq, settings.exploration,
                                 visits.state_visits(s) + 1);
    out.action = sample_index(out.snapshot.policy, rng);
    const Transition tr = mdp_step(mdp, s, out.action, rng);
    out.reward = tr.reward;
    out.next = tr.next;
    out.alpha = settings.schedule.alpha(visits.record(s, out.action));

    std::vector<double> next_feat(d);
    double best_next = -std::numeric_limits<double>::infinity();
    for (ActionId b = 0; b < na; ++b) {
        fm.features(tr.next, b, next_feat);
        best_next = std::max(best_next, k.dot(own.weights().data(), next_feat.data(), d));
    }
    const std::span<const double> taken(feats.data() + out.action * d, d);
    out.delta = tr.reward + mdp.discount() * best_next - own_row[out.action];
    linear_update(own, out.delta, out.alpha, taken);
    out.value = k.dot(own.weights().data(), taken.data(), d);
    return out;
}

}  // namespace gea
