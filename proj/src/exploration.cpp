#include "gea/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gea/errors.hpp"

namespace gea {

InitKind parse_init_kind(std::string_view name) {
    if (name == "uniform_symmetric") return InitKind::uniform_symmetric;
    if (name == "gaussian_truncated") return InitKind::gaussian_truncated;
    throw ConfigError("init.kind", "unknown init distribution '" + std::string(name) + "'");
}

std::string_view init_kind_name(InitKind kind) {
    return kind == InitKind::uniform_symmetric ? "uniform_symmetric" : "gaussian_truncated";
}

void InitDistribution::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw ConfigError("init.scale", "must be finite and > 0 (Assumption 2: bounded support)");
    if (kind == InitKind::gaussian_truncated && (!(truncation > 0.0) || !std::isfinite(truncation)))
        throw ConfigError("init.truncation", "must be finite and > 0 (Assumption 2: bounded support)");
}

double InitDistribution::variance() const {
    if (kind == InitKind::uniform_symmetric) return scale * scale / 3.0;
    const double z = truncation;
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    const double mass = std::erf(z / std::numbers::sqrt2);  // 2 Phi(z) - 1
    return scale * scale * (1.0 - 2.0 * z * pdf / mass);
}

double InitDistribution::sample(Rng& rng) const {
    if (kind == InitKind::uniform_symmetric) return rng.uniform(-scale, scale);
    for (;;) {
        const double x = rng.normal();
        if (std::fabs(x) <= truncation) return scale * x;
    }
}

void StepSchedule::validate() const {
    if (!(c0 > 0.0) || !std::isfinite(c0)) throw ConfigError("schedule.c0", "must be > 0 (Assumption 1)");
    if (!(c1 >= 0.0) || !std::isfinite(c1)) throw ConfigError("schedule.c1", "must be >= 0 (Assumption 1)");
    if (!(p > 0.5 && p <= 1.0))
        throw ConfigError("schedule.p", "must lie in (0.5, 1] so that sum alpha = inf and sum alpha^2 < inf (Assumption 1)");
    if (alpha(1) > 1.0) throw ConfigError("schedule.c0", "first step size c0 / (c1 + 1)^p exceeds 1");
}

double StepSchedule::alpha(std::uint64_t visits) const {
    return c0 / std::pow(c1 + static_cast<double>(visits), p);
}

void ExplorationParams::validate() const {
    if (!(alpha_clamp > 0.0 && alpha_clamp <= 0.25))
        throw ConfigError("exploration.alpha_clamp", "must lie in (0, 1/4]");
    if (!(sigma_floor >= 0.0) || !std::isfinite(sigma_floor))
        throw ConfigError("exploration.sigma_floor", "must be finite and >= 0");
}

VarianceMean sample_variance(std::span<const double> values) {
    if (values.size() < 2)
        throw InsufficientNeighbors("sample variance needs at least 2 estimates, got " + std::to_string(values.size()));
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {ss / (n - 1.0), mean};
}

double d_span(std::span<const double> q_tilde) {
    if (q_tilde.empty()) throw std::invalid_argument("d_span needs at least one action");
    const auto [lo, hi] = std::minmax_element(q_tilde.begin(), q_tilde.end());
    return *hi - *lo;
}

std::optional<double> beta_schedule(std::span<const double> sigma_sq_per_action, std::size_t neighborhood_size,
                                    double sigma_q_sq, double alpha_clamp, double d_span, double sigma_floor) {
    if (!(sigma_q_sq > 0.0)) throw ConfigError("init", "sigma_q^2 must be > 0");
    if (!(alpha_clamp > 0.0 && alpha_clamp <= 0.25)) throw ConfigError("exploration.alpha_clamp", "must lie in (0, 1/4]");
    if (d_span == 0.0) return std::nullopt;
    if (sigma_sq_per_action.size() < 2) throw std::invalid_argument("beta_schedule needs at least 2 actions");

    const double n = static_cast<double>(neighborhood_size);
    double log_ratio = 0.0;
    for (double s2 : sigma_sq_per_action) log_ratio += std::log(n * std::max(s2, sigma_floor) / sigma_q_sq);
    const double level = log_ratio / std::log(alpha_clamp);
    const double clamped = level >= alpha_clamp ? level : alpha_clamp;
    return std::log(clamped) / d_span;
}

std::optional<double> apply_visitation_cap(std::optional<double> beta, double d_span, std::uint64_t state_visits) {
    if (!beta || d_span == 0.0) return beta;
    const double limit = std::log(static_cast<double>(std::max<std::uint64_t>(state_visits, 1))) / d_span;
    return std::clamp(*beta, -limit, limit);
}

std::vector<double> boltzmann_policy(std::span<const double> q_tilde, std::optional<double> beta) {
    const std::size_t na = q_tilde.size();
    if (na == 0) throw std::invalid_argument("boltzmann_policy needs at least one action");
    std::vector<double> probs(na, 0.0);
    if (!beta || *beta == 0.0) {
        std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(na));
        return probs;
    }
    const double b = *beta;
    // Reference is the value with the largest exponent so all shifted
    // exponents are <= 0.
    const auto ref_it = b > 0.0 ? std::max_element(q_tilde.begin(), q_tilde.end())
                                : std::min_element(q_tilde.begin(), q_tilde.end());
    const double ref = *ref_it;
    if (std::isinf(b)) {
        std::size_t ties = 0;
        for (double q : q_tilde) ties += (q == ref);
        for (std::size_t a = 0; a < na; ++a) probs[a] = q_tilde[a] == ref ? 1.0 / static_cast<double>(ties) : 0.0;
        return probs;
    }
    double total = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
        probs[a] = std::exp(b * (q_tilde[a] - ref));
        total += probs[a];
    }
    for (double& p : probs) p /= total;
    return probs;
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
    const double u = rng.uniform01();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = i;
        cumulative += probs[i];
        if (u < cumulative) return i;
    }
    return last_positive;
}

double ExplorationSnapshot::sigma_mean() const {
    if (sigma.empty()) return 0.0;
    double total = 0.0;
    for (double s : sigma) total += s;
    return total / static_cast<double>(sigma.size());
}

ExplorationSnapshot explore_state(std::span<const double> neighbor_rows, std::size_t neighborhood_size,
                                  std::span<const double> own_row, double sigma_q_sq,
                                  const ExplorationParams& params, std::uint64_t state_visits) {
    const std::size_t na = own_row.size();
    if (neighbor_rows.size() != neighborhood_size * na)
        throw std::invalid_argument("explore_state: neighbor rows do not match N_k x A");
    if (neighborhood_size < 2)
        throw InsufficientNeighbors("neighborhood has " + std::to_string(neighborhood_size) + " agents; need >= 2");

    ExplorationSnapshot snap;
    snap.sigma.resize(na);
    snap.q_tilde.resize(na);
    std::vector<double> sigma_sq(na);
    std::vector<double> column(neighborhood_size);
    for (std::size_t a = 0; a < na; ++a) {
        for (std::size_t l = 0; l < neighborhood_size; ++l) column[l] = neighbor_rows[l * na + a];
        sigma_sq[a] = sample_variance(column).variance;
        snap.sigma[a] = std::sqrt(sigma_sq[a]);
        snap.q_tilde[a] = snap.sigma[a] + own_row[a];
    }
    snap.d_span = d_span(snap.q_tilde);
    snap.beta = beta_schedule(sigma_sq, neighborhood_size, sigma_q_sq, params.alpha_clamp, snap.d_span,
                              params.sigma_floor);
    if (params.visitation_cap) snap.beta = apply_visitation_cap(snap.beta, snap.d_span, state_visits);
    snap.policy = boltzmann_policy(snap.q_tilde, snap.beta);
    return snap;
}

}  // namespace gea
