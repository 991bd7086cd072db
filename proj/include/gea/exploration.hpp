#pragma once

// Neighborhood-variance exploration: the uncertainty bonus, the adaptive
// inverse temperature and the resulting Boltzmann behavior policy.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gea/rng.hpp"

namespace gea {

enum class InitKind { uniform_symmetric, gaussian_truncated };

InitKind parse_init_kind(std::string_view name);
std::string_view init_kind_name(InitKind kind);

// Zero-mean, bounded-support distribution for initial value estimates.
//   uniform_symmetric:  U[-scale, scale], variance scale^2 / 3
//   gaussian_truncated: N(0, scale^2) restricted to [-t*scale, t*scale]
struct InitDistribution {
    InitKind kind = InitKind::uniform_symmetric;
    double scale = 1.0;
    double truncation = 2.0;  // gaussian_truncated only, in units of scale

    void validate() const;
    double variance() const;
    double bound() const { return kind == InitKind::uniform_symmetric ? scale : truncation * scale; }
    double sample(Rng& rng) const;
};

// alpha(n) = c0 / (c1 + n)^p where n >= 1 counts visits of (s,a) including
// the current one. p in (0.5, 1] gives sum(alpha) = inf, sum(alpha^2) < inf.
struct StepSchedule {
    double c0 = 1.0;
    double c1 = 1.0;
    double p = 0.8;

    void validate() const;
    double alpha(std::uint64_t visits) const;
};

struct ExplorationParams {
    double alpha_clamp = 0.25;  // base of the log and floor of the clamp, in (0, 1/4]
    double sigma_floor = 1e-12;  // 0 allows the exact greedy limit at zero variance
    // Caps |beta| at ln(c(s)) / D(s) so that every action keeps probability
    // at least 1 / (A c(s)).
    bool visitation_cap = true;

    void validate() const;
};

struct VarianceMean {
    double variance;
    double mean;
};

// Unbiased sample variance (divisor n - 1) and mean; needs n >= 2.
VarianceMean sample_variance(std::span<const double> values);

// max_a q - min_a q.
double d_span(std::span<const double> q_tilde);

// Inverse temperature for one state. Returns nullopt when d_span == 0, which
// callers turn into the uniform policy.
//   L    = log_{alpha_clamp} prod_b [N_k max(sigma_sq[b], floor) / sigma_q_sq]
//   beta = ln(max(L, alpha_clamp)) / d_span
// L is accumulated as a sum of logs so tiny variances do not underflow.
std::optional<double> beta_schedule(std::span<const double> sigma_sq_per_action, std::size_t neighborhood_size,
                                    double sigma_q_sq, double alpha_clamp, double d_span, double sigma_floor);

// Limits |beta| to ln(state_visits) / d_span. state_visits counts the
// current visit, so the first visit of a state is always uniform.
std::optional<double> apply_visitation_cap(std::optional<double> beta, double d_span, std::uint64_t state_visits);

// eta(a) proportional to exp(beta q(a)), max-shifted. nullopt is uniform;
// beta = +inf (-inf) spreads mass uniformly over the argmax (argmin).
std::vector<double> boltzmann_policy(std::span<const double> q_tilde, std::optional<double> beta);

// Index drawn from `probs` with one uniform draw.
std::size_t sample_index(std::span<const double> probs, Rng& rng);

struct ExplorationSnapshot {
    std::vector<double> sigma;    // per-action neighborhood standard deviation
    std::vector<double> q_tilde;  // sigma + own estimate
    std::optional<double> beta;   // nullopt: uniform
    double d_span = 0.0;
    std::vector<double> policy;

    double sigma_mean() const;
};

// Everything needed to act in one state. `neighbor_rows` holds N_k rows of A
// estimates (row-major), `own_row` the agent's own estimates at that state.
// `state_visits` is c(s) including the current visit; used only when the
// visitation cap is enabled.
ExplorationSnapshot explore_state(std::span<const double> neighbor_rows, std::size_t neighborhood_size,
                                  std::span<const double> own_row, double sigma_q_sq,
                                  const ExplorationParams& params, std::uint64_t state_visits);

}  // namespace gea
