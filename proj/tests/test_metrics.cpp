#include <gtest/gtest.h>

#include <vector>

#include "gea/errors.hpp"
#include "gea/metrics.hpp"
#include "gea/rng.hpp"

using namespace gea;

TEST(RegretUpdate, OptimalPolicyHasZeroRegret) {
    const double tol = 1e-10;
    const auto mdp = deep_sea_build({.depth = 5});
    const auto sol = value_iteration(mdp, tol);
    PolicyEvaluator ev(mdp);
    const auto r = regret_update(ev, StochasticPolicy::from_deterministic(sol.policy, 2), sol.values[0], 0, tol);
    EXPECT_LE(r.value, 2 * tol);
    EXPECT_FALSE(r.clipped);
}

TEST(RegretUpdate, AlwaysLeftForfeitsTheOptimalValue) {
    const auto mdp = deep_sea_build({.depth = 3});
    const auto sol = value_iteration(mdp, 1e-12);
    PolicyEvaluator ev(mdp);
    StochasticPolicy left(10, 2);
    for (StateId s = 0; s < 10; ++s) left.row(s)[kLeft] = 1.0;
    const auto r = regret_update(ev, left, sol.values[0], 0, 1e-12);
    EXPECT_NEAR(r.value, sol.values[0], 1e-12);
}

TEST(RegretUpdate, NegativeBeyondToleranceIsClippedAndFlagged) {
    const auto mdp = deep_sea_build({.depth = 3});
    const auto sol = value_iteration(mdp, 1e-12);
    PolicyEvaluator ev(mdp);
    const auto r = regret_update(ev, StochasticPolicy::from_deterministic(sol.policy, 2), sol.values[0] - 0.1, 0, 1e-10);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_TRUE(r.clipped);
}

TEST(Ledger, IdenticalEpisodesAccumulate) {
    RegretLedger led(2, 3);
    const std::vector<double> x{0.3, 0.5};
    for (std::size_t e = 0; e < 3; ++e) led.add_evaluation(e, x);
    EXPECT_NEAR(led.cumulative(2, 0), 0.9, 1e-15);
    EXPECT_NEAR(led.cumulative(2, 1), 1.5, 1e-15);
    EXPECT_NEAR(led.total(2), 3 * 0.4, 1e-15);
}

TEST(Ledger, TotalIsMeanOfPerAgentSumsAndNonDecreasing) {
    Rng rng(2);
    const std::size_t agents = 4, episodes = 200;
    RegretLedger led(agents, episodes);
    std::vector<std::vector<double>> logged;
    for (std::size_t e = 0; e < episodes; ++e) {
        std::vector<double> x(agents);
        for (auto& v : x) v = rng.uniform(0, 1);
        logged.push_back(x);
        led.add_evaluation(e, x);
    }
    double prev = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) {
        double direct = 0.0;
        for (std::size_t k = 0; k < agents; ++k)
            for (std::size_t i = 0; i <= e; ++i) direct += logged[i][k];
        direct /= agents;
        EXPECT_NEAR(led.total(e), direct, 1e-10);
        EXPECT_GE(led.total(e), prev);
        prev = led.total(e);
    }
}

TEST(Ledger, InterpolatesBetweenEvaluations) {
    RegretLedger led(1, 7);
    led.add_evaluation(0, std::vector<double>{1.0});
    led.add_evaluation(4, std::vector<double>{0.0});
    EXPECT_EQ(led.filled(), 5u);
    EXPECT_NEAR(led.instant(1, 0), 0.75, 1e-15);
    EXPECT_NEAR(led.instant(2, 0), 0.5, 1e-15);
    EXPECT_NEAR(led.instant(3, 0), 0.25, 1e-15);
    EXPECT_EQ(led.instant(4, 0), 0.0);
    led.add_evaluation(6, std::vector<double>{1.0});
    EXPECT_NEAR(led.instant(5, 0), 0.5, 1e-15);
    EXPECT_NEAR(led.cumulative(6, 0), 1 + 0.75 + 0.5 + 0.25 + 0 + 0.5 + 1, 1e-14);
}

TEST(Ledger, OrderingAndShapeErrors) {
    RegretLedger led(2, 5);
    EXPECT_THROW(led.add_evaluation(1, std::vector<double>{0, 0}), InvalidSpec);
    EXPECT_THROW(led.add_evaluation(0, std::vector<double>{0}), ShapeError);
    led.add_evaluation(0, std::vector<double>{0, 0});
    led.add_evaluation(3, std::vector<double>{0, 0});
    EXPECT_THROW(led.add_evaluation(2, std::vector<double>{0, 0}), InvalidSpec);
    EXPECT_THROW(led.add_evaluation(5, std::vector<double>{0, 0}), IndexError);
    EXPECT_THROW(led.instant(4, 0), IndexError);
}

TEST(EvaluationCadence, DefaultsAndLastEpisode) {
    EXPECT_EQ(default_eval_cadence(10), 1u);
    EXPECT_EQ(default_eval_cadence(11), 5u);
    EXPECT_TRUE(is_evaluation_episode(0, 12, 5));
    EXPECT_FALSE(is_evaluation_episode(3, 12, 5));
    EXPECT_TRUE(is_evaluation_episode(10, 12, 5));
    EXPECT_TRUE(is_evaluation_episode(11, 12, 5));
    EXPECT_THROW(is_evaluation_episode(0, 1, 0), InvalidSpec);
}

TEST(Coverage, FreshCountersAreUncovered) {
    std::vector<VisitCounter> c(3, VisitCounter(4, 2));
    const auto r = coverage_report(c, 1);
    EXPECT_EQ(r.fraction, 0.0);
    EXPECT_EQ(r.min_count, 0u);
    EXPECT_EQ(r.per_state, std::vector<std::uint64_t>(4, 0));
}

TEST(Coverage, UniformExplorationCoversEverything) {
    const auto mdp = random_mdp(10, 2, 0.5, 1);
    std::vector<VisitCounter> c(1, VisitCounter(10, 2));
    Rng rng(6);
    StateId s = 0;
    for (int t = 0; t < 1000000; ++t) {
        const ActionId a = rng.uniform_index(2);
        c[0].record(s, a);
        s = mdp_step(mdp, s, a, rng).next;
    }
    const auto r = coverage_report(c, 10);
    EXPECT_EQ(r.fraction, 1.0);
    EXPECT_LE(static_cast<double>(r.min_count), r.mean_count);
    std::uint64_t total = 0;
    for (StateId x = 0; x < 10; ++x) {
        EXPECT_EQ(c[0].state_visits(x), c[0].pair_visits(x, 0) + c[0].pair_visits(x, 1));
        total += r.per_state[x];
    }
    EXPECT_EQ(total, 1000000u);
}

TEST(Coverage, MaskRestrictsStates) {
    std::vector<VisitCounter> c(1, VisitCounter(3, 2));
    c[0].record(0, 0);
    c[0].record(0, 1);
    const std::vector<bool> mask{true, false, false};
    EXPECT_EQ(coverage_report(c, 1, &mask).fraction, 1.0);
    EXPECT_NEAR(coverage_report(c, 1).fraction, 2.0 / 6.0, 1e-15);
    const std::vector<bool> short_mask{true};
    EXPECT_THROW(coverage_report(c, 1, &short_mask), ShapeError);
}
