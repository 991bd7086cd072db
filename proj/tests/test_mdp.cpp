#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gea/errors.hpp"
#include "gea/kernels.hpp"
#include "gea/mdp.hpp"
#include "gea/rng.hpp"

using namespace gea;

namespace {

// Discounted return of following `actions[row]` from the start of a deep
// sea, stepping through the transition table by hand (it is deterministic).
struct Rollout {
    double ret = 0.0;
    bool treasure = false;
};

Rollout rollout_deep_sea(const TabularMdp& mdp, std::size_t depth, const std::vector<ActionId>& per_row) {
    Rollout out;
    StateId s = mdp.initial_state();
    double discount = 1.0;
    for (std::size_t row = 0; row < depth; ++row) {
        const ActionId a = per_row[row];
        const auto p = mdp.transition_row(s, a);
        StateId next = 0;
        int hits = 0;
        for (StateId t = 0; t < p.size(); ++t)
            if (p[t] == 1.0) {
                next = t;
                ++hits;
            }
        EXPECT_EQ(hits, 1);
        const double r = mdp.reward(s, a, next);
        if (r > 0.5) out.treasure = true;
        out.ret += discount * r;
        discount *= mdp.discount();
        s = next;
    }
    EXPECT_TRUE(mdp.is_terminal(s));
    return out;
}

DeterministicPolicy constant_policy(std::size_t num_states, ActionId a) {
    return DeterministicPolicy{std::vector<ActionId>(num_states, a)};
}

TabularMdp single_state(double reward, double gamma) {
    return TabularMdp(1, 1, {1.0}, {reward}, gamma, 0);
}

StochasticPolicy random_policy(std::size_t ns, std::size_t na, Rng& rng) {
    StochasticPolicy pi(ns, na);
    for (StateId s = 0; s < ns; ++s) {
        double total = 0.0;
        auto row = pi.row(s);
        for (auto& x : row) total += (x = rng.uniform(0.05, 1.0));
        for (auto& x : row) x /= total;
    }
    return pi;
}

}  // namespace

TEST(DeepSea, StateCountAndLayout) {
    const auto mdp = deep_sea_build({.depth = 3});
    EXPECT_EQ(mdp.num_states(), 10u);
    EXPECT_EQ(mdp.num_actions(), 2u);
    EXPECT_EQ(mdp.initial_state(), 0u);
    EXPECT_TRUE(mdp.is_terminal(9));
    EXPECT_EQ(mdp.probability(0, kRight, deep_sea_state(3, 1, 1)), 1.0);
    EXPECT_EQ(mdp.probability(0, kLeft, deep_sea_state(3, 1, 0)), 1.0);
    EXPECT_DOUBLE_EQ(mdp.reward(0, kRight, deep_sea_state(3, 1, 1)), -0.01 / 3.0);
}

TEST(DeepSea, RejectsShallowGrid) {
    EXPECT_THROW(deep_sea_build({.depth = 1}), InvalidSpec);
    EXPECT_THROW(deep_sea_build({.depth = 0}), InvalidSpec);
}

TEST(DeepSea, AlwaysRightReturnMatchesRollout) {
    const auto mdp = deep_sea_build({.depth = 3});
    const auto roll = rollout_deep_sea(mdp, 3, {kRight, kRight, kRight});
    EXPECT_TRUE(roll.treasure);
    // Costs are paid at steps 0 and 1 (discounted), the treasure at step 2.
    const double c = 0.01 / 3.0, g = 0.99;
    EXPECT_NEAR(roll.ret, -c - g * c + g * g, 1e-15);

    const auto v = policy_evaluation(mdp, StochasticPolicy::from_deterministic(constant_policy(10, kRight), 2), 1e-13);
    EXPECT_NEAR(v[0], roll.ret, 1e-12);
}

TEST(DeepSea, AlwaysLeftReturnsZero) {
    const auto mdp = deep_sea_build({.depth = 3});
    EXPECT_EQ(rollout_deep_sea(mdp, 3, {kLeft, kLeft, kLeft}).ret, 0.0);
    const auto v = policy_evaluation(mdp, StochasticPolicy::from_deterministic(constant_policy(10, kLeft), 2), 1e-13);
    EXPECT_NEAR(v[0], 0.0, 1e-13);
}

// Every row is visited once per episode, so the 2^H action sequences are
// exactly the distinct deterministic behaviors from the start state.
TEST(DeepSea, ExhaustiveEnumerationSingleTreasurePolicy) {
    for (std::size_t h = 2; h <= 5; ++h) {
        const auto mdp = deep_sea_build({.depth = h});
        const auto sol = value_iteration(mdp, 1e-13);
        int treasure_paths = 0;
        double best = -1e9;
        std::size_t best_mask = 0;
        for (std::size_t mask = 0; mask < (std::size_t{1} << h); ++mask) {
            std::vector<ActionId> seq(h);
            for (std::size_t r = 0; r < h; ++r) seq[r] = (mask >> r) & 1u ? kRight : kLeft;
            const auto roll = rollout_deep_sea(mdp, h, seq);
            if (roll.treasure) ++treasure_paths;
            if (roll.ret > best + 1e-15) {
                best = roll.ret;
                best_mask = mask;
            }
        }
        // The last action is free, so two sequences (differing only there) collect it.
        EXPECT_EQ(treasure_paths, 2) << "H=" << h;
        EXPECT_EQ(best_mask & ((std::size_t{1} << (h - 1)) - 1), (std::size_t{1} << (h - 1)) - 1);
        EXPECT_NEAR(sol.values[0], best, 1e-11) << "H=" << h;
    }
}

TEST(ValueIteration, DeepSeaOptimalPolicyFollowsDiagonal) {
    const auto mdp = deep_sea_build({.depth = 3});
    const auto sol = value_iteration(mdp, 1e-12);
    EXPECT_EQ(sol.policy.actions[deep_sea_state(3, 0, 0)], kRight);
    EXPECT_EQ(sol.policy.actions[deep_sea_state(3, 1, 1)], kRight);
    const auto on_path = reachable_states(mdp, 0, &sol.policy);
    EXPECT_TRUE(on_path[deep_sea_state(3, 2, 2)]);
    EXPECT_FALSE(on_path[deep_sea_state(3, 1, 0)]);
    EXPECT_LE(bellman_optimality_residual(mdp, sol.values), 1e-11);
}

TEST(ValueIteration, GeometricSeries) {
    const auto sol = value_iteration(single_state(1.0, 0.9), 1e-12);
    EXPECT_NEAR(sol.values[0], 10.0, 1e-11);
}

TEST(ValueIteration, ZeroRewardsGiveZeroValues) {
    auto mdp = random_mdp(6, 3, 0.0, 11);
    const auto sol = value_iteration(mdp, 1e-12);
    for (double v : sol.values) EXPECT_EQ(v, 0.0);
}

TEST(ValueIteration, OptimalActionSetsIncludeTies) {
    const auto mdp = deep_sea_build({.depth = 4});
    const auto sol = value_iteration(mdp, 1e-13);
    const auto sets = optimal_action_sets(mdp, sol);
    // Bottom-row actions both lead to the terminal state with the same reward.
    EXPECT_EQ(sets[deep_sea_state(4, 3, 3)].size(), 2u);
    EXPECT_EQ(sets[deep_sea_state(4, 0, 0)], std::vector<ActionId>{kRight});
}

TEST(PolicyEvaluation, TwoStateChain) {
    // s0 -> s1 with reward 1; s1 absorbing with reward 0.
    TabularMdp mdp(2, 1, {0, 1, 0, 1}, {0, 1, 0, 0}, 0.5, 0, {1});
    const auto v = policy_evaluation(mdp, StochasticPolicy::uniform(2, 1), 1e-13);
    EXPECT_NEAR(v[0], 1.0, 1e-13);
    EXPECT_NEAR(v[1], 0.0, 1e-13);
}

TEST(PolicyEvaluation, OptimalPolicyRecoversOptimalValue) {
    const double tol = 1e-10;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto mdp = random_mdp(8, 3, 0.5, seed);
        const auto sol = value_iteration(mdp, tol);
        const auto v = policy_evaluation(mdp, StochasticPolicy::from_deterministic(sol.policy, 3), tol);
        for (StateId s = 0; s < 8; ++s) EXPECT_NEAR(v[s], sol.values[s], 2 * tol);
    }
}

TEST(PolicyEvaluation, UniformOnZeroRewardIsZero) {
    const auto mdp = random_mdp(5, 2, 0.0, 3);
    for (double v : policy_evaluation(mdp, StochasticPolicy::uniform(5, 2), 1e-12)) EXPECT_EQ(v, 0.0);
}

// Iterative sweeps and the direct linear solve are independent routes to
// V^pi; both must agree, and no policy may beat V*.
TEST(PolicyEvaluation, IterativeAndDirectAgreeOnRandomMdps) {
    Rng rng(99);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t ns = 2 + seed % 9, na = 2 + seed % 3;
        const auto mdp = random_mdp(ns, na, 0.6, 1000 + seed, 0.95);
        const auto pi = random_policy(ns, na, rng);
        const auto a = policy_evaluation(mdp, pi, 1e-11, EvaluationMethod::iterative);
        const auto b = policy_evaluation(mdp, pi, 1e-11, EvaluationMethod::direct);
        const auto sol = value_iteration(mdp, 1e-11);
        for (StateId s = 0; s < ns; ++s) {
            EXPECT_NEAR(a[s], b[s], 1e-9);
            EXPECT_LE(b[s], sol.values[s] + 1e-9);
        }
    }
}

TEST(PolicyEvaluation, BackendsAgree) {
    const auto saved = kernels::active_backend();
    Rng rng(5);
    const auto mdp = random_mdp(40, 4, 0.5, 77, 0.97);
    const auto pi = random_policy(40, 4, rng);
    kernels::set_backend(kernels::Backend::scalar);
    const auto a = policy_evaluation(mdp, pi, 1e-12);
    kernels::set_backend(kernels::best_backend());
    const auto b = policy_evaluation(mdp, pi, 1e-12);
    kernels::set_backend(saved);
    for (std::size_t s = 0; s < a.size(); ++s) EXPECT_NEAR(a[s], b[s], 1e-11);
}

TEST(PolicyEvaluation, EvaluatorReusesBuffersAcrossPolicies) {
    const auto mdp = deep_sea_build({.depth = 5});
    PolicyEvaluator ev(mdp);
    const auto sol = value_iteration(mdp, 1e-12);
    const double v_opt = ev.evaluate(StochasticPolicy::from_deterministic(sol.policy, 2), 1e-12)[0];
    const double v_left = ev.evaluate(StochasticPolicy::from_deterministic(constant_policy(26, kLeft), 2), 1e-12)[0];
    EXPECT_NEAR(v_opt, sol.values[0], 2e-12);
    EXPECT_NEAR(v_left, 0.0, 1e-12);
    // Deep sea is acyclic apart from the terminal loop: H + 1 sweeps settle it.
    EXPECT_LE(ev.last_sweeps(), 7u);
}

TEST(MdpStep, MonteCarloMatchesConfiguredDistribution) {
    TabularMdp mdp(2, 1, {0.3, 0.7, 0.3, 0.7}, std::vector<double>(4, 0.0), 0.9, 0);
    Rng rng(2024);
    int ones = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ones += mdp_step(mdp, 0, 0, rng).next == 1;
    const double freq = static_cast<double>(ones) / n;
    EXPECT_GE(freq, 0.69);
    EXPECT_LE(freq, 0.71);
}

TEST(MdpStep, DeterministicRowIgnoresRng) {
    const auto mdp = deep_sea_build({.depth = 4});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const auto t = mdp_step(mdp, 0, kRight, rng);
        EXPECT_EQ(t.next, deep_sea_state(4, 1, 1));
        EXPECT_DOUBLE_EQ(t.reward, -0.0025);
    }
}

TEST(MdpStep, TerminalIsAbsorbingAndConsumesNoRandomness) {
    const auto mdp = deep_sea_build({.depth = 3});
    Rng rng(1), untouched(1);
    const auto t = mdp_step(mdp, 9, kRight, rng);
    EXPECT_EQ(t.next, 9u);
    EXPECT_EQ(t.reward, 0.0);
    EXPECT_TRUE(rng == untouched);
}

TEST(MdpStep, RejectsOutOfRangeIndices) {
    const auto mdp = deep_sea_build({.depth = 3});
    Rng rng(0);
    EXPECT_THROW(mdp_step(mdp, 10, 0, rng), IndexError);
    EXPECT_THROW(mdp_step(mdp, 0, 2, rng), IndexError);
}

TEST(TabularMdpValidation, RejectsBrokenModels) {
    EXPECT_THROW(single_state(1.0, 1.0), InvalidSpec);
    EXPECT_THROW(single_state(1.0, 0.0), InvalidSpec);
    EXPECT_THROW(TabularMdp(1, 1, {0.9}, {0.0}, 0.9, 0), InvalidSpec);
    EXPECT_THROW(TabularMdp(2, 1, {-0.1, 1.1, 0, 1}, {0, 0, 0, 0}, 0.9, 0), InvalidSpec);
    EXPECT_THROW(TabularMdp(1, 1, {1.0}, {std::nan("")}, 0.9, 0), InvalidSpec);
    EXPECT_THROW(TabularMdp(2, 1, {1.0, 0.0}, {0.0, 0.0}, 0.9, 0), InvalidSpec);
    // Terminal state 1 that leaks back to 0.
    EXPECT_THROW(TabularMdp(2, 1, {0, 1, 1, 0}, {0, 0, 0, 0}, 0.9, 0, {1}), InvalidSpec);
    EXPECT_THROW(TabularMdp(1, 1, {1.0}, {0.0}, 0.9, 3), InvalidSpec);
}

TEST(RandomMdp, SameSeedIsBitIdentical) {
    EXPECT_TRUE(random_mdp(7, 3, 0.4, 42) == random_mdp(7, 3, 0.4, 42));
    EXPECT_FALSE(random_mdp(7, 3, 0.4, 42) == random_mdp(7, 3, 0.4, 43));
}

TEST(RandomMdp, RowsAreStrictlyPositiveDistributions) {
    const auto mdp = random_mdp(9, 4, 0.5, 8);
    for (StateId s = 0; s < 9; ++s)
        for (ActionId a = 0; a < 4; ++a) {
            double total = 0.0;
            for (double p : mdp.transition_row(s, a)) {
                EXPECT_GT(p, 0.0);
                total += p;
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    for (StateId s = 0; s < 9; ++s)
        for (bool r : reachable_states(mdp, s)) EXPECT_TRUE(r);
}

TEST(RandomMdp, SparsityControlsRewardedPairs) {
    const auto mdp = random_mdp(10, 2, 0.25, 4);
    int rewarded = 0;
    for (StateId s = 0; s < 10; ++s)
        for (ActionId a = 0; a < 2; ++a) rewarded += mdp.expected_reward(s, a) > 0.0;
    EXPECT_EQ(rewarded, 5);
    const auto b = mdp.reward_bounds();
    EXPECT_GE(b.min, 0.0);
    EXPECT_LE(b.max, 1.0);
}

TEST(StochasticPolicyTest, ValidateCatchesBadRows) {
    StochasticPolicy ok = StochasticPolicy::uniform(3, 2);
    EXPECT_NO_THROW(ok.validate());
    StochasticPolicy bad(2, 2, {0.5, 0.5, 0.6, 0.6});
    EXPECT_THROW(bad.validate(), ValidationError);
    EXPECT_THROW(StochasticPolicy(2, 2, {1.0, 0.0}), ValidationError);
}
