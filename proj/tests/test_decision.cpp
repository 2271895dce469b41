#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include <gtest/gtest.h>

#include "msense/decision.hpp"
#include "msense/oracle.hpp"

using namespace msense;

namespace {

const RewardParams kBaseParams{1.0, 0.0, 1.0};

struct Instance {
    GridTopology grid;
    InterferenceMatrix phi;
    AggregationTree tree;
    DistanceClassIndex index;
};

Instance make_instance(int rows, int cols, double p_block, std::uint64_t seed)
{
    RandomStream rng(seed);
    const GridTopology g(rows, cols);
    auto phi = build_interference_matrix(g, sample_blockage(g, p_block, rng), 2.0);
    auto tree = build_greedy_tree(phi);
    auto index = build_distance_index(tree, phi);
    return {g, std::move(phi), std::move(tree), std::move(index)};
}

} // namespace

TEST(PosteriorMarginal, Values)
{
    EXPECT_EQ(posterior_marginal(0, 7), 0.0);
    EXPECT_EQ(posterior_marginal(5, 5), 1.0);
    EXPECT_EQ(posterior_marginal(2, 4), 0.5);
    EXPECT_THROW(posterior_marginal(3, 2), std::invalid_argument);
    EXPECT_THROW(posterior_marginal(-1, 2), std::invalid_argument);
    EXPECT_THROW(posterior_marginal(0, 0), std::invalid_argument);
}

TEST(BeliefJoint, IndicatorAndUniformity)
{
    const auto tree = build_regular_tree(GridTopology(1, 2));
    const auto index = build_distance_index(tree, InterferenceMatrix(2));
    // Cell 0 observes itself idle and one busy cell in its size-1 class.
    EXPECT_EQ(belief_joint({0, 1}, index[0], {0, 1}), 1.0);
    EXPECT_EQ(belief_joint({0, 1}, index[0], {1, 1}), 0.0);

    // One class of size 2 holding one busy cell.
    const auto star = AggregationTree::from_partitions(3, {{{0, 1, 2}}});
    const auto sidx = build_distance_index(star, InterferenceMatrix(3));
    EXPECT_DOUBLE_EQ(belief_joint({0, 1}, sidx[0], {0, 1, 0}), 0.5);
    EXPECT_DOUBLE_EQ(belief_joint({0, 1}, sidx[0], {0, 0, 1}), 0.5);
    EXPECT_EQ(belief_joint({0, 1}, sidx[0], {0, 1, 1}), 0.0);
}

TEST(BeliefJoint, NormalizesFactorizesAndMatchesMarginals)
{
    RandomStream rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(8));
        const auto tree = oracle::random_tree(n, 1 + static_cast<int>(rng.below(3)), rng);
        const auto index = build_distance_index(tree, InterferenceMatrix(n));
        const auto truth = sample_bernoulli_state(static_cast<std::size_t>(n), 0.5, rng);
        const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const auto obs = oracle::observation_by_definition(tree, i, truth);
        const std::uint64_t states = std::uint64_t{1} << n;

        double total = 0.0;
        std::vector<double> marginal(static_cast<std::size_t>(n), 0.0);
        for (std::uint64_t s = 0; s < states; ++s) {
            const auto b = oracle::state_from_bits(s, n);
            const double w = belief_joint(obs, index[i], b);
            total += w;
            for (int j = 0; j < n; ++j) {
                marginal[j] += w * b[j];
            }
        }
        ASSERT_NEAR(total, 1.0, 1e-12);
        for (int L = 0; L <= tree.depth(); ++L) {
            for (int j : index[i].members[L]) {
                ASSERT_NEAR(marginal[j], posterior_marginal(obs[L], index[i].size(L)), 1e-12);
            }
        }
        // Factorization: marginalizing out every class but one leaves 1 / C(n_L, o_L)
        // on each consistent configuration of that class.
        for (int L = 0; L <= tree.depth(); ++L) {
            const auto& cls = index[i].members[L];
            std::vector<double> by_pattern(std::size_t{1} << cls.size(), 0.0);
            for (std::uint64_t s = 0; s < states; ++s) {
                const auto b = oracle::state_from_bits(s, n);
                std::size_t pattern = 0;
                for (std::size_t k = 0; k < cls.size(); ++k) {
                    pattern |= static_cast<std::size_t>(b[cls[k]]) << k;
                }
                by_pattern[pattern] += belief_joint(obs, index[i], b);
            }
            for (std::size_t pattern = 0; pattern < by_pattern.size(); ++pattern) {
                const bool consistent = std::popcount(pattern) == obs[L];
                const double expected = consistent ? inverse_binomial(static_cast<int>(cls.size()), obs[L]) : 0.0;
                ASSERT_NEAR(by_pattern[pattern], expected, 1e-12);
            }
        }
    }
}

TEST(ExpectedLocalReward, ClosedFormCases)
{
    const auto inst = make_instance(4, 4, 0.0, 1);
    const int depth = inst.tree.depth();
    const ObservationVector idle(static_cast<std::size_t>(depth) + 1, 0);
    EXPECT_EQ(expected_local_reward(0, idle, inst.index[3], kBaseParams), 0.0);
    EXPECT_EQ(expected_local_reward(1, idle, inst.index[3], kBaseParams), 1.0);

    ObservationVector self_busy = idle;
    self_busy[0] = 1;
    EXPECT_DOUBLE_EQ(expected_local_reward(1, self_busy, inst.index[3], kBaseParams), -1.0);
    EXPECT_EQ(optimal_access(self_busy, inst.index[3], kBaseParams), 0);
    EXPECT_EQ(optimal_access(idle, inst.index[3], kBaseParams), 1);
}

TEST(ExpectedLocalReward, EqualsBeliefWeightedTrueReward)
{
    // Averaging r_i(1, b) over the closed-form belief reproduces the closed form.
    RandomStream rng(40);
    const auto inst = make_instance(2, 3, 0.3, 40);
    const int n = inst.grid.size();
    const RewardParams params{1.0, 0.4, 0.7};
    for (int trial = 0; trial < 20; ++trial) {
        const auto truth = sample_bernoulli_state(static_cast<std::size_t>(n), 0.5, rng);
        const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const auto obs = observe(inst.tree, aggregate_up(inst.tree, truth), i);
        double expected = 0.0;
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
            const auto b = oracle::state_from_bits(s, n);
            expected += belief_joint(obs, inst.index[i], b) * true_local_reward(i, b, inst.phi, params);
        }
        ASSERT_NEAR(expected_local_reward(1, obs, inst.index[i], params), expected, 1e-12);
    }
}

TEST(OptimalAccess, TieResolvesToNoAccess)
{
    // rho_I = 1 and a visible class whose expected interference is exactly 1.
    const auto tree = build_regular_tree(GridTopology(1, 2));
    InterferenceMatrix phi(2);
    phi.set_symmetric(0, 1, 1.0);
    const auto index = build_distance_index(tree, phi);
    EXPECT_EQ(expected_local_reward(1, {0, 1}, index[0], kBaseParams), 0.0);
    EXPECT_EQ(optimal_access({0, 1}, index[0], kBaseParams), 0);
}

TEST(OptimalAccess, LargeLambdaForbidsAccessNearOccupancy)
{
    const auto inst = make_instance(4, 4, 0.0, 2);
    const RewardParams harsh{1.0, 0.0, 1e6};
    RandomStream rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto b = sample_bernoulli_state(16, 0.3, rng);
        const auto all = observe_all(inst.tree, aggregate_up(inst.tree, b));
        for (int i = 0; i < 16; ++i) {
            bool visible = false;
            for (int L = 0; L <= inst.tree.depth(); ++L) {
                visible = visible || (all[i][L] > 0 && inst.index[i].interference[L] > 0.0);
            }
            if (visible) {
                ASSERT_EQ(optimal_access(all[i], inst.index[i], harsh), 0);
            }
        }
    }
}

TEST(NetworkReward, ExtremeStates)
{
    const auto inst = make_instance(4, 4, 0.0, 3);
    const auto idle = observe_all(inst.tree, aggregate_up(inst.tree, NetworkState(16, 0)));
    EXPECT_DOUBLE_EQ(network_reward(idle, inst.index, kBaseParams), 16.0);
    const auto busy = observe_all(inst.tree, aggregate_up(inst.tree, NetworkState(16, 1)));
    EXPECT_EQ(network_reward(busy, inst.index, kBaseParams), 0.0);
}

TEST(NetworkReward, RedundantPathAndUpperBoundDominance)
{
    RandomStream rng(50);
    const auto inst = make_instance(4, 4, 0.4, 50);
    for (int trial = 0; trial < 200; ++trial) {
        const auto b = sample_bernoulli_state(16, 0.5, rng);
        const auto all = observe_all(inst.tree, aggregate_up(inst.tree, b));
        // Independent term-by-term evaluation straight from the class members.
        double manual = 0.0;
        for (int i = 0; i < 16; ++i) {
            double r = (1 - b[i]) * kBaseParams.rho_idle + b[i] * kBaseParams.rho_busy;
            for (int L = 0; L <= inst.tree.depth(); ++L) {
                double occ = 0.0, phi_sum = 0.0;
                for (int j : inst.index[i].members[L]) {
                    occ += b[j];
                    phi_sum += inst.phi(i, j);
                }
                r -= kBaseParams.lambda * occ / inst.index[i].size(L) * phi_sum;
            }
            manual += std::max(0.0, r);
        }
        ASSERT_NEAR(network_reward(all, inst.index, kBaseParams), manual, 1e-12);
    }
}

TEST(NetworkReward, DominatedByBeliefAveragedFullInformation)
{
    // max{0, E[r]} <= E[max{0, r}] under each cell's own belief. The
    // realized full-information reward of one particular state can be lower.
    RandomStream rng(51);
    const auto inst = make_instance(3, 3, 0.4, 51);
    const int n = 9;
    for (int trial = 0; trial < 30; ++trial) {
        const auto b = sample_bernoulli_state(n, 0.5, rng);
        const auto all = observe_all(inst.tree, aggregate_up(inst.tree, b));
        double bound = 0.0;
        for (int i = 0; i < n; ++i) {
            double cell_bound = 0.0;
            for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
                const auto x = oracle::state_from_bits(s, n);
                const double w = belief_joint(all[i], inst.index[i], x);
                if (w > 0.0) {
                    cell_bound += w * std::max(0.0, true_local_reward(i, x, inst.phi, kBaseParams));
                }
            }
            ASSERT_LE(std::max(0.0, expected_local_reward(1, all[i], inst.index[i], kBaseParams)), cell_bound + 1e-12);
            bound += cell_bound;
        }
        ASSERT_LE(network_reward(all, inst.index, kBaseParams), bound + 1e-12);
    }
}

TEST(NetworkReward, ScalingInvariance)
{
    RandomStream rng(60);
    const auto inst = make_instance(3, 3, 0.3, 60);
    const RewardParams base{1.0, 0.3, 0.8};
    const double c = 3.5;
    const RewardParams scaled{c * base.rho_idle, c * base.rho_busy, c * base.lambda};
    for (int trial = 0; trial < 50; ++trial) {
        const auto b = sample_bernoulli_state(9, 0.5, rng);
        const auto all = observe_all(inst.tree, aggregate_up(inst.tree, b));
        ASSERT_NEAR(network_reward(all, inst.index, scaled), c * network_reward(all, inst.index, base), 1e-12);
        for (int i = 0; i < 9; ++i) {
            ASSERT_EQ(optimal_access(all[i], inst.index[i], scaled), optimal_access(all[i], inst.index[i], base));
        }
    }
}

TEST(RealizedReward, MatchesMatrixForm)
{
    RandomStream rng(70);
    const auto inst = make_instance(3, 4, 0.2, 70);
    const RewardParams params{1.0, 0.25, 0.6};
    const int n = 12;
    EXPECT_EQ(realized_reward(AccessDecision(n, 0), NetworkState(n, 1), inst.phi, params), 0.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto b = sample_bernoulli_state(n, 0.5, rng);
        AccessDecision a(n);
        for (auto& x : a) {
            x = rng.bernoulli(0.5);
        }
        // a^T (rho_I (1 - b) + rho_B b - lambda Phi b)
        double expected = 0.0;
        for (int i = 0; i < n; ++i) {
            double phib = 0.0;
            for (int j = 0; j < n; ++j) {
                phib += inst.phi(i, j) * b[j];
            }
            expected += a[i] * (params.rho_idle * (1 - b[i]) + params.rho_busy * b[i] - params.lambda * phib);
        }
        ASSERT_NEAR(realized_reward(a, b, inst.phi, params), expected, 1e-12);
    }
    const InterferenceMatrix one(1);
    EXPECT_EQ(realized_reward({1}, {0}, one, params), params.rho_idle);
    EXPECT_THROW(realized_reward({1, 0}, {0}, one, params), std::invalid_argument);
}

TEST(RewardParams, Validation)
{
    EXPECT_NO_THROW(kBaseParams.validate());
    EXPECT_THROW((RewardParams{1.0, 2.0, 1.0}.validate()), std::invalid_argument);
    EXPECT_THROW((RewardParams{1.0, 0.0, 0.0}.validate()), std::invalid_argument);
}
