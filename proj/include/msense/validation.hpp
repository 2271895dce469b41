#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msense/aggregation.hpp"
#include "msense/analysis.hpp"
#include "msense/decision.hpp"
#include "msense/hierarchy.hpp"
#include "msense/interference.hpp"
#include "msense/oracle.hpp"

namespace msense::validation {

struct BeliefReport {
    double max_error_enumeration = 0.0; // closed form vs Bayes posterior
    double max_error_filter = 0.0;      // closed form vs history-aware filter
    std::size_t posteriors_checked = 0;
    std::size_t histories_checked = 0;
    bool observations_consistent = true;

    double max_error() const { return std::max(max_error_enumeration, max_error_filter); }
};

struct BeliefSuiteOptions {
    std::vector<int> sizes{2, 4, 6};
    std::vector<int> depths{2, 3};
    int trees_per_shape = 10;
    int histories_per_cell = 3;
    int history_length = 5;
    MarkovParams markov{0.3, 0.2};
    std::uint64_t seed = 1;
};

/// Checks the product-form belief against exhaustive Bayes posteriors for
/// every state and reachable observation, and against the exact filter over
/// random observation histories.
inline BeliefReport run_belief_suite(const BeliefSuiteOptions& opt = {})
{
    BeliefReport report;
    RandomStream rng(opt.seed);
    const double pi = steady_state_probability(opt.markov);
    for (int n : opt.sizes) {
        for (int depth : opt.depths) {
            for (int r = 0; r < opt.trees_per_shape; ++r) {
                const auto tree = oracle::random_tree(n, depth, rng);
                const auto index = build_distance_index(tree, InterferenceMatrix(n));
                const std::uint64_t states = std::uint64_t{1} << n;
                for (int i = 0; i < n; ++i) {
                    std::map<std::vector<int>, bool> seen;
                    for (std::uint64_t s = 0; s < states; ++s) {
                        const auto b = oracle::state_from_bits(s, n);
                        const auto obs = observe(tree, aggregate_up(tree, b), i);
                        if (obs != oracle::observation_by_definition(tree, i, b)) {
                            report.observations_consistent = false;
                        }
                        if (seen.emplace(obs, true).second) {
                            const auto post = oracle::posterior_by_enumeration(tree, i, obs, pi);
                            for (std::uint64_t s2 = 0; s2 < states; ++s2) {
                                const double v = belief_joint(obs, index[i], oracle::state_from_bits(s2, n));
                                report.max_error_enumeration =
                                    std::max(report.max_error_enumeration, std::abs(v - post[s2]));
                            }
                            ++report.posteriors_checked;
                        }
                    }
                    for (int h = 0; h < opt.histories_per_cell; ++h) {
                        auto b = sample_steady_state(static_cast<std::size_t>(n), opt.markov, rng);
                        std::vector<std::vector<int>> history;
                        for (int t = 0; t < opt.history_length; ++t) {
                            if (t > 0) {
                                b = step(b, opt.markov, rng);
                            }
                            history.push_back(observe(tree, aggregate_up(tree, b), i));
                        }
                        const auto filtered = oracle::forward_filter(tree, i, history, opt.markov);
                        for (std::uint64_t s2 = 0; s2 < states; ++s2) {
                            const double v = belief_joint(history.back(), index[i], oracle::state_from_bits(s2, n));
                            report.max_error_filter = std::max(report.max_error_filter, std::abs(v - filtered[s2]));
                        }
                        ++report.histories_checked;
                    }
                }
            }
        }
    }
    return report;
}

struct AverageRewardCase {
    std::string scheme;
    double closed_form = 0.0;
    Estimate simulated;

    double z_score() const
    {
        return simulated.std_error > 0.0 ? std::abs(closed_form - simulated.mean) / simulated.std_error
                                         : (closed_form == simulated.mean ? 0.0 : INFINITY);
    }
};

struct AverageRewardOptions {
    GridTopology grid{4, 4};
    MarkovParams markov{0.1, 0.1};
    RewardParams reward{1.0, 0.0, 1.0};
    double alpha = 2.0;
    double p_block = 0.0;
    std::size_t slots = 200000;
    std::size_t batches = 100;
    std::uint64_t seed = 11;
};

/// Closed-form long-run reward against the time average of a simulated
/// trajectory, for the regular and greedy trees on one layout.
inline std::vector<AverageRewardCase> run_average_reward_suite(const AverageRewardOptions& opt = {})
{
    RandomStream rng(opt.seed);
    const auto layout = sample_blockage(opt.grid, opt.p_block, rng);
    const auto phi = build_interference_matrix(opt.grid, layout, opt.alpha);
    const double pi = steady_state_probability(opt.markov);
    std::vector<AverageRewardCase> cases;
    const std::pair<std::string, AggregationTree> trees[] = {
        {"regular", build_regular_tree(opt.grid)},
        {"greedy", build_greedy_tree(phi)},
    };
    for (const auto& [name, tree] : trees) {
        const auto index = build_distance_index(tree, phi);
        AverageRewardCase c;
        c.scheme = name;
        c.closed_form = closed_form_average_reward(index, opt.reward, pi);
        auto sim_rng = RandomStream::derive(opt.seed, {cases.size()});
        c.simulated = simulate_average_reward(tree, index, opt.markov, opt.reward, opt.slots, sim_rng, opt.batches);
        cases.push_back(c);
    }
    return cases;
}

} // namespace msense::validation
