#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "msense/hierarchy.hpp"
#include "msense/occupancy.hpp"

namespace msense {

/// Aggregate occupied-cell counts o_0..o_D seen by one cell, one per
/// hierarchical-distance class.
using ObservationVector = std::vector<int>;

/// S[L][m]: occupied cells inside level-L cluster m.
using NodeSums = std::vector<std::vector<int>>;

/// Upward fusion: leaves report their bit, each head sums its children.
inline NodeSums aggregate_up(const AggregationTree& tree, const NetworkState& state)
{
    if (static_cast<int>(state.size()) != tree.n_cells()) {
        throw std::invalid_argument("state length does not match the tree");
    }
    NodeSums sums(static_cast<std::size_t>(tree.depth()) + 1);
    sums[0].assign(state.begin(), state.end());
    for (int L = 1; L <= tree.depth(); ++L) {
        auto& level = sums[static_cast<std::size_t>(L)];
        level.assign(static_cast<std::size_t>(tree.cluster_count(L)), 0);
        for (int k = 0; k < tree.cluster_count(L); ++k) {
            for (int child : tree.children(L, k)) {
                level[k] += sums[static_cast<std::size_t>(L) - 1][child];
            }
        }
    }
    return sums;
}

/// Downward step: cell i differences the sums of its ancestors,
/// o_L = S_{P_L(i)} - S_{P_{L-1}(i)}.
inline ObservationVector observe(const AggregationTree& tree, const NodeSums& sums, int cell)
{
    ObservationVector obs(static_cast<std::size_t>(tree.depth()) + 1);
    obs[0] = sums[0].at(static_cast<std::size_t>(cell));
    for (int L = 1; L <= tree.depth(); ++L) {
        obs[L] = sums[L][tree.parent(L, cell)] - sums[L - 1][tree.parent(L - 1, cell)];
    }
    return obs;
}

inline std::vector<ObservationVector> observe_all(const AggregationTree& tree, const NodeSums& sums)
{
    std::vector<ObservationVector> all;
    all.reserve(static_cast<std::size_t>(tree.n_cells()));
    for (int i = 0; i < tree.n_cells(); ++i) {
        all.push_back(observe(tree, sums, i));
    }
    return all;
}

} // namespace msense
