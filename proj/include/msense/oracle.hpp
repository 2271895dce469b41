#pragma once

// Brute-force reference computations over all 2^N network states. They share
// no code with the closed-form path beyond the tree data structure itself and
// are meant for validation on small instances only.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "msense/hierarchy.hpp"
#include "msense/occupancy.hpp"
#include "msense/random.hpp"

namespace msense::oracle {

inline NetworkState state_from_bits(std::uint64_t bits, int n)
{
    NetworkState b(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        b[j] = static_cast<std::uint8_t>((bits >> j) & 1U);
    }
    return b;
}

/// Random nested hierarchy of exactly `depth` levels above the leaves.
/// Levels may leave clusters unmerged, so ragged trees are covered too.
inline AggregationTree random_tree(int n_cells, int depth, RandomStream& rng)
{
    if (n_cells < 1 || depth < 0 || (n_cells == 1 && depth > 0)) {
        throw std::invalid_argument("cannot build a tree of that shape");
    }
    std::vector<CellSet> clusters;
    for (int i = 0; i < n_cells; ++i) {
        clusters.push_back({i});
    }
    std::vector<std::vector<CellSet>> partitions;
    for (int level = 1; level <= depth; ++level) {
        const int k = static_cast<int>(clusters.size());
        const int next_count = level == depth ? 1 : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
        std::vector<int> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), 0);
        for (int a = k - 1; a > 0; --a) {
            std::swap(order[a], order[rng.below(static_cast<std::uint64_t>(a) + 1)]);
        }
        std::vector<CellSet> next(static_cast<std::size_t>(next_count));
        for (int pos = 0; pos < k; ++pos) {
            const int g = pos < next_count ? pos : static_cast<int>(rng.below(static_cast<std::uint64_t>(next_count)));
            const auto& src = clusters[order[pos]];
            next[g].insert(next[g].end(), src.begin(), src.end());
        }
        for (auto& c : next) {
            std::sort(c.begin(), c.end());
        }
        partitions.push_back(next);
        clusters = std::move(next);
    }
    return AggregationTree::from_partitions(n_cells, std::move(partitions));
}

/// Hierarchical distance found by scanning cluster membership lists.
inline int distance_by_scan(const AggregationTree& tree, int i, int j)
{
    for (int L = 0; L <= tree.depth(); ++L) {
        for (const auto& cluster : tree.level(L).clusters) {
            const bool has_i = std::find(cluster.begin(), cluster.end(), i) != cluster.end();
            const bool has_j = std::find(cluster.begin(), cluster.end(), j) != cluster.end();
            if (has_i && has_j) {
                return L;
            }
        }
    }
    throw std::logic_error("cells never share a cluster");
}

/// Observation vector of cell i by direct summation over distance classes.
inline std::vector<int> observation_by_definition(const AggregationTree& tree, int i, const NetworkState& b)
{
    std::vector<int> obs(static_cast<std::size_t>(tree.depth()) + 1, 0);
    for (int j = 0; j < tree.n_cells(); ++j) {
        obs[distance_by_scan(tree, i, j)] += b[j];
    }
    return obs;
}

/// Bayes posterior P(b | sigma_i = obs) over all states, index = bit pattern,
/// with i.i.d. Bernoulli(pi) prior.
inline std::vector<double> posterior_by_enumeration(const AggregationTree& tree, int i, const std::vector<int>& obs,
                                                    double pi)
{
    const int n = tree.n_cells();
    const std::uint64_t states = std::uint64_t{1} << n;
    std::vector<double> post(states, 0.0);
    double z = 0.0;
    for (std::uint64_t s = 0; s < states; ++s) {
        const auto b = state_from_bits(s, n);
        if (observation_by_definition(tree, i, b) != obs) {
            continue;
        }
        const int k = std::popcount(s);
        post[s] = std::pow(pi, k) * std::pow(1.0 - pi, n - k);
        z += post[s];
    }
    if (z == 0.0) {
        throw std::invalid_argument("observation is unreachable");
    }
    for (auto& v : post) {
        v /= z;
    }
    return post;
}

/// Exact forward filter over the 2^N-state joint chain: posterior of the
/// state at the last slot given cell i's observations at every slot.
inline std::vector<double> forward_filter(const AggregationTree& tree, int i,
                                          const std::vector<std::vector<int>>& history, const MarkovParams& markov)
{
    const int n = tree.n_cells();
    const std::uint64_t states = std::uint64_t{1} << n;
    const double pi = steady_state_probability(markov);

    std::vector<std::vector<int>> obs_of(states);
    for (std::uint64_t s = 0; s < states; ++s) {
        obs_of[s] = observation_by_definition(tree, i, state_from_bits(s, n));
    }
    auto per_cell = [&](int from, int to) {
        if (from == 0) {
            return to ? markov.p : 1.0 - markov.p;
        }
        return to ? 1.0 - markov.q : markov.q;
    };
    auto normalize = [](std::vector<double>& v) {
        const double z = std::accumulate(v.begin(), v.end(), 0.0);
        if (z == 0.0) {
            throw std::invalid_argument("observation history has zero probability");
        }
        for (auto& x : v) {
            x /= z;
        }
    };

    std::vector<double> alpha(states, 0.0);
    for (std::uint64_t s = 0; s < states; ++s) {
        if (obs_of[s] == history.front()) {
            const int k = std::popcount(s);
            alpha[s] = std::pow(pi, k) * std::pow(1.0 - pi, n - k);
        }
    }
    normalize(alpha);
    for (std::size_t t = 1; t < history.size(); ++t) {
        std::vector<double> next(states, 0.0);
        for (std::uint64_t to = 0; to < states; ++to) {
            if (obs_of[to] != history[t]) {
                continue;
            }
            double acc = 0.0;
            for (std::uint64_t from = 0; from < states; ++from) {
                if (alpha[from] == 0.0) {
                    continue;
                }
                double p = 1.0;
                for (int j = 0; j < n; ++j) {
                    p *= per_cell(static_cast<int>((from >> j) & 1U), static_cast<int>((to >> j) & 1U));
                }
                acc += alpha[from] * p;
            }
            next[to] = acc;
        }
        normalize(next);
        alpha = std::move(next);
    }
    return alpha;
}

} // namespace msense::oracle
