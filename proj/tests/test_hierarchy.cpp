#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "msense/hierarchy.hpp"
#include "msense/oracle.hpp"

using namespace msense;

namespace {

// Algorithm 1 taken literally: repeatedly scan every remaining pair for the
// largest similarity (summed cell by cell), first-found wins ties.
std::vector<std::vector<CellSet>> naive_greedy(const InterferenceMatrix& phi)
{
    std::vector<CellSet> clusters;
    for (int i = 0; i < phi.size(); ++i) {
        clusters.push_back({i});
    }
    std::vector<std::vector<CellSet>> partitions;
    while (clusters.size() > 1) {
        std::vector<int> unpaired(clusters.size());
        for (std::size_t k = 0; k < clusters.size(); ++k) {
            unpaired[k] = static_cast<int>(k);
        }
        std::vector<CellSet> next;
        while (!unpaired.empty()) {
            if (unpaired.size() == 1) {
                next.push_back(clusters[unpaired[0]]);
                break;
            }
            double best = -1.0;
            int ba = -1, bb = -1;
            for (std::size_t x = 0; x < unpaired.size(); ++x) {
                for (std::size_t y = x + 1; y < unpaired.size(); ++y) {
                    double s = 0.0;
                    for (int i : clusters[unpaired[x]]) {
                        for (int j : clusters[unpaired[y]]) {
                            s += phi(i, j);
                        }
                    }
                    if (s > best + 1e-12) {
                        best = s;
                        ba = unpaired[x];
                        bb = unpaired[y];
                    }
                }
            }
            CellSet merged = clusters[ba];
            merged.insert(merged.end(), clusters[bb].begin(), clusters[bb].end());
            std::sort(merged.begin(), merged.end());
            next.push_back(merged);
            std::erase(unpaired, ba);
            std::erase(unpaired, bb);
        }
        partitions.push_back(next);
        clusters = next;
    }
    return partitions;
}

std::vector<CellSet> sorted(std::vector<CellSet> v)
{
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

TEST(RegularTree, SmallGrids)
{
    const auto single = build_regular_tree(GridTopology(1, 1));
    EXPECT_EQ(single.depth(), 0);
    EXPECT_EQ(single.check_invariants(), "");

    const auto pair = build_regular_tree(GridTopology(1, 2));
    EXPECT_EQ(pair.depth(), 1);
    EXPECT_EQ(pair.cluster(1, 0), (CellSet{0, 1}));
}

TEST(RegularTree, FourByFourInOrder)
{
    const auto tree = build_regular_tree(GridTopology(4, 4));
    ASSERT_EQ(tree.depth(), 4);
    EXPECT_EQ(tree.check_invariants(), "");
    // Pairs, then rows, then row pairs.
    EXPECT_EQ(tree.cluster(1, 0), (CellSet{0, 1}));
    EXPECT_EQ(tree.cluster(1, 7), (CellSet{14, 15}));
    EXPECT_EQ(tree.cluster(2, 0), (CellSet{0, 1, 2, 3}));
    EXPECT_EQ(tree.cluster(3, 1), (CellSet{8, 9, 10, 11, 12, 13, 14, 15}));
}

TEST(RegularTree, InOrderPromotesOddClusterOut)
{
    const auto tree = build_regular_tree(GridTopology(1, 5));
    EXPECT_EQ(tree.check_invariants(), "");
    ASSERT_EQ(tree.depth(), 3);
    EXPECT_EQ(tree.cluster_count(1), 3);
    EXPECT_EQ(tree.cluster(1, 2), (CellSet{4}));
    EXPECT_EQ(tree.cluster(2, 1), (CellSet{4}));
}

TEST(RegularTree, FourByFourAlternatesAxes)
{
    const GridTopology g(4, 4);
    const auto tree = build_regular_tree(g, RegularPairing::alternating_axes);
    ASSERT_EQ(tree.depth(), 4);
    const int expected_counts[] = {16, 8, 4, 2, 1};
    for (int L = 0; L <= 4; ++L) {
        EXPECT_EQ(tree.cluster_count(L), expected_counts[L]);
    }
    EXPECT_EQ(tree.check_invariants(), "");
    // Level 1: horizontal pairs; level 2: 2x2 blocks; level 3: 2x4 halves.
    EXPECT_EQ(tree.cluster(1, 0), (CellSet{0, 1}));
    EXPECT_EQ(tree.cluster(1, 1), (CellSet{2, 3}));
    EXPECT_EQ(tree.cluster(2, 0), (CellSet{0, 1, 4, 5}));
    EXPECT_EQ(tree.cluster(3, 0), (CellSet{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(RegularTree, RaggedGridsStayValid)
{
    for (int r = 1; r <= 6; ++r) {
        for (int c = 1; c <= 6; ++c) {
            const auto in_order = build_regular_tree(GridTopology(r, c));
            EXPECT_EQ(in_order.check_invariants(), "") << r << "x" << c;
            EXPECT_EQ(in_order.depth(), static_cast<int>(std::ceil(std::log2(r * c))));
            const auto tree = build_regular_tree(GridTopology(r, c), RegularPairing::alternating_axes);
            EXPECT_EQ(tree.check_invariants(), "") << r << "x" << c;
            EXPECT_EQ(tree.n_cells(), r * c);
            // Each merge at least halves one axis of the block grid.
            EXPECT_EQ(tree.depth(), static_cast<int>(std::ceil(std::log2(r)) + std::ceil(std::log2(c))));
        }
    }
}

TEST(Similarity, SumsCrossInterference)
{
    const GridTopology line(1, 4);
    const auto phi = build_interference_matrix(line, {}, 2.0);
    EXPECT_DOUBLE_EQ(similarity({0}, {1}, phi), 1.0);
    EXPECT_DOUBLE_EQ(similarity({0, 1}, {2, 3}, phi), 1.0 / 4 + 1.0 / 9 + 1.0 + 1.0 / 4);
    InterferenceMatrix diag(4);
    EXPECT_EQ(similarity({0, 1}, {2, 3}, diag), 0.0);
    EXPECT_THROW(similarity({0, 1}, {1, 2}, phi), std::invalid_argument);
}

TEST(GreedyTree, SingleCell)
{
    EXPECT_EQ(build_greedy_tree(InterferenceMatrix(1)).depth(), 0);
}

TEST(GreedyTree, RecoversTwoCliques)
{
    InterferenceMatrix phi(4);
    phi.set_symmetric(0, 1, 0.7);
    phi.set_symmetric(2, 3, 0.2);
    const auto tree = build_greedy_tree(phi);
    EXPECT_EQ(sorted(tree.level(1).clusters), (std::vector<CellSet>{{0, 1}, {2, 3}}));
    // Same with the cliques interleaved in index order.
    InterferenceMatrix phi2(4);
    phi2.set_symmetric(0, 2, 0.5);
    phi2.set_symmetric(1, 3, 0.5);
    EXPECT_EQ(sorted(build_greedy_tree(phi2).level(1).clusters), (std::vector<CellSet>{{0, 2}, {1, 3}}));
}

TEST(GreedyTree, UnblockedGridPairsNearestNeighbours)
{
    const GridTopology g(4, 4);
    const auto phi = build_interference_matrix(g, {}, 2.0);
    const auto tree = build_greedy_tree(phi);
    ASSERT_EQ(tree.cluster_count(1), 8);
    // Exhaustive check: no off-diagonal entry exceeds 1, and every level-1 pair attains it.
    double max_offdiag = 0.0;
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 16; ++j) {
            if (i != j) {
                max_offdiag = std::max(max_offdiag, phi(i, j));
            }
        }
    }
    EXPECT_EQ(max_offdiag, 1.0);
    for (const auto& c : tree.level(1).clusters) {
        ASSERT_EQ(c.size(), 2u);
        EXPECT_EQ(phi(c[0], c[1]), max_offdiag);
        EXPECT_DOUBLE_EQ(g.distance(c[0], c[1]), 1.0);
    }
}

TEST(GreedyTree, MatchesLiteralAlgorithmOnGenericMatrices)
{
    // Continuous random entries avoid ties, so the greedy matching is unique.
    RandomStream rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(11));
        InterferenceMatrix phi(n);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                phi.set_symmetric(i, j, rng.uniform());
            }
        }
        const auto tree = build_greedy_tree(phi);
        const auto expected = naive_greedy(phi);
        ASSERT_EQ(tree.depth(), static_cast<int>(expected.size()));
        for (int L = 1; L <= tree.depth(); ++L) {
            ASSERT_EQ(sorted(tree.level(L).clusters), sorted(expected[L - 1])) << "n=" << n << " L=" << L;
        }
    }
}

TEST(GreedyTree, HalvingAndDeterminism)
{
    RandomStream rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const GridTopology g(1 + static_cast<int>(rng.below(6)), 1 + static_cast<int>(rng.below(6)));
        const auto phi = build_interference_matrix(g, sample_blockage(g, rng.uniform(), rng), 2.0);
        const auto tree = build_greedy_tree(phi);
        ASSERT_EQ(tree.check_invariants(), "");
        for (int L = 0; L < tree.depth(); ++L) {
            ASSERT_EQ(tree.cluster_count(L + 1), (tree.cluster_count(L) + 1) / 2);
        }
        if (g.size() >= 2) {
            ASSERT_EQ(tree.depth(), static_cast<int>(std::ceil(std::log2(g.size()))));
        }
        const auto again = build_greedy_tree(phi);
        ASSERT_EQ(again.partitions(), tree.partitions());
    }
}

TEST(GreedyTree, FullyBlockedStillPairsLexicographically)
{
    const InterferenceMatrix diag(5);
    const auto low = build_greedy_tree(diag);
    EXPECT_EQ(low.level(1).clusters, (std::vector<CellSet>{{0, 1}, {2, 3}, {4}}));
    const auto high = build_greedy_tree(diag, TieBreak::highest_ids);
    EXPECT_EQ(high.level(1).clusters, (std::vector<CellSet>{{3, 4}, {1, 2}, {0}}));
}

TEST(GreedyTree, ScalingSmoke)
{
    // Informational timing over growing grids; asserts only completion and validity.
    for (int side : {4, 8, 16, 32}) {
        const GridTopology g(side, side);
        const auto phi = build_interference_matrix(g, {}, 2.0);
        const auto start = std::chrono::steady_clock::now();
        const auto tree = build_greedy_tree(phi);
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        std::cout << "[ timing ] greedy tree N=" << g.size() << ": " << ms << " ms\n";
        EXPECT_EQ(tree.check_invariants(), "");
    }
}

TEST(FromPartitions, RejectsMalformedHierarchies)
{
    EXPECT_THROW(AggregationTree::from_partitions(4, {{{0, 1}, {2, 3}}}), std::invalid_argument); // no root
    EXPECT_THROW(AggregationTree::from_partitions(4, {{{0, 1}, {1, 2, 3}}, {{0, 1, 2, 3}}}), std::invalid_argument);
    EXPECT_THROW(AggregationTree::from_partitions(4, {{{0, 1}, {2}}, {{0, 1, 2}}}), std::invalid_argument);
    EXPECT_THROW(AggregationTree::from_partitions(4, {{{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}, {{0, 1, 2, 3}}}),
                 std::invalid_argument); // not nested
}

TEST(HierarchicalDistance, BasicProperties)
{
    const auto tree = build_regular_tree(GridTopology(4, 4), RegularPairing::alternating_axes);
    EXPECT_EQ(hierarchical_distance(tree, 5, 5), 0);
    EXPECT_EQ(hierarchical_distance(tree, 0, 1), 1);
    EXPECT_EQ(hierarchical_distance(tree, 0, 4), 2);
    EXPECT_EQ(hierarchical_distance(tree, 0, 2), 3);
    EXPECT_EQ(hierarchical_distance(tree, 0, 15), 4);
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 16; ++j) {
            ASSERT_EQ(hierarchical_distance(tree, i, j), hierarchical_distance(tree, j, i));
            ASSERT_EQ(hierarchical_distance(tree, i, j), oracle::distance_by_scan(tree, i, j));
        }
    }
}

TEST(DistanceIndex, ClassesPartitionCellsAndSumInterference)
{
    const GridTopology g(4, 4);
    RandomStream rng(6);
    const auto phi = build_interference_matrix(g, sample_blockage(g, 0.3, rng), 2.0);
    for (const auto& tree : {build_regular_tree(g), build_greedy_tree(phi)}) {
        const auto index = build_distance_index(tree, phi);
        for (int i = 0; i < 16; ++i) {
            const auto& dc = index[i];
            EXPECT_EQ(dc.members[0], CellSet{i});
            std::set<int> all;
            int total = 0;
            double phi_total = 0.0;
            for (int L = 0; L <= tree.depth(); ++L) {
                total += dc.size(L);
                all.insert(dc.members[L].begin(), dc.members[L].end());
                phi_total += dc.interference[L];
                for (int j : dc.members[L]) {
                    ASSERT_EQ(hierarchical_distance(tree, i, j), L);
                }
            }
            EXPECT_EQ(total, 16);
            EXPECT_EQ(all.size(), 16u);
            EXPECT_NEAR(phi_total, phi.row_sum(i), 1e-12);
        }
    }
}

TEST(DistanceIndex, TwoCells)
{
    InterferenceMatrix phi(2);
    phi.set_symmetric(0, 1, 0.3);
    const auto index = build_distance_index(build_regular_tree(GridTopology(1, 2)), phi);
    EXPECT_EQ(index[0].members[1], CellSet{1});
    EXPECT_DOUBLE_EQ(index[0].interference[1], 0.3);
    EXPECT_THROW(build_distance_index(build_regular_tree(GridTopology(1, 3)), phi), std::invalid_argument);
}

TEST(TreeText, RoundTrip)
{
    const GridTopology g(3, 5);
    RandomStream rng(10);
    const auto tree = build_greedy_tree(build_interference_matrix(g, sample_blockage(g, 0.5, rng), 2.0));
    std::stringstream ss;
    write_tree(ss, tree);
    const auto back = read_tree(ss, g.size());
    ASSERT_EQ(back.depth(), tree.depth());
    for (int L = 1; L <= tree.depth(); ++L) {
        EXPECT_EQ(sorted(back.level(L).clusters), sorted(tree.level(L).clusters));
    }
    std::ostringstream pair;
    write_tree(pair, build_greedy_tree(build_interference_matrix(GridTopology(1, 2), {}, 2.0)));
    EXPECT_EQ(pair.str(), "level 1: {{0,1}}\n");
}
