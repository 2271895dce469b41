#pragma once

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "msense/interference.hpp"

namespace msense {

using CellSet = std::vector<int>; // sorted cell indices

/// Leveled cluster hierarchy over cells 0..n-1.
///
/// Level 0 holds the singletons {i} (cluster id i). Every higher level
/// partitions the cells into clusters that are unions of level-below
/// clusters; the top level D has a single cluster containing every cell.
class AggregationTree {
public:
    struct Level {
        std::vector<CellSet> clusters;
        std::vector<std::vector<int>> children; // ids of level-below clusters; empty at level 0
        std::vector<int> parent;                // cell -> cluster id at this level
    };

    AggregationTree() = default;

    /// Builds a tree from the cell partitions of levels 1..D. Each entry of
    /// `partitions` lists that level's clusters as cell sets; cluster ids are
    /// positions in the list. Throws std::invalid_argument if the levels do not
    /// form a nested hierarchy ending in a single root.
    static AggregationTree from_partitions(int n_cells, std::vector<std::vector<CellSet>> partitions)
    {
        if (n_cells < 1) {
            throw std::invalid_argument("tree needs at least one cell");
        }
        AggregationTree tree;
        Level leaves;
        for (int i = 0; i < n_cells; ++i) {
            leaves.clusters.push_back({i});
            leaves.parent.push_back(i);
        }
        leaves.children.resize(static_cast<std::size_t>(n_cells));
        tree.levels_.push_back(std::move(leaves));

        for (auto& part : partitions) {
            Level level;
            level.parent.assign(static_cast<std::size_t>(n_cells), -1);
            for (std::size_t k = 0; k < part.size(); ++k) {
                auto cells = std::move(part[k]);
                std::sort(cells.begin(), cells.end());
                if (cells.empty()) {
                    throw std::invalid_argument("empty cluster");
                }
                for (int c : cells) {
                    if (c < 0 || c >= n_cells) {
                        throw std::invalid_argument("cluster references unknown cell " + std::to_string(c));
                    }
                    if (level.parent[c] != -1) {
                        throw std::invalid_argument("clusters of a level overlap at cell " + std::to_string(c));
                    }
                    level.parent[c] = static_cast<int>(k);
                }
                level.clusters.push_back(std::move(cells));
            }
            if (std::find(level.parent.begin(), level.parent.end(), -1) != level.parent.end()) {
                throw std::invalid_argument("clusters of a level do not cover every cell");
            }
            // Nesting: every level-below cluster must land inside one cluster.
            const Level& below = tree.levels_.back();
            level.children.resize(level.clusters.size());
            for (std::size_t m = 0; m < below.clusters.size(); ++m) {
                const auto& sub = below.clusters[m];
                const int k = level.parent[sub.front()];
                for (int c : sub) {
                    if (level.parent[c] != k) {
                        throw std::invalid_argument("level clusters are not unions of clusters one level down");
                    }
                }
                level.children[k].push_back(static_cast<int>(m));
            }
            tree.levels_.push_back(std::move(level));
        }
        if (tree.levels_.back().clusters.size() != 1) {
            throw std::invalid_argument("top level must be a single cluster");
        }
        return tree;
    }

    int n_cells() const { return static_cast<int>(levels_.front().clusters.size()); }
    int depth() const { return static_cast<int>(levels_.size()) - 1; }

    const Level& level(int L) const { return levels_.at(static_cast<std::size_t>(L)); }
    int cluster_count(int L) const { return static_cast<int>(level(L).clusters.size()); }
    const CellSet& cluster(int L, int k) const { return level(L).clusters.at(static_cast<std::size_t>(k)); }

    /// P_L(i): id of the level-L cluster containing cell i.
    int parent(int L, int cell) const { return level(L).parent.at(static_cast<std::size_t>(cell)); }

    /// Level-(L-1) cluster ids merged into level-L cluster k.
    const std::vector<int>& children(int L, int k) const { return level(L).children.at(static_cast<std::size_t>(k)); }

    /// Clusters of every level above 0, as cell sets.
    std::vector<std::vector<CellSet>> partitions() const
    {
        std::vector<std::vector<CellSet>> out;
        for (std::size_t L = 1; L < levels_.size(); ++L) {
            out.push_back(levels_[L].clusters);
        }
        return out;
    }

    /// Re-checks the structural invariants; returns an empty string when they
    /// hold, otherwise a description of the first violation.
    std::string check_invariants() const
    {
        const int n = n_cells();
        for (int i = 0; i < n; ++i) {
            if (levels_[0].clusters[i] != CellSet{i} || levels_[0].parent[i] != i) {
                return "level 0 is not the singleton partition";
            }
        }
        for (std::size_t L = 0; L < levels_.size(); ++L) {
            const auto& lv = levels_[L];
            std::vector<int> seen(static_cast<std::size_t>(n), 0);
            for (std::size_t k = 0; k < lv.clusters.size(); ++k) {
                for (int c : lv.clusters[k]) {
                    if (c < 0 || c >= n || seen[c]++ || lv.parent[c] != static_cast<int>(k)) {
                        return "level " + std::to_string(L) + " is not a partition consistent with its parent map";
                    }
                }
            }
            if (std::count(seen.begin(), seen.end(), 1) != n) {
                return "level " + std::to_string(L) + " does not cover every cell";
            }
            if (L == 0) {
                continue;
            }
            const auto& below = levels_[L - 1];
            for (std::size_t k = 0; k < lv.clusters.size(); ++k) {
                CellSet merged;
                for (int m : lv.children[k]) {
                    merged.insert(merged.end(), below.clusters[m].begin(), below.clusters[m].end());
                }
                std::sort(merged.begin(), merged.end());
                if (merged != lv.clusters[k]) {
                    return "level " + std::to_string(L) + " cluster is not the union of its children";
                }
            }
        }
        if (levels_.back().clusters.size() != 1 || static_cast<int>(levels_.back().clusters[0].size()) != n) {
            return "root does not contain every cell";
        }
        return {};
    }

private:
    std::vector<Level> levels_;
};

/// Lambda(i, j): lowest level at which i and j share a cluster.
inline int hierarchical_distance(const AggregationTree& tree, int i, int j)
{
    if (i < 0 || j < 0 || i >= tree.n_cells() || j >= tree.n_cells()) {
        throw std::out_of_range("cell index outside the tree");
    }
    for (int L = 0; L <= tree.depth(); ++L) {
        if (tree.parent(L, i) == tree.parent(L, j)) {
            return L;
        }
    }
    return tree.depth(); // unreachable for a valid tree
}

/// Pairing order of the interference-agnostic baseline.
/// in_order: consecutive clusters in row-major cell order are paired, so a
///   4x4 grid goes pairs -> rows -> row pairs -> root.
/// alternating_axes: neighbouring blocks are merged horizontally, then
///   vertically, and so on, so a 4x4 grid goes pairs -> 2x2 blocks -> ...
enum class RegularPairing {
    in_order,
    alternating_axes,
};

namespace detail {

inline AggregationTree build_in_order_tree(int n)
{
    std::vector<CellSet> clusters;
    for (int i = 0; i < n; ++i) {
        clusters.push_back({i});
    }
    std::vector<std::vector<CellSet>> partitions;
    while (clusters.size() > 1) {
        std::vector<CellSet> merged;
        for (std::size_t k = 0; k < clusters.size(); k += 2) {
            CellSet c = clusters[k];
            if (k + 1 < clusters.size()) {
                c.insert(c.end(), clusters[k + 1].begin(), clusters[k + 1].end());
            }
            merged.push_back(std::move(c));
        }
        partitions.push_back(merged);
        clusters = std::move(merged);
    }
    return AggregationTree::from_partitions(n, std::move(partitions));
}

inline AggregationTree build_alternating_tree(const GridTopology& grid)
{
    // Block grid of current-level cluster cell sets. When it is a single row
    // or column only the other axis is merged.
    // Block grid of current-level cluster cell sets.
    int rows = grid.rows;
    int cols = grid.cols;
    std::vector<CellSet> blocks;
    for (int i = 0; i < grid.size(); ++i) {
        blocks.push_back({i});
    }
    std::vector<std::vector<CellSet>> partitions;
    bool horizontal_next = true;
    while (rows * cols > 1) {
        const bool horizontal = horizontal_next ? cols > 1 : rows == 1;
        const int new_rows = horizontal ? rows : (rows + 1) / 2;
        const int new_cols = horizontal ? (cols + 1) / 2 : cols;
        std::vector<CellSet> merged(static_cast<std::size_t>(new_rows) * new_cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const int nr = horizontal ? r : r / 2;
                const int nc = horizontal ? c / 2 : c;
                auto& dst = merged[static_cast<std::size_t>(nr) * new_cols + nc];
                const auto& src = blocks[static_cast<std::size_t>(r) * cols + c];
                dst.insert(dst.end(), src.begin(), src.end());
            }
        }
        for (auto& m : merged) {
            std::sort(m.begin(), m.end());
        }
        partitions.push_back(merged);
        blocks = std::move(merged);
        rows = new_rows;
        cols = new_cols;
        horizontal_next = !horizontal;
    }
    return AggregationTree::from_partitions(grid.size(), std::move(partitions));
}

} // namespace detail

/// Interference-agnostic baseline tree; an odd cluster out at the end of a
/// level is promoted unpaired.
inline AggregationTree build_regular_tree(const GridTopology& grid,
                                          RegularPairing pairing = RegularPairing::in_order)
{
    return pairing == RegularPairing::in_order ? detail::build_in_order_tree(grid.size())
                                               : detail::build_alternating_tree(grid);
}

/// gamma(k1, k2): total interference between two disjoint clusters.
inline double similarity(const CellSet& k1, const CellSet& k2, const InterferenceMatrix& phi)
{
    double s = 0.0;
    for (int i : k1) {
        for (int j : k2) {
            if (i == j) {
                throw std::invalid_argument("similarity is defined for disjoint clusters only");
            }
            s += phi(i, j);
        }
    }
    return s;
}

/// Order in which equally similar candidate pairs are taken.
enum class TieBreak {
    lowest_ids,  ///< lexicographically smallest (first id, second id) first
    highest_ids, ///< lexicographically largest first; for sensitivity runs
};

/// Agglomerative interference-aware hierarchy. At each level the unpaired
/// cluster pair with the largest similarity is merged, repeatedly, until at
/// most one cluster is left; that one is promoted alone. New cluster ids
/// follow merge order, with the promoted cluster last.
inline AggregationTree build_greedy_tree(const InterferenceMatrix& phi, TieBreak tie_break = TieBreak::lowest_ids)
{
    const int n = phi.size();
    if (n < 1) {
        throw std::invalid_argument("interference matrix is empty");
    }
    std::vector<CellSet> clusters;
    for (int i = 0; i < n; ++i) {
        clusters.push_back({i});
    }
    // Cluster-level similarity, aggregated upward level by level.
    std::vector<double> gamma(phi.data());
    std::vector<std::vector<CellSet>> partitions;

    struct Candidate {
        double similarity;
        int a;
        int b;
    };

    while (clusters.size() > 1) {
        const int k_count = static_cast<int>(clusters.size());
        std::vector<Candidate> candidates;
        candidates.reserve(static_cast<std::size_t>(k_count) * (k_count - 1) / 2);
        for (int a = 0; a < k_count; ++a) {
            for (int b = a + 1; b < k_count; ++b) {
                candidates.push_back({gamma[static_cast<std::size_t>(a) * k_count + b], a, b});
            }
        }
        std::sort(candidates.begin(), candidates.end(), [tie_break](const Candidate& x, const Candidate& y) {
            if (x.similarity != y.similarity) {
                return x.similarity > y.similarity;
            }
            if (tie_break == TieBreak::lowest_ids) {
                return std::pair{x.a, x.b} < std::pair{y.a, y.b};
            }
            return std::pair{x.a, x.b} > std::pair{y.a, y.b};
        });

        std::vector<char> paired(static_cast<std::size_t>(k_count), 0);
        std::vector<std::vector<int>> groups;
        for (const auto& c : candidates) {
            if (!paired[c.a] && !paired[c.b]) {
                paired[c.a] = paired[c.b] = 1;
                groups.push_back({c.a, c.b});
            }
        }
        for (int k = 0; k < k_count; ++k) {
            if (!paired[k]) {
                groups.push_back({k});
            }
        }

        const int next_count = static_cast<int>(groups.size());
        std::vector<CellSet> next(groups.size());
        std::vector<double> next_gamma(static_cast<std::size_t>(next_count) * next_count, 0.0);
        for (int g = 0; g < next_count; ++g) {
            for (int k : groups[g]) {
                next[g].insert(next[g].end(), clusters[k].begin(), clusters[k].end());
            }
            std::sort(next[g].begin(), next[g].end());
            for (int h = 0; h < next_count; ++h) {
                if (g == h) {
                    continue;
                }
                double s = 0.0;
                for (int x : groups[g]) {
                    for (int y : groups[h]) {
                        s += gamma[static_cast<std::size_t>(x) * k_count + y];
                    }
                }
                next_gamma[static_cast<std::size_t>(g) * next_count + h] = s;
            }
        }
        partitions.push_back(next);
        clusters = std::move(next);
        gamma = std::move(next_gamma);
    }
    return AggregationTree::from_partitions(n, std::move(partitions));
}

/// Cells at each hierarchical distance from one cell, with the interference
/// that cell generates into each class.
struct DistanceClasses {
    std::vector<CellSet> members;      // index L = 0..D
    std::vector<double> interference;  // Phi_i(L)

    int depth() const { return static_cast<int>(members.size()) - 1; }
    int size(int L) const { return static_cast<int>(members[static_cast<std::size_t>(L)].size()); }
};

/// Per-cell distance classes for a tree and interference matrix.
class DistanceClassIndex {
public:
    DistanceClassIndex() = default;
    explicit DistanceClassIndex(std::vector<DistanceClasses> cells) : cells_(std::move(cells)) {}

    int n_cells() const { return static_cast<int>(cells_.size()); }
    const DistanceClasses& operator[](int i) const { return cells_.at(static_cast<std::size_t>(i)); }

    auto begin() const { return cells_.begin(); }
    auto end() const { return cells_.end(); }

private:
    std::vector<DistanceClasses> cells_;
};

inline DistanceClassIndex build_distance_index(const AggregationTree& tree, const InterferenceMatrix& phi)
{
    if (tree.n_cells() != phi.size()) {
        throw std::invalid_argument("tree and interference matrix cover different cell counts");
    }
    const int n = tree.n_cells();
    const int depth = tree.depth();
    std::vector<DistanceClasses> cells(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& dc = cells[i];
        dc.members.push_back({i});
        for (int L = 1; L <= depth; ++L) {
            const auto& outer = tree.cluster(L, tree.parent(L, i));
            const auto& inner = tree.cluster(L - 1, tree.parent(L - 1, i));
            CellSet ring;
            std::set_difference(outer.begin(), outer.end(), inner.begin(), inner.end(), std::back_inserter(ring));
            dc.members.push_back(std::move(ring));
        }
        for (const auto& cls : dc.members) {
            double s = 0.0;
            for (int j : cls) {
                s += phi(i, j);
            }
            dc.interference.push_back(s);
        }
    }
    return DistanceClassIndex(std::move(cells));
}

// Tree text format: "level L: {{a,b},{c}}" for L = 1..D, clusters listed in
// increasing order of their smallest cell. A depth-0 tree writes nothing.

inline std::string format_cell_set(const CellSet& cells)
{
    std::string s = "{";
    for (std::size_t k = 0; k < cells.size(); ++k) {
        s += (k ? "," : "") + std::to_string(cells[k]);
    }
    return s + "}";
}

inline void write_tree(std::ostream& out, const AggregationTree& tree)
{
    for (int L = 1; L <= tree.depth(); ++L) {
        auto clusters = tree.level(L).clusters;
        std::sort(clusters.begin(), clusters.end());
        out << "level " << L << ": {";
        for (std::size_t k = 0; k < clusters.size(); ++k) {
            out << (k ? "," : "") << format_cell_set(clusters[k]);
        }
        out << "}\n";
    }
}

inline AggregationTree read_tree(std::istream& in, int n_cells)
{
    std::vector<std::vector<CellSet>> partitions;
    std::string line;
    while (std::getline(in, line)) {
        const auto colon = line.find(':');
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        if (colon == std::string::npos) {
            throw std::invalid_argument("tree line missing ':' separator: " + line);
        }
        std::vector<CellSet> clusters;
        CellSet current;
        int depth = 0;
        std::string number;
        for (char ch : line.substr(colon + 1)) {
            if (ch == '{') {
                ++depth;
                if (depth == 2) {
                    current.clear();
                }
            } else if (ch == '}' || ch == ',') {
                if (!number.empty()) {
                    current.push_back(std::stoi(number));
                    number.clear();
                }
                if (ch == '}') {
                    if (depth == 2) {
                        clusters.push_back(current);
                    }
                    --depth;
                }
            } else if (ch >= '0' && ch <= '9') {
                number.push_back(ch);
            } else if (ch != ' ' && ch != '\t' && ch != '\r') {
                throw std::invalid_argument("unexpected character in tree line: " + line);
            }
        }
        if (depth != 0) {
            throw std::invalid_argument("unbalanced braces in tree line: " + line);
        }
        partitions.push_back(std::move(clusters));
    }
    return AggregationTree::from_partitions(n_cells, std::move(partitions));
}

} // namespace msense
