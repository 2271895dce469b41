#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "msense/random.hpp"

namespace msense {

/// Rectangular grid of cells with unit spacing. Cell i sits at column
/// i mod cols, row i div cols.
struct GridTopology {
    int rows = 4;
    int cols = 4;

    GridTopology() = default;
    GridTopology(int r, int c) : rows(r), cols(c)
    {
        if (r < 1 || c < 1) {
            throw std::invalid_argument("grid needs at least one row and one column");
        }
    }

    int size() const { return rows * cols; }
    int index(int r, int c) const { return r * cols + c; }
    int row(int i) const { return i / cols; }
    int col(int i) const { return i % cols; }

    double distance(int i, int j) const
    {
        return std::hypot(static_cast<double>(col(i) - col(j)), static_cast<double>(row(i) - row(j)));
    }
};

/// A wall on the shared boundary edge of two adjacent cells, stored with
/// first < second.
struct Wall {
    int first = 0;
    int second = 0;

    friend auto operator<=>(const Wall&, const Wall&) = default;
};

inline Wall make_wall(const GridTopology& grid, int a, int b)
{
    if (a > b) {
        std::swap(a, b);
    }
    if (a < 0 || b >= grid.size()) {
        throw std::out_of_range("wall references a cell outside the grid");
    }
    const bool horizontal_pair = grid.row(a) == grid.row(b) && grid.col(b) - grid.col(a) == 1;
    const bool vertical_pair = grid.col(a) == grid.col(b) && grid.row(b) - grid.row(a) == 1;
    if (!horizontal_pair && !vertical_pair) {
        throw std::invalid_argument("walls may only separate adjacent cells");
    }
    return {a, b};
}

/// Every interior edge of the grid, in canonical order.
inline std::vector<Wall> interior_edges(const GridTopology& grid)
{
    std::vector<Wall> edges;
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const int i = grid.index(r, c);
            if (c + 1 < grid.cols) {
                edges.push_back({i, grid.index(r, c + 1)});
            }
            if (r + 1 < grid.rows) {
                edges.push_back({i, grid.index(r + 1, c)});
            }
        }
    }
    return edges;
}

/// Sorted, duplicate-free set of walls.
class BlockageLayout {
public:
    BlockageLayout() = default;
    explicit BlockageLayout(std::vector<Wall> walls) : walls_(std::move(walls))
    {
        std::sort(walls_.begin(), walls_.end());
        walls_.erase(std::unique(walls_.begin(), walls_.end()), walls_.end());
    }

    const std::vector<Wall>& walls() const { return walls_; }
    bool empty() const { return walls_.empty(); }
    std::size_t size() const { return walls_.size(); }

    bool contains(const Wall& w) const { return std::binary_search(walls_.begin(), walls_.end(), w); }

    void add(const Wall& w)
    {
        auto it = std::lower_bound(walls_.begin(), walls_.end(), w);
        if (it == walls_.end() || *it != w) {
            walls_.insert(it, w);
        }
    }

    friend bool operator==(const BlockageLayout&, const BlockageLayout&) = default;

private:
    std::vector<Wall> walls_;
};

/// Each interior edge independently walled with probability p_block.
inline BlockageLayout sample_blockage(const GridTopology& grid, double p_block, RandomStream& rng)
{
    if (!(p_block >= 0.0 && p_block <= 1.0)) {
        throw std::invalid_argument("p_block must lie in [0, 1]");
    }
    std::vector<Wall> walls;
    for (const auto& e : interior_edges(grid)) {
        if (rng.bernoulli(p_block)) {
            walls.push_back(e);
        }
    }
    return BlockageLayout(std::move(walls));
}

/// How a wall affects cell pairs.
enum class BlockageRule {
    line_of_sight, ///< every pair whose center-to-center segment crosses the wall
    adjacent_only, ///< only the two cells sharing the walled edge
};

namespace detail {

// Coordinates doubled so that centers are even and cell corners odd;
// all geometry below is exact integer arithmetic.
struct Point2 {
    long long x = 0;
    long long y = 0;
};

inline long long orient(Point2 a, Point2 b, Point2 c)
{
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline int sign(long long v) { return (v > 0) - (v < 0); }

// Open segment (a, b) against closed segment [c, d]. Cell centers have even
// doubled coordinates and walls lie on odd lines, so a and b are never on the
// wall's supporting line; a touch at a wall endpoint still counts as a hit.
inline bool sight_line_hits_wall(Point2 a, Point2 b, Point2 c, Point2 d)
{
    const int ab_c = sign(orient(a, b, c));
    const int ab_d = sign(orient(a, b, d));
    const int cd_a = sign(orient(c, d, a));
    const int cd_b = sign(orient(c, d, b));
    return cd_a * cd_b < 0 && ab_c * ab_d <= 0;
}

inline Point2 center(const GridTopology& g, int i) { return {2LL * g.col(i), 2LL * g.row(i)}; }

inline std::pair<Point2, Point2> wall_segment(const GridTopology& g, const Wall& w)
{
    const Point2 a = center(g, w.first);
    const Point2 b = center(g, w.second);
    const Point2 mid{(a.x + b.x) / 2, (a.y + b.y) / 2};
    if (a.y == b.y) {
        return {{mid.x, mid.y - 1}, {mid.x, mid.y + 1}};
    }
    return {{mid.x - 1, mid.y}, {mid.x + 1, mid.y}};
}

} // namespace detail

/// True iff the open sight-line between the centers of i and j meets a wall.
inline bool is_blocked(int i, int j, const GridTopology& grid, const BlockageLayout& layout,
                       BlockageRule rule = BlockageRule::line_of_sight)
{
    if (i == j) {
        throw std::invalid_argument("blockage is undefined for a cell and itself");
    }
    if (i < 0 || j < 0 || i >= grid.size() || j >= grid.size()) {
        throw std::out_of_range("cell index outside the grid");
    }
    if (rule == BlockageRule::adjacent_only) {
        const Wall w{std::min(i, j), std::max(i, j)};
        return layout.contains(w);
    }
    const auto a = detail::center(grid, i);
    const auto b = detail::center(grid, j);
    const long long xlo = std::min(a.x, b.x), xhi = std::max(a.x, b.x);
    const long long ylo = std::min(a.y, b.y), yhi = std::max(a.y, b.y);
    for (const auto& w : layout.walls()) {
        const auto [c, d] = detail::wall_segment(grid, w);
        if (std::max(c.x, d.x) < xlo || std::min(c.x, d.x) > xhi || std::max(c.y, d.y) < ylo ||
            std::min(c.y, d.y) > yhi) {
            continue;
        }
        if (detail::sight_line_hits_wall(a, b, c, d)) {
            return true;
        }
    }
    return false;
}

/// Dense symmetric interference matrix, row-major.
class InterferenceMatrix {
public:
    InterferenceMatrix() = default;
    explicit InterferenceMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n) * n, 0.0)
    {
        for (int i = 0; i < n; ++i) {
            (*this)(i, i) = 1.0;
        }
    }

    int size() const { return n_; }

    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * n_ + j]; }

    /// Sets phi_{i,j} and phi_{j,i} together.
    void set_symmetric(int i, int j, double v)
    {
        (*this)(i, j) = v;
        (*this)(j, i) = v;
    }

    double row_sum(int i) const
    {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) {
            s += (*this)(i, j);
        }
        return s;
    }

    bool is_symmetric() const
    {
        for (int i = 0; i < n_; ++i) {
            for (int j = i + 1; j < n_; ++j) {
                if ((*this)(i, j) != (*this)(j, i)) {
                    return false;
                }
            }
        }
        return true;
    }

    bool is_nonnegative() const
    {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0; });
    }

    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const InterferenceMatrix&, const InterferenceMatrix&) = default;

private:
    int n_ = 0;
    std::vector<double> data_;
};

/// phi_{i,i} = 1; phi_{i,j} = dist^-alpha when unblocked, 0 when blocked.
inline InterferenceMatrix build_interference_matrix(const GridTopology& grid, const BlockageLayout& layout,
                                                    double alpha,
                                                    BlockageRule rule = BlockageRule::line_of_sight)
{
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("path-loss exponent must be positive");
    }
    const int n = grid.size();
    InterferenceMatrix phi(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (!layout.empty() && is_blocked(i, j, grid, layout, rule)) {
                continue;
            }
            phi.set_symmetric(i, j, std::pow(grid.distance(i, j), -alpha));
        }
    }
    return phi;
}

// Layout text format: one wall per line as ((r1,c1),(r2,c2)); '#' starts a comment.

inline void write_layout(std::ostream& out, const GridTopology& grid, const BlockageLayout& layout)
{
    for (const auto& w : layout.walls()) {
        out << "((" << grid.row(w.first) << ',' << grid.col(w.first) << "),(" << grid.row(w.second) << ','
            << grid.col(w.second) << "))\n";
    }
}

inline BlockageLayout read_layout(std::istream& in, const GridTopology& grid)
{
    std::vector<Wall> walls;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::string compact;
        for (char ch : line) {
            if (ch != ' ' && ch != '\t' && ch != '\r') {
                compact.push_back(ch);
            }
        }
        if (compact.empty()) {
            continue;
        }
        int r1 = 0, c1 = 0, r2 = 0, c2 = 0;
        char tail = 0;
        if (std::sscanf(compact.c_str(), "((%d,%d),(%d,%d))%c", &r1, &c1, &r2, &c2, &tail) != 4) {
            throw std::invalid_argument("layout line " + std::to_string(line_no) + ": expected ((r1,c1),(r2,c2))");
        }
        for (auto [r, c] : {std::pair{r1, c1}, std::pair{r2, c2}}) {
            if (r < 0 || r >= grid.rows || c < 0 || c >= grid.cols) {
                throw std::out_of_range("layout line " + std::to_string(line_no) + ": cell outside the grid");
            }
        }
        walls.push_back(make_wall(grid, grid.index(r1, c1), grid.index(r2, c2)));
    }
    return BlockageLayout(std::move(walls));
}

} // namespace msense
