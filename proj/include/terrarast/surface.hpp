#pragma once

// Dense elevation surfaces used by the ground filters: minimum-elevation gridding,
// nearest-neighbour inpainting and grey-scale morphology with square windows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/pointcloud.hpp"

namespace terrarast {

template <typename T>
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    [[nodiscard]] const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    [[nodiscard]] T& operator[](std::size_t i) { return data_[i]; }
    [[nodiscard]] const T& operator[](std::size_t i) const { return data_[i]; }
    [[nodiscard]] std::vector<T>& data() noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& data() const noexcept { return data_; }

    friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Regular grid over the xy bounds of a cloud; cell (r, c) covers
/// [min_x + c*cell, min_x + (c+1)*cell) x [min_y + r*cell, min_y + (r+1)*cell).
struct FilterGrid {
    double min_x = 0.0;
    double min_y = 0.0;
    double cell = 1.0;
    std::size_t rows = 1;
    std::size_t cols = 1;

    static FilterGrid covering(const BoundingBox& b, double cell) {
        if (!(cell > 0.0)) throw Error(ErrorCode::InvalidArgument, "filter cell size must be > 0");
        FilterGrid g{b.min_x, b.min_y, cell, 1, 1};
        g.cols = static_cast<std::size_t>(std::floor(b.width() / cell)) + 1;
        g.rows = static_cast<std::size_t>(std::floor(b.length() / cell)) + 1;
        return g;
    }

    [[nodiscard]] std::size_t col_of(double x) const {
        const auto c = static_cast<long long>(std::floor((x - min_x) / cell));
        return static_cast<std::size_t>(std::clamp<long long>(c, 0, static_cast<long long>(cols) - 1));
    }
    [[nodiscard]] std::size_t row_of(double y) const {
        const auto r = static_cast<long long>(std::floor((y - min_y) / cell));
        return static_cast<std::size_t>(std::clamp<long long>(r, 0, static_cast<long long>(rows) - 1));
    }
    [[nodiscard]] std::size_t index_of(double x, double y) const { return row_of(y) * cols + col_of(x); }
};

/// For every cell, the flat index of the nearest occupied cell by Euclidean distance between
/// cell indices (exact, two-pass lower-envelope distance transform). Occupied cells map to
/// themselves. Throws when no cell is occupied.
[[nodiscard]] inline std::vector<std::size_t> nearest_occupied(const Grid2D<std::uint8_t>& occupied) {
    const std::size_t rows = occupied.rows(), cols = occupied.cols();
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    // Pass 1: nearest occupied row within each column.
    std::vector<std::size_t> near_row(rows * cols, kNone);
    for (std::size_t c = 0; c < cols; ++c) {
        std::size_t last = kNone;
        for (std::size_t r = 0; r < rows; ++r) {
            if (occupied(r, c)) last = r;
            near_row[r * cols + c] = last;
        }
        last = kNone;
        for (std::size_t r = rows; r-- > 0;) {
            if (occupied(r, c)) last = r;
            const std::size_t up = near_row[r * cols + c];
            if (last != kNone && (up == kNone || last - r < r - up)) near_row[r * cols + c] = last;
        }
    }
    // Pass 2: per row, lower envelope of parabolas (c - q)^2 + dy(q)^2.
    std::vector<std::size_t> result(rows * cols, kNone);
    std::vector<std::size_t> v(cols);
    std::vector<double> z(cols + 1);
    std::vector<double> f(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t k = 0;
        bool any = false;
        for (std::size_t q = 0; q < cols; ++q) {
            const std::size_t nr = near_row[r * cols + q];
            if (nr == kNone) continue;
            const double dy = static_cast<double>(nr > r ? nr - r : r - nr);
            f[q] = dy * dy;
            const double fq = f[q] + static_cast<double>(q) * static_cast<double>(q);
            if (!any) {
                v[0] = q;
                z[0] = -std::numeric_limits<double>::infinity();
                z[1] = std::numeric_limits<double>::infinity();
                k = 0;
                any = true;
                continue;
            }
            double s = 0.0;
            while (true) {
                const std::size_t p = v[k];
                const double fp = f[p] + static_cast<double>(p) * static_cast<double>(p);
                s = (fq - fp) / (2.0 * (static_cast<double>(q) - static_cast<double>(p)));
                if (s <= z[k] && k > 0) {
                    --k;
                } else {
                    break;
                }
            }
            ++k;
            v[k] = q;
            z[k] = s;
            z[k + 1] = std::numeric_limits<double>::infinity();
        }
        if (!any) continue;
        std::size_t j = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            while (z[j + 1] < static_cast<double>(c)) ++j;
            const std::size_t q = v[j];
            result[r * cols + c] = near_row[r * cols + q] * cols + q;
        }
    }
    if (!result.empty() && result[0] == kNone) throw Error(ErrorCode::EmptyCloud, "no occupied cells to inpaint from");
    return result;
}

/// Fills empty cells with the value of the nearest occupied cell.
[[nodiscard]] inline Grid2D<double> inpaint_nearest(const Grid2D<std::optional<double>>& sparse) {
    Grid2D<std::uint8_t> occ(sparse.rows(), sparse.cols(), 0);
    for (std::size_t i = 0; i < sparse.size(); ++i) occ[i] = sparse[i].has_value() ? 1 : 0;
    const auto nearest = nearest_occupied(occ);
    Grid2D<double> out(sparse.rows(), sparse.cols(), 0.0);
    for (std::size_t i = 0; i < sparse.size(); ++i) out[i] = *sparse[nearest[i]];
    return out;
}

namespace morph_detail {

/// 1D running min/max over a (2r+1) window clipped to [0, n), in O(n) (van Herk / Gil-Werman).
/// The line is padded with the operation's identity so every window is full-width.
template <typename Op>
void running_extreme(std::vector<double>& line, std::size_t r, Op op, double identity, std::vector<double>& pre,
                     std::vector<double>& suf) {
    const std::size_t n = line.size();
    if (r == 0 || n == 0) return;
    const std::size_t w = 2 * r + 1;
    const std::size_t m = n + 2 * r;
    const auto at = [&](std::size_t i) { return (i < r || i >= r + n) ? identity : line[i - r]; };
    pre.resize(m);
    suf.resize(m);
    for (std::size_t i = 0; i < m; ++i) pre[i] = (i % w == 0) ? at(i) : op(pre[i - 1], at(i));
    for (std::size_t i = m; i-- > 0;) suf[i] = (i % w == w - 1 || i == m - 1) ? at(i) : op(suf[i + 1], at(i));
    // Window for output i is [i, i + 2r] in padded coordinates; it spans at most two blocks.
    for (std::size_t i = 0; i < n; ++i) line[i] = op(suf[i], pre[i + 2 * r]);
}

template <typename Op>
Grid2D<double> separable(const Grid2D<double>& in, std::size_t r, Op op, double identity) {
    Grid2D<double> out = in;
    std::vector<double> line, pre, suf;
    line.resize(in.cols());
    for (std::size_t row = 0; row < in.rows(); ++row) {
        for (std::size_t c = 0; c < in.cols(); ++c) line[c] = out(row, c);
        running_extreme(line, r, op, identity, pre, suf);
        for (std::size_t c = 0; c < in.cols(); ++c) out(row, c) = line[c];
    }
    line.resize(in.rows());
    for (std::size_t c = 0; c < in.cols(); ++c) {
        for (std::size_t row = 0; row < in.rows(); ++row) line[row] = out(row, c);
        running_extreme(line, r, op, identity, pre, suf);
        for (std::size_t row = 0; row < in.rows(); ++row) out(row, c) = line[row];
    }
    return out;
}

}  // namespace morph_detail

/// Grey-scale erosion with a (2r+1)^2 square window clipped at the grid border.
[[nodiscard]] inline Grid2D<double> erode(const Grid2D<double>& in, std::size_t r) {
    return morph_detail::separable(in, r, [](double a, double b) { return std::min(a, b); },
                                   std::numeric_limits<double>::infinity());
}

/// Grey-scale dilation with a (2r+1)^2 square window clipped at the grid border.
[[nodiscard]] inline Grid2D<double> dilate(const Grid2D<double>& in, std::size_t r) {
    return morph_detail::separable(in, r, [](double a, double b) { return std::max(a, b); },
                                   -std::numeric_limits<double>::infinity());
}

/// Opening (erosion then dilation) computed on the surface extended by r cells of
/// edge replication, then cropped back. Planar surfaces are reproduced exactly up to the
/// grid border, so sloped terrain at tile edges is not mistaken for objects.
[[nodiscard]] inline Grid2D<double> open_surface(const Grid2D<double>& in, std::size_t r) {
    if (r == 0) return in;
    const std::size_t rows = in.rows() + 2 * r, cols = in.cols() + 2 * r;
    Grid2D<double> padded(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t si = std::clamp<std::size_t>(i, r, r + in.rows() - 1) - r;
        for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t sj = std::clamp<std::size_t>(j, r, r + in.cols() - 1) - r;
            padded(i, j) = in(si, sj);
        }
    }
    const auto opened = dilate(erode(padded, r), r);
    Grid2D<double> out(in.rows(), in.cols());
    for (std::size_t i = 0; i < in.rows(); ++i) {
        for (std::size_t j = 0; j < in.cols(); ++j) out(i, j) = opened(i + r, j + r);
    }
    return out;
}

/// Bilinear interpolation of a surface sampled at cell centres, clamped at the border.
[[nodiscard]] inline double sample_bilinear(const Grid2D<double>& s, const FilterGrid& g, double x, double y) {
    const double fx = (x - g.min_x) / g.cell - 0.5;
    const double fy = (y - g.min_y) / g.cell - 0.5;
    const double cx = std::clamp(fx, 0.0, static_cast<double>(g.cols - 1));
    const double cy = std::clamp(fy, 0.0, static_cast<double>(g.rows - 1));
    const auto c0 = static_cast<std::size_t>(std::floor(cx));
    const auto r0 = static_cast<std::size_t>(std::floor(cy));
    const std::size_t c1 = std::min(c0 + 1, g.cols - 1);
    const std::size_t r1 = std::min(r0 + 1, g.rows - 1);
    const double tx = cx - static_cast<double>(c0);
    const double ty = cy - static_cast<double>(r0);
    const double top = s(r0, c0) * (1 - tx) + s(r0, c1) * tx;
    const double bot = s(r1, c0) * (1 - tx) + s(r1, c1) * tx;
    return top * (1 - ty) + bot * ty;
}

}  // namespace terrarast
