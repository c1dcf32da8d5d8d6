#pragma once

// Rasterizes a triangulated surface at cell centres. A centre inside (or on the boundary of) a
// triangle takes its barycentric interpolation; the lowest-numbered containing triangle wins on
// shared edges. Centres outside the convex hull take the z of the nearest vertex, ties going to
// the lower vertex index.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "terrarast/delaunay.hpp"
#include "terrarast/grid.hpp"
#include "terrarast/predicates.hpp"

namespace terrarast {

namespace tin_detail {

/// Uniform bucket grid over vertex xy for nearest-vertex queries.
class VertexBuckets {
public:
    explicit VertexBuckets(const std::vector<Vertex>& v) : verts_(v) {
        min_x_ = max_x_ = v.front().x;
        min_y_ = max_y_ = v.front().y;
        for (const auto& p : v) {
            min_x_ = std::min(min_x_, p.x);
            max_x_ = std::max(max_x_, p.x);
            min_y_ = std::min(min_y_, p.y);
            max_y_ = std::max(max_y_, p.y);
        }
        const double area = std::max((max_x_ - min_x_) * (max_y_ - min_y_), 1e-12);
        size_ = std::max(std::sqrt(2.0 * area / static_cast<double>(v.size())), 1e-9);
        if ((max_x_ - min_x_) / size_ > 4096.0 || (max_y_ - min_y_) / size_ > 4096.0) {
            size_ = std::max(max_x_ - min_x_, max_y_ - min_y_) / 4096.0;
        }
        nx_ = static_cast<std::size_t>((max_x_ - min_x_) / size_) + 1;
        ny_ = static_cast<std::size_t>((max_y_ - min_y_) / size_) + 1;
        std::vector<std::size_t> counts(nx_ * ny_ + 1, 0);
        for (const auto& p : v) ++counts[bucket(p.x, p.y) + 1];
        for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
        start_ = counts;
        items_.resize(v.size());
        for (std::uint32_t i = 0; i < v.size(); ++i) items_[counts[bucket(v[i].x, v[i].y)]++] = i;
    }

    [[nodiscard]] std::uint32_t nearest(double x, double y) const {
        const auto cx = clamped(std::floor((x - min_x_) / size_), nx_);
        const auto cy = clamped(std::floor((y - min_y_) / size_), ny_);
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_i = std::numeric_limits<std::uint32_t>::max();
        const std::size_t max_ring = std::max(nx_, ny_);
        for (std::size_t k = 0; k <= max_ring; ++k) {
            // Every bucket at Chebyshev ring k + 1 or beyond lies farther than k * size_ from
            // any point of the query's own bucket row/column band.
            if (best_i != std::numeric_limits<std::uint32_t>::max()) {
                const double reach = static_cast<double>(k > 0 ? k - 1 : 0) * size_ + gap(x, y, cx, cy);
                if (reach * reach > best) break;
            }
            visit_ring(cx, cy, k, [&](std::size_t b) {
                for (std::size_t s = start_[b]; s < start_[b + 1]; ++s) {
                    const std::uint32_t i = items_[s];
                    const double dx = verts_[i].x - x, dy = verts_[i].y - y;
                    const double d2 = dx * dx + dy * dy;
                    if (d2 < best || (d2 == best && i < best_i)) {
                        best = d2;
                        best_i = i;
                    }
                }
            });
        }
        return best_i;
    }

private:
    static std::size_t clamped(double f, std::size_t n) {
        if (!(f > 0.0)) return 0;
        return std::min(static_cast<std::size_t>(f), n - 1);
    }

    std::size_t bucket(double x, double y) const {
        return clamped(std::floor((y - min_y_) / size_), ny_) * nx_ + clamped(std::floor((x - min_x_) / size_), nx_);
    }

    /// Distance from the query to the boundary of its (clamped) bucket, or 0 when inside it.
    [[nodiscard]] double gap(double x, double y, std::size_t cx, std::size_t cy) const {
        const double x0 = min_x_ + static_cast<double>(cx) * size_, y0 = min_y_ + static_cast<double>(cy) * size_;
        if (x < x0 || x > x0 + size_ || y < y0 || y > y0 + size_) return 0.0;
        return std::min({x - x0, x0 + size_ - x, y - y0, y0 + size_ - y});
    }

    template <typename F>
    void visit_ring(std::size_t cx, std::size_t cy, std::size_t k, F&& f) const {
        const long long x0 = static_cast<long long>(cx) - static_cast<long long>(k);
        const long long x1 = static_cast<long long>(cx) + static_cast<long long>(k);
        const long long y0 = static_cast<long long>(cy) - static_cast<long long>(k);
        const long long y1 = static_cast<long long>(cy) + static_cast<long long>(k);
        const auto in = [&](long long bx, long long by) {
            return bx >= 0 && by >= 0 && bx < static_cast<long long>(nx_) && by < static_cast<long long>(ny_);
        };
        for (long long by = y0; by <= y1; ++by) {
            const bool edge_row = by == y0 || by == y1;
            for (long long bx = x0; bx <= x1; bx += (edge_row || k == 0) ? 1 : (x1 - x0)) {
                if (in(bx, by)) f(static_cast<std::size_t>(by) * nx_ + static_cast<std::size_t>(bx));
                if (k == 0) break;
            }
        }
    }

    const std::vector<Vertex>& verts_;
    double min_x_ = 0, max_x_ = 0, min_y_ = 0, max_y_ = 0, size_ = 1;
    std::size_t nx_ = 1, ny_ = 1;
    std::vector<std::size_t> start_;
    std::vector<std::uint32_t> items_;
};

}  // namespace tin_detail

/// Interpolated value at every cell centre, row-major, in double precision.
[[nodiscard]] inline std::vector<double> tin_cell_values(const Triangulation& tri, const GridSpec& spec) {
    spec.validate();
    if (tri.vertices.empty()) throw Error(ErrorCode::DegenerateInput, "empty triangulation");
    constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
    const std::size_t w = spec.width, h = spec.height;
    std::vector<double> out(w * h, 0.0);
    std::vector<std::uint32_t> owner(w * h, kNone);
    const auto& V = tri.vertices;
    const double cs = spec.cell_size;

    const auto col_range = [&](double lo, double hi) {
        const double a = std::ceil((lo - spec.origin_x) / cs - 0.5) - 1.0;
        const double b = std::floor((hi - spec.origin_x) / cs - 0.5) + 1.0;
        return std::pair{std::max(a, 0.0), std::min(b, static_cast<double>(w) - 1.0)};
    };
    const auto row_range = [&](double lo, double hi) {
        const double a = std::ceil((spec.origin_y - hi) / cs - 0.5) - 1.0;
        const double b = std::floor((spec.origin_y - lo) / cs - 0.5) + 1.0;
        return std::pair{std::max(a, 0.0), std::min(b, static_cast<double>(h) - 1.0)};
    };

    for (std::uint32_t t = 0; t < tri.triangles.size(); ++t) {
        const auto& T = tri.triangles[t];
        const Vertex &A = V[T[0]], &B = V[T[1]], &C = V[T[2]];
        const auto [c0, c1] = col_range(std::min({A.x, B.x, C.x}), std::max({A.x, B.x, C.x}));
        const auto [r0, r1] = row_range(std::min({A.y, B.y, C.y}), std::max({A.y, B.y, C.y}));
        if (c0 > c1 || r0 > r1) continue;
        const double det = (B.y - C.y) * (A.x - C.x) + (C.x - B.x) * (A.y - C.y);
        const double zmin = std::min({A.z, B.z, C.z}), zmax = std::max({A.z, B.z, C.z});
        const geom::Point2 a{A.x, A.y}, b{B.x, B.y}, c{C.x, C.y};
        for (auto r = static_cast<std::size_t>(r0); r <= static_cast<std::size_t>(r1); ++r) {
            const double py = spec.center_y(r);
            for (auto col = static_cast<std::size_t>(c0); col <= static_cast<std::size_t>(c1); ++col) {
                const std::size_t cell = r * w + col;
                if (owner[cell] != kNone) continue;
                const geom::Point2 p{spec.center_x(col), py};
                if (geom::orient2d(a, b, p) < 0 || geom::orient2d(b, c, p) < 0 || geom::orient2d(c, a, p) < 0) continue;
                const double l1 = ((B.y - C.y) * (p.x - C.x) + (C.x - B.x) * (p.y - C.y)) / det;
                const double l2 = ((C.y - A.y) * (p.x - C.x) + (A.x - C.x) * (p.y - C.y)) / det;
                const double l3 = 1.0 - l1 - l2;
                out[cell] = std::clamp(l1 * A.z + l2 * B.z + l3 * C.z, zmin, zmax);
                owner[cell] = t;
            }
        }
    }

    bool any_outside = false;
    for (const auto o : owner) any_outside = any_outside || o == kNone;
    if (any_outside) {
        const tin_detail::VertexBuckets buckets(V);
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t col = 0; col < w; ++col) {
                const std::size_t cell = r * w + col;
                if (owner[cell] == kNone) out[cell] = V[buckets.nearest(spec.center_x(col), spec.center_y(r))].z;
            }
        }
    }
    return out;
}

/// DTM band over `spec` from a triangulation; every cell receives a value.
[[nodiscard]] inline RasterGrid tin_to_dtm(const Triangulation& tri, const GridSpec& spec) {
    const auto values = tin_cell_values(tri, spec);
    std::vector<float> f(values.size());
    std::transform(values.begin(), values.end(), f.begin(), [](double v) { return static_cast<float>(v); });
    return RasterGrid(spec, BandKind::dtm, std::move(f));
}

}  // namespace terrarast
