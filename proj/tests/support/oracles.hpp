#pragma once

// Brute-force reference implementations used by the unit and acceptance suites. They are
// written for clarity, scan everything, and share no code paths with the library beyond the
// plain data types.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "terrarast/terrarast.hpp"

namespace oracle {

using terrarast::BandKind;
using terrarast::GridSpec;
using terrarast::PointCloud;
using terrarast::PointRecord;

inline constexpr double kNoValue = std::numeric_limits<double>::quiet_NaN();

/// Row-major cell of (x, y) or -1 outside. Recomputed from the GridSpec definition.
inline long long cell_of(const GridSpec& s, double x, double y) {
    const double c = std::floor((x - s.origin_x) / s.cell_size);
    const double r = std::floor((s.origin_y - y) / s.cell_size);
    if (c < 0 || r < 0 || c >= static_cast<double>(s.width) || r >= static_cast<double>(s.height)) return -1;
    return static_cast<long long>(r) * static_cast<long long>(s.width) + static_cast<long long>(c);
}

/// Points of every cell, grouped by a single pass over the cloud.
inline std::vector<std::vector<PointRecord>> columns(const PointCloud& cloud, const GridSpec& s) {
    std::vector<std::vector<PointRecord>> out(s.width * s.height);
    for (const auto& p : cloud.points()) {
        if (const auto c = cell_of(s, p.x, p.y); c >= 0) out[static_cast<std::size_t>(c)].push_back(p);
    }
    return out;
}

/// Value of one band for one column. NaN means nodata.
inline double column_value(const std::vector<PointRecord>& col, double min_z, double voxel, BandKind kind) {
    if (kind == BandKind::density) return static_cast<double>(col.size());
    if (col.empty()) return kNoValue;
    const auto vox = [&](double z) { return static_cast<long long>(std::floor((z - min_z) / voxel)); };
    std::map<long long, std::vector<double>> voxels;
    for (const auto& p : col) voxels[vox(p.z)].push_back(p.z);
    const auto mean = [](const std::vector<double>& v) {
        long double t = 0;
        for (const double x : v) t += x;
        return static_cast<double>(t / static_cast<long double>(v.size()));
    };
    switch (kind) {
        case BandKind::pixel_mean: {
            std::vector<double> z;
            for (const auto& p : col) z.push_back(p.z);
            return mean(z);
        }
        case BandKind::voxel_top: return mean(voxels.rbegin()->second);
        case BandKind::voxel_bottom: return mean(voxels.begin()->second);
        case BandKind::stdev: {
            std::vector<double> means;
            for (const auto& [k, v] : voxels) means.push_back(mean(v));
            const double mu = mean(means);
            long double ss = 0;
            for (const double m : means) ss += (m - mu) * (m - mu);
            return std::sqrt(static_cast<double>(ss / static_cast<long double>(means.size())));
        }
        case BandKind::echoes: {
            std::map<unsigned, std::size_t> h;
            for (const auto& p : col) ++h[p.echo_number];
            unsigned best = h.begin()->first;
            for (const auto& [e, n] : h) {
                if (n > h[best]) best = e;
            }
            return best;
        }
        default: return kNoValue;
    }
}

inline double min_z_of(const PointCloud& cloud) {
    double min_z = std::numeric_limits<double>::infinity();
    for (const auto& p : cloud.points()) min_z = std::min(min_z, p.z);
    return min_z;
}

/// Ground flag of the semantic mode of one column (NaN when empty).
inline double sem1_value(const PointCloud& cloud, const GridSpec& s, const std::set<std::uint8_t>& codes, std::size_t cell) {
    std::map<unsigned, std::size_t> h;
    for (const auto& p : cloud.points()) {
        if (cell_of(s, p.x, p.y) == static_cast<long long>(cell)) ++h[p.class_label];
    }
    if (h.empty()) return kNoValue;
    unsigned best = h.begin()->first;
    for (const auto& [c, n] : h) {
        if (n > h[best]) best = c;
    }
    return codes.count(static_cast<std::uint8_t>(best)) ? 1.0 : 0.0;
}

/// Whole-band oracle, one value per cell.
inline std::vector<double> band(const PointCloud& cloud, const GridSpec& s, BandKind kind) {
    const auto cols = columns(cloud, s);
    const double min_z = min_z_of(cloud);
    std::vector<double> out(cols.size());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = column_value(cols[c], min_z, s.voxel_size_z, kind);
    return out;
}

/// Population skewness recomputed from scratch, sigma = 0 -> 0.
inline long double skewness(const std::vector<double>& z) {
    const auto n = static_cast<long double>(z.size());
    long double mu = 0;
    for (const double v : z) mu += v;
    mu /= n;
    long double m2 = 0, m3 = 0;
    for (const double v : z) {
        m2 += (v - mu) * (v - mu);
        m3 += (v - mu) * (v - mu) * (v - mu);
    }
    m2 /= n;
    m3 /= n;
    if (m2 <= 0) return 0;
    return m3 / (m2 * std::sqrt(m2));
}

/// Iterative skewness balancing: drop the current highest point (ties: canonically greatest)
/// and recompute, until the skewness of what remains is not positive.
inline std::vector<bool> sbm(const PointCloud& cloud) {
    std::vector<bool> ground(cloud.size(), true);
    std::vector<std::size_t> alive(cloud.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
    const terrarast::CanonicalPointLess less;
    while (alive.size() > 1) {
        std::vector<double> z;
        for (const auto i : alive) z.push_back(cloud[i].z);
        if (!(skewness(z) > 0)) break;
        std::size_t top = 0;
        for (std::size_t k = 1; k < alive.size(); ++k) {
            const auto& a = cloud[alive[k]];
            const auto& b = cloud[alive[top]];
            if (a.z > b.z || (a.z == b.z && less(b, a))) top = k;
        }
        ground[alive[top]] = false;
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(top));
    }
    return ground;
}

struct DelaunayCheck {
    std::size_t non_ccw = 0;
    std::size_t circumcircle_violations = 0;
    std::size_t expected_triangles = 0;  ///< 2n - h - 2 with h boundary points of the hull
    long double area_sum = 0;
    long double hull_area = 0;
};

/// Empty-circumcircle test of every triangle against every vertex (1e-9 m slack), plus a
/// convex-hull area and triangle-count cross-check.
inline DelaunayCheck check_delaunay(const terrarast::Triangulation& t) {
    using LD = long double;
    DelaunayCheck out;
    const auto& V = t.vertices;
    for (const auto& tri : t.triangles) {
        const auto &a = V[tri[0]], &b = V[tri[1]], &c = V[tri[2]];
        const LD cross = (LD(b.x) - a.x) * (LD(c.y) - a.y) - (LD(b.y) - a.y) * (LD(c.x) - a.x);
        if (!(cross > 0)) ++out.non_ccw;
        out.area_sum += cross / 2;
        const LD bx = LD(b.x) - a.x, by = LD(b.y) - a.y, cx = LD(c.x) - a.x, cy = LD(c.y) - a.y;
        const LD d = 2 * (bx * cy - by * cx);
        const LD ux = (cy * (bx * bx + by * by) - by * (cx * cx + cy * cy)) / d;
        const LD uy = (bx * (cx * cx + cy * cy) - cx * (bx * bx + by * by)) / d;
        const LD r = std::sqrt(ux * ux + uy * uy);
        for (std::size_t v = 0; v < V.size(); ++v) {
            if (v == tri[0] || v == tri[1] || v == tri[2]) continue;
            const LD dx = LD(V[v].x) - a.x - ux, dy = LD(V[v].y) - a.y - uy;
            if (std::sqrt(dx * dx + dy * dy) < r - 1e-9L) ++out.circumcircle_violations;
        }
    }
    // Monotone chain keeping collinear boundary points, to count h.
    std::vector<std::size_t> idx(V.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return V[i].x < V[j].x || (V[i].x == V[j].x && V[i].y < V[j].y); });
    const auto turn = [&](std::size_t o, std::size_t a, std::size_t b) {
        return (LD(V[a].x) - V[o].x) * (LD(V[b].y) - V[o].y) - (LD(V[a].y) - V[o].y) * (LD(V[b].x) - V[o].x);
    };
    std::vector<std::size_t> hull;
    for (int pass = 0; pass < 2; ++pass) {
        const std::size_t base = hull.size();
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const std::size_t p = pass == 0 ? idx[k] : idx[idx.size() - 1 - k];
            while (hull.size() >= base + 2 && turn(hull[hull.size() - 2], hull.back(), p) < 0) hull.pop_back();
            hull.push_back(p);
        }
        hull.pop_back();
    }
    std::sort(hull.begin(), hull.end());
    hull.erase(std::unique(hull.begin(), hull.end()), hull.end());
    // Hull area from the strict hull.
    std::vector<std::size_t> strict;
    for (int pass = 0; pass < 2; ++pass) {
        const std::size_t base = strict.size();
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const std::size_t p = pass == 0 ? idx[k] : idx[idx.size() - 1 - k];
            while (strict.size() >= base + 2 && turn(strict[strict.size() - 2], strict.back(), p) <= 0) strict.pop_back();
            strict.push_back(p);
        }
        strict.pop_back();
    }
    for (std::size_t k = 0; k < strict.size(); ++k) {
        const auto& p = V[strict[k]];
        const auto& q = V[strict[(k + 1) % strict.size()]];
        out.hull_area += (LD(p.x) * q.y - LD(q.x) * p.y) / 2;
    }
    out.expected_triangles = 2 * V.size() - hull.size() - 2;
    return out;
}

/// Random cloud with z in [-30, 30], sometimes clustered so columns hold several voxels.
inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double extent) {
    std::uniform_real_distribution<double> xy(0.0, extent), zu(-30.0, 30.0), u01(0.0, 1.0);
    std::uniform_int_distribution<int> ret(1, 5), cls(0, 9);
    std::vector<PointRecord> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PointRecord p;
        p.x = xy(rng);
        p.y = xy(rng);
        p.z = u01(rng) < 0.5 ? zu(rng) : std::floor(zu(rng) / 2.0) * 2.0 + 0.1 * u01(rng);
        p.num_returns = static_cast<std::uint8_t>(ret(rng));
        p.echo_number = static_cast<std::uint8_t>(1 + rng() % p.num_returns);
        p.class_label = static_cast<std::uint8_t>(cls(rng));
        p.intensity = static_cast<std::uint16_t>(rng() & 0xFFFF);
        pts.push_back(p);
    }
    return PointCloud(std::move(pts));
}

/// Minimal LAS 1.2 writer built straight from the format tables (point format 0 or 1),
/// independent of the library encoder.
inline std::vector<std::uint8_t> reference_las(const std::vector<std::array<std::int32_t, 3>>& raw, const std::vector<PointRecord>& attrs,
                                               int format, double scale, double offset, std::uint32_t declared_count = 0xFFFFFFFF) {
    const std::uint16_t rec = format == 0 ? 20 : 28;
    std::vector<std::uint8_t> b(227 + raw.size() * rec, 0);
    const auto put = [&](std::size_t at, const void* src, std::size_t n) { std::memcpy(b.data() + at, src, n); };
    const auto put16 = [&](std::size_t at, std::uint16_t v) { put(at, &v, 2); };
    const auto put32 = [&](std::size_t at, std::uint32_t v) { put(at, &v, 4); };
    const auto putd = [&](std::size_t at, double v) { put(at, &v, 8); };
    put(0, "LASF", 4);
    b[24] = 1;
    b[25] = 2;
    put16(94, 227);
    put32(96, 227);
    put32(100, 0);
    b[104] = static_cast<std::uint8_t>(format);
    put16(105, rec);
    put32(107, declared_count == 0xFFFFFFFF ? static_cast<std::uint32_t>(raw.size()) : declared_count);
    for (int k = 0; k < 3; ++k) putd(131 + 8 * k, scale);
    for (int k = 0; k < 3; ++k) putd(155 + 8 * k, offset);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const std::size_t at = 227 + i * rec;
        for (int k = 0; k < 3; ++k) put(at + 4 * k, &raw[i][k], 4);
        put16(at + 12, attrs[i].intensity);
        b[at + 14] = static_cast<std::uint8_t>((attrs[i].echo_number & 7) | ((attrs[i].num_returns & 7) << 3));
        b[at + 15] = attrs[i].class_label;
    }
    return b;
}

}  // namespace oracle
