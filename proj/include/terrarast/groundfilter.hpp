#pragma once

// Rule-based ground filters producing a per-point ground/non-ground mask:
// progressive morphological filter (PMF), simple morphological filter (SMRF) and
// skewness balancing (SBM). The cloth simulation filter lives in csf.hpp.
//
// All filters work on z relative to the cloud's min_z, so a constant z offset does not
// change the mask.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/pointcloud.hpp"
#include "terrarast/surface.hpp"

namespace terrarast {

/// flags[i] is true when point i of the source cloud is ground.
struct GroundMask {
    std::vector<bool> flags;

    [[nodiscard]] std::size_t size() const noexcept { return flags.size(); }
    [[nodiscard]] std::size_t count() const noexcept { return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true)); }
    friend bool operator==(const GroundMask&, const GroundMask&) = default;
};

/// Window radii grow as cell * 2^k; the only growth law offered.
enum class WindowGrowth { exponential };

struct PmfParams {
    double cell = 1.0;
    double max_window = 33.0;
    WindowGrowth window_growth = WindowGrowth::exponential;
    double initial_distance = 0.15;
    double max_distance = 2.5;
    double slope = 45.0;  // degrees

    void validate() const {
        if (!(cell > 0.0)) throw Error(ErrorCode::InvalidArgument, "pmf.cell must be > 0");
        if (!(max_window >= cell)) throw Error(ErrorCode::InvalidArgument, "pmf.max_window must be >= cell");
        if (!(initial_distance > 0.0 && initial_distance <= max_distance)) {
            throw Error(ErrorCode::InvalidArgument, "pmf requires 0 < initial_distance <= max_distance");
        }
        if (!(slope >= 0.0 && slope < 90.0)) throw Error(ErrorCode::InvalidArgument, "pmf.slope must be in [0, 90) degrees");
    }
};

struct SmrfParams {
    double cell = 1.0;
    double max_window = 18.0;
    double elevation_scalar = 1.25;
    double elevation_threshold = 0.5;
    double slope_tolerance = 0.15;

    void validate() const {
        if (!(cell > 0.0 && max_window > 0.0 && elevation_scalar > 0.0 && elevation_threshold > 0.0 && slope_tolerance > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "all smrf parameters must be > 0");
        }
    }
};

namespace filter_detail {

inline std::vector<double> relative_z(const PointCloud& cloud) {
    const double base = cloud.bounds()->min_z;
    std::vector<double> z(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) z[i] = cloud[i].z - base;
    return z;
}

inline Grid2D<std::optional<double>> minimum_surface(const PointCloud& cloud, const std::vector<double>& z, const FilterGrid& g) {
    Grid2D<std::optional<double>> s(g.rows, g.cols);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto& v = s[g.index_of(cloud[i].x, cloud[i].y)];
        if (!v || z[i] < *v) v = z[i];
    }
    return s;
}

}  // namespace filter_detail

/// Window radii (in cells) and elevation thresholds of the PMF schedule: radius 2^k cells
/// while the full window (2*radius + 1) * cell fits in max_window.
struct PmfStep {
    std::size_t radius_cells;
    double threshold;
};

[[nodiscard]] inline std::vector<PmfStep> pmf_schedule(const PmfParams& params) {
    params.validate();
    const double tan_slope = std::tan(params.slope * std::numbers::pi / 180.0);
    std::vector<PmfStep> steps;
    double prev_radius_m = 0.0;
    for (std::size_t k = 0;; ++k) {
        const std::size_t r = std::size_t{1} << k;
        if (static_cast<double>(2 * r + 1) * params.cell > params.max_window + 1e-9) break;
        const double radius_m = params.cell * static_cast<double>(r);
        const double d = k == 0 ? params.initial_distance
                                : std::min(params.max_distance, params.initial_distance + tan_slope * (radius_m - prev_radius_m));
        steps.push_back({r, d});
        prev_radius_m = radius_m;
        if (k > 40) break;
    }
    if (steps.empty()) steps.push_back({0, params.initial_distance});
    return steps;
}

/// Progressive morphological filter. The minimum surface is opened with growing square
/// windows; a cell is an object cell when one opening lowers it by more than that step's
/// threshold. Points in object cells are non-ground; other points are ground when within the
/// final threshold of the final surface.
[[nodiscard]] inline GroundMask pmf(const PointCloud& cloud, const PmfParams& params = {}) {
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "pmf needs at least one point");
    const auto steps = pmf_schedule(params);
    const auto z = filter_detail::relative_z(cloud);
    const auto grid = FilterGrid::covering(*cloud.bounds(), params.cell);
    auto surface = inpaint_nearest(filter_detail::minimum_surface(cloud, z, grid));

    Grid2D<std::uint8_t> object(grid.rows, grid.cols, 0);
    for (const auto& step : steps) {
        auto opened = open_surface(surface, step.radius_cells);
        for (std::size_t i = 0; i < surface.size(); ++i) {
            if (surface[i] - opened[i] > step.threshold) object[i] = 1;
        }
        surface = std::move(opened);
    }
    const double final_threshold = steps.back().threshold;

    GroundMask mask;
    mask.flags.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const std::size_t cell = grid.index_of(cloud[i].x, cloud[i].y);
        mask.flags[i] = !object[cell] && std::abs(z[i] - surface[cell]) <= final_threshold;
    }
    return mask;
}

/// Simple morphological filter. Openings with radius 1..ceil(max_window/cell) cells flag object
/// cells whose per-step drop exceeds slope_tolerance * radius * cell. The provisional surface
/// re-inpaints the minimum surface without object cells; a point is ground when
/// |z - provisional(x, y)| <= elevation_threshold + elevation_scalar * slope(provisional).
[[nodiscard]] inline GroundMask smrf(const PointCloud& cloud, const SmrfParams& params = {}) {
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "smrf needs at least one point");
    params.validate();
    const auto z = filter_detail::relative_z(cloud);
    const auto grid = FilterGrid::covering(*cloud.bounds(), params.cell);
    const auto sparse = filter_detail::minimum_surface(cloud, z, grid);
    auto last = inpaint_nearest(sparse);

    Grid2D<std::uint8_t> object(grid.rows, grid.cols, 0);
    const auto max_radius = static_cast<std::size_t>(std::ceil(params.max_window / params.cell - 1e-9));
    for (std::size_t r = 1; r <= max_radius; ++r) {
        const double threshold = params.slope_tolerance * static_cast<double>(r) * params.cell;
        auto opened = open_surface(last, r);
        for (std::size_t i = 0; i < last.size(); ++i) {
            if (last[i] - opened[i] > threshold) object[i] = 1;
        }
        last = std::move(opened);
    }

    Grid2D<std::optional<double>> kept = sparse;
    bool any_kept = false;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (object[i]) kept[i].reset();
        any_kept = any_kept || kept[i].has_value();
    }
    const auto provisional = any_kept ? inpaint_nearest(kept) : last;

    // Gradient magnitude (rise over run) by central differences, one-sided at borders.
    Grid2D<double> slope(grid.rows, grid.cols, 0.0);
    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const std::size_t c0 = c > 0 ? c - 1 : c, c1 = std::min(c + 1, grid.cols - 1);
            const std::size_t r0 = r > 0 ? r - 1 : r, r1 = std::min(r + 1, grid.rows - 1);
            const double gx = c1 > c0 ? (provisional(r, c1) - provisional(r, c0)) / (static_cast<double>(c1 - c0) * params.cell) : 0.0;
            const double gy = r1 > r0 ? (provisional(r1, c) - provisional(r0, c)) / (static_cast<double>(r1 - r0) * params.cell) : 0.0;
            slope(r, c) = std::hypot(gx, gy);
        }
    }

    GroundMask mask;
    mask.flags.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud[i];
        const double surface = sample_bilinear(provisional, grid, p.x, p.y);
        const double tol = params.elevation_threshold + params.elevation_scalar * slope[grid.index_of(p.x, p.y)];
        mask.flags[i] = std::abs(z[i] - surface) <= tol;
    }
    return mask;
}

/// Population skewness (1/n) sum(((z - mean) / sigma)^3); zero when sigma is zero.
template <typename It>
[[nodiscard]] double skewness(It first, It last) {
    const auto n = static_cast<long double>(std::distance(first, last));
    if (n < 1) return 0.0;
    long double mean = 0;
    for (auto it = first; it != last; ++it) mean += static_cast<long double>(*it);
    mean /= n;
    long double m2 = 0, m3 = 0;
    for (auto it = first; it != last; ++it) {
        const long double d = static_cast<long double>(*it) - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if (m2 <= 0) return 0.0;
    return static_cast<double>(m3 / (m2 * std::sqrt(m2)));
}

/// Skewness balancing: removes the highest point while the remaining elevations are
/// positively skewed. The survivors are ground.
[[nodiscard]] inline GroundMask sbm(const PointCloud& cloud) {
    if (cloud.size() < 3) throw Error(ErrorCode::TooFewPoints, "sbm needs at least 3 points, got " + std::to_string(cloud.size()));
    const auto z = filter_detail::relative_z(cloud);
    std::vector<std::size_t> order(cloud.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const CanonicalPointLess less;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (z[a] != z[b]) return z[a] > z[b];
        return less(cloud[b], cloud[a]);
    });

    // z sorted descending; remaining set is the suffix order[removed..]. Running power sums are
    // centred on the overall mean; near-zero skewness is re-evaluated with two passes.
    std::vector<double> sorted(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = z[order[k]];
    long double centre = 0;
    for (const double v : sorted) centre += v;
    centre /= static_cast<long double>(sorted.size());
    long double s1 = 0, s2 = 0, s3 = 0;
    for (const double v : sorted) {
        const long double d = v - centre;
        s1 += d;
        s2 += d * d;
        s3 += d * d * d;
    }

    std::size_t removed = 0;
    while (sorted.size() - removed > 1) {
        const auto n = static_cast<long double>(sorted.size() - removed);
        const long double m = s1 / n;
        const long double m2 = s2 / n - m * m;
        const long double m3 = s3 / n - 3 * m * (s2 / n) + 2 * m * m * m;
        double skew = 0.0;
        const long double spread = sorted[removed] - sorted.back();
        if (m2 > 1e-6L * spread * spread && m2 > 0) {
            skew = static_cast<double>(m3 / (m2 * std::sqrt(m2)));
        }
        if (std::abs(skew) < 1e-3) skew = skewness(sorted.begin() + static_cast<std::ptrdiff_t>(removed), sorted.end());
        if (!(skew > 0.0)) break;
        const long double d = sorted[removed] - centre;
        s1 -= d;
        s2 -= d * d;
        s3 -= d * d * d;
        ++removed;
    }

    GroundMask mask;
    mask.flags.assign(cloud.size(), true);
    for (std::size_t k = 0; k < removed; ++k) mask.flags[order[k]] = false;
    return mask;
}

/// Subset of points flagged ground.
[[nodiscard]] inline PointCloud mask_to_dtm_points(const PointCloud& cloud, const GroundMask& mask) {
    if (mask.size() != cloud.size()) {
        throw Error(ErrorCode::LengthMismatch, "mask has " + std::to_string(mask.size()) + " entries for " +
                                                   std::to_string(cloud.size()) + " points");
    }
    std::vector<PointRecord> out;
    out.reserve(mask.count());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (mask.flags[i]) out.push_back(cloud[i]);
    }
    return PointCloud(std::move(out), cloud.crs_tag());
}

}  // namespace terrarast
