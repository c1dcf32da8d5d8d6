#pragma once

// Cloth simulation filter. The cloud is inverted (z -> -z) and a particle cloth, one particle
// per cloth_resolution grid node, falls onto it under unit gravity. Motion is vertical only:
//
//   each iteration
//     gravity     every movable particle drops by time_step^2
//     collision   a particle at or below the inverted surface of its node is set onto it and pinned
//     springs     `rigidness` Gauss-Seidel passes over 4-neighbour links in row-major order; in
//                 pass p the correction factor is 0.5^p of the height difference, split in half
//                 between two movable particles, taken entirely by the movable one otherwise
//
// With slope smoothing, movable particles next to the pinned cloth are snapped onto their own
// surface height when the surface step to that pinned neighbour is at most cloth_resolution,
// spreading outwards. A point is ground when its inverted height lies within class_threshold of
// the bilinearly interpolated cloth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/groundfilter.hpp"
#include "terrarast/pointcloud.hpp"
#include "terrarast/surface.hpp"

namespace terrarast {

struct CsfParams {
    double cloth_resolution = 0.5;
    unsigned rigidness = 3;
    double time_step = 0.65;
    unsigned iterations = 500;
    double class_threshold = 0.5;
    bool slope_smoothing = true;

    void validate() const {
        if (!(cloth_resolution > 0.0)) throw Error(ErrorCode::InvalidArgument, "csf.cloth_resolution must be > 0");
        if (rigidness < 1 || rigidness > 3) throw Error(ErrorCode::InvalidArgument, "csf.rigidness must be 1, 2 or 3");
        if (!(time_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "csf.time_step must be > 0");
        if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "csf.iterations must be >= 1");
        if (!(class_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "csf.class_threshold must be > 0");
    }
};

/// Final cloth state, heights in the inverted frame relative to the cloud's min_z
/// (inverted height of point i is -(z_i - min_z)).
struct Cloth {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double resolution = 0.5;
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::vector<double> height;
    std::vector<double> surface;
    std::vector<std::uint8_t> pinned;

    [[nodiscard]] double at(double x, double y) const {
        const double fx = std::clamp((x - origin_x) / resolution, 0.0, static_cast<double>(cols - 1));
        const double fy = std::clamp((y - origin_y) / resolution, 0.0, static_cast<double>(rows - 1));
        const auto c0 = static_cast<std::size_t>(std::floor(fx));
        const auto r0 = static_cast<std::size_t>(std::floor(fy));
        const std::size_t c1 = std::min(c0 + 1, cols - 1), r1 = std::min(r0 + 1, rows - 1);
        const double tx = fx - static_cast<double>(c0), ty = fy - static_cast<double>(r0);
        const auto h = [&](std::size_t r, std::size_t c) { return height[r * cols + c]; };
        return (h(r0, c0) * (1 - tx) + h(r0, c1) * tx) * (1 - ty) + (h(r1, c0) * (1 - tx) + h(r1, c1) * tx) * ty;
    }
};

[[nodiscard]] inline Cloth simulate_cloth(const PointCloud& cloud, const CsfParams& params = {}) {
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "csf needs at least one point");
    params.validate();
    const auto& b = *cloud.bounds();

    Cloth cloth;
    cloth.origin_x = b.min_x;
    cloth.origin_y = b.min_y;
    cloth.resolution = params.cloth_resolution;
    cloth.cols = static_cast<std::size_t>(std::ceil(b.width() / params.cloth_resolution)) + 1;
    cloth.rows = static_cast<std::size_t>(std::ceil(b.length() / params.cloth_resolution)) + 1;
    const std::size_t rows = cloth.rows, cols = cloth.cols, n = rows * cols;

    // Inverted surface per node: highest inverted point snapped to its nearest node.
    Grid2D<std::optional<double>> sparse(rows, cols);
    for (const auto& p : cloud.points()) {
        const auto c = static_cast<std::size_t>(std::clamp(std::llround((p.x - b.min_x) / params.cloth_resolution), 0LL,
                                                           static_cast<long long>(cols) - 1));
        const auto r = static_cast<std::size_t>(std::clamp(std::llround((p.y - b.min_y) / params.cloth_resolution), 0LL,
                                                           static_cast<long long>(rows) - 1));
        const double h = -(p.z - b.min_z);
        auto& v = sparse(r, c);
        if (!v || h > *v) v = h;
    }
    cloth.surface = inpaint_nearest(sparse).data();

    const double start = *std::max_element(cloth.surface.begin(), cloth.surface.end()) + params.cloth_resolution;
    cloth.height.assign(n, start);
    cloth.pinned.assign(n, 0);
    auto& h = cloth.height;
    auto& pinned = cloth.pinned;
    const double drop = params.time_step * params.time_step;

    const auto relax = [&](std::size_t a, std::size_t c, double s) {
        const bool ma = !pinned[a], mc = !pinned[c];
        if (!ma && !mc) return;
        const double d = h[c] - h[a];
        if (ma && mc) {
            h[a] += 0.5 * d * s;
            h[c] -= 0.5 * d * s;
        } else if (ma) {
            h[a] += d * s;
        } else {
            h[c] -= d * s;
        }
    };

    std::size_t movable = n;
    for (unsigned it = 0; it < params.iterations && movable > 0; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!pinned[i]) h[i] -= drop;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!pinned[i] && h[i] <= cloth.surface[i]) {
                h[i] = cloth.surface[i];
                pinned[i] = 1;
                --movable;
            }
        }
        double s = 1.0;
        for (unsigned pass = 0; pass < params.rigidness; ++pass, s *= 0.5) {
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    const std::size_t i = r * cols + c;
                    if (c + 1 < cols) relax(i, i + 1, s);
                    if (r + 1 < rows) relax(i, i + cols, s);
                }
            }
        }
    }

    if (params.slope_smoothing) {
        std::deque<std::size_t> queue;
        for (std::size_t i = 0; i < n; ++i) {
            if (pinned[i]) queue.push_back(i);
        }
        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop_front();
            const std::size_t r = i / cols, c = i % cols;
            const std::size_t nbrs[4] = {r > 0 ? i - cols : n, r + 1 < rows ? i + cols : n, c > 0 ? i - 1 : n, c + 1 < cols ? i + 1 : n};
            for (const std::size_t j : nbrs) {
                if (j == n || pinned[j]) continue;
                if (std::abs(cloth.surface[j] - cloth.surface[i]) <= params.cloth_resolution) {
                    h[j] = cloth.surface[j];
                    pinned[j] = 1;
                    queue.push_back(j);
                }
            }
        }
    }
    return cloth;
}

[[nodiscard]] inline GroundMask csf(const PointCloud& cloud, const CsfParams& params = {}) {
    const auto cloth = simulate_cloth(cloud, params);
    const double base = cloud.bounds()->min_z;
    GroundMask mask;
    mask.flags.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud[i];
        mask.flags[i] = std::abs(-(p.z - base) - cloth.at(p.x, p.y)) <= params.class_threshold;
    }
    return mask;
}

}  // namespace terrarast
