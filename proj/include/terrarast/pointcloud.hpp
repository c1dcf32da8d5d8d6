#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "terrarast/error.hpp"

namespace terrarast {

/// ASPRS classification code for ground.
inline constexpr std::uint8_t kGroundClass = 2;

struct PointRecord {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    std::uint16_t intensity = 0;
    std::uint8_t echo_number = 1;
    std::uint8_t num_returns = 1;
    std::uint8_t class_label = 0;

    friend bool operator==(const PointRecord&, const PointRecord&) = default;
};

/// Total order used wherever accumulation order must not depend on input order.
struct CanonicalPointLess {
    bool operator()(const PointRecord& a, const PointRecord& b) const noexcept {
        return std::tie(a.x, a.y, a.z, a.echo_number, a.num_returns, a.class_label, a.intensity) <
               std::tie(b.x, b.y, b.z, b.echo_number, b.num_returns, b.class_label, b.intensity);
    }
};

struct BoundingBox {
    double min_x = 0.0;
    double min_y = 0.0;
    double min_z = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;
    double max_z = 0.0;

    [[nodiscard]] bool valid() const noexcept {
        return min_x <= max_x && min_y <= max_y && min_z <= max_z;
    }
    [[nodiscard]] double width() const noexcept { return max_x - min_x; }
    [[nodiscard]] double length() const noexcept { return max_y - min_y; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

[[nodiscard]] inline bool is_valid(const PointRecord& p) noexcept {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z) && p.echo_number >= 1 &&
           p.num_returns >= 1 && p.echo_number <= p.num_returns;
}

/// Immutable set of ALS points. Bounds are always the tight envelope of the points;
/// an empty cloud has no bounds.
class PointCloud {
public:
    PointCloud() = default;

    explicit PointCloud(std::vector<PointRecord> points, std::optional<std::string> crs_tag = std::nullopt)
        : points_(std::move(points)), crs_tag_(std::move(crs_tag)) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!is_valid(points_[i])) {
                throw Error(ErrorCode::InvalidArgument,
                            "point " + std::to_string(i) + " violates record invariants (finite xyz, 1 <= echo <= returns)");
            }
        }
        if (!points_.empty()) {
            BoundingBox b{points_[0].x, points_[0].y, points_[0].z, points_[0].x, points_[0].y, points_[0].z};
            for (const auto& p : points_) {
                b.min_x = std::min(b.min_x, p.x);
                b.min_y = std::min(b.min_y, p.y);
                b.min_z = std::min(b.min_z, p.z);
                b.max_x = std::max(b.max_x, p.x);
                b.max_y = std::max(b.max_y, p.y);
                b.max_z = std::max(b.max_z, p.z);
            }
            bounds_ = b;
        }
    }

    [[nodiscard]] std::span<const PointRecord> points() const noexcept { return points_; }
    [[nodiscard]] const PointRecord& operator[](std::size_t i) const { return points_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] bool empty() const noexcept { return points_.empty(); }
    [[nodiscard]] const std::optional<BoundingBox>& bounds() const noexcept { return bounds_; }
    [[nodiscard]] const std::optional<std::string>& crs_tag() const noexcept { return crs_tag_; }

    friend bool operator==(const PointCloud& a, const PointCloud& b) {
        return a.points_ == b.points_ && a.crs_tag_ == b.crs_tag_;
    }

private:
    std::vector<PointRecord> points_;
    std::optional<BoundingBox> bounds_;
    std::optional<std::string> crs_tag_;
};

/// Points with min_x <= x < max_x and min_y <= y < max_y. Half-open in xy so adjacent
/// tiles partition a cloud exactly; z is not restricted.
[[nodiscard]] inline PointCloud crop(const PointCloud& cloud, const BoundingBox& region) {
    if (!(region.min_x <= region.max_x && region.min_y <= region.max_y)) {
        throw Error(ErrorCode::InvalidArgument, "crop region has min > max");
    }
    std::vector<PointRecord> out;
    for (const auto& p : cloud.points()) {
        if (p.x >= region.min_x && p.x < region.max_x && p.y >= region.min_y && p.y < region.max_y) {
            out.push_back(p);
        }
    }
    return PointCloud(std::move(out), cloud.crs_tag());
}

/// Splits the xy bounds into n x n half-open tiles (row-major from min_y, min_x). The last row
/// and column are extended past the max edge so no point is dropped.
[[nodiscard]] inline std::vector<BoundingBox> tile_regions(const BoundingBox& bounds, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "tile count must be >= 1");
    std::vector<BoundingBox> tiles;
    const double dx = bounds.width() / static_cast<double>(n);
    const double dy = bounds.length() / static_cast<double>(n);
    const auto edge = [](double lo, double step, std::size_t k, std::size_t n, double hi) {
        return k == n ? std::nextafter(hi, std::numeric_limits<double>::infinity()) : lo + step * static_cast<double>(k);
    };
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            tiles.push_back({edge(bounds.min_x, dx, c, n, bounds.max_x), edge(bounds.min_y, dy, r, n, bounds.max_y),
                             bounds.min_z, edge(bounds.min_x, dx, c + 1, n, bounds.max_x),
                             edge(bounds.min_y, dy, r + 1, n, bounds.max_y), bounds.max_z});
        }
    }
    return tiles;
}

}  // namespace terrarast
