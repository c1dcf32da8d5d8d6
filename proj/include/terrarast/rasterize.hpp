#pragma once

// Point cloud to raster conversion: elevation bands (pixel_mean, voxel_top, voxel_bottom),
// statistic bands (density, stdev, echoes) and semantic bands (sem1, sem2).
//
// Voxels are stacked per column with height voxel_size_z, anchored at the cloud's min_z.
// Points of a column are accumulated in canonical (x, y, z, echo, ...) order, so every band
// is bit-identical under any permutation of the input points.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/grid.hpp"
#include "terrarast/pointcloud.hpp"

namespace terrarast {

using GroundCodes = std::set<std::uint8_t>;

/// CSR layout of point indices grouped by grid cell, each cell in canonical point order.
/// Points outside the grid are dropped.
class ColumnIndex {
public:
    ColumnIndex(const PointCloud& cloud, const GridSpec& spec) : cloud_(&cloud), offsets_(spec.cell_count() + 1, 0) {
        spec.validate();
        std::vector<std::size_t> cell(cloud.size(), spec.cell_count());
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (const auto c = spec.cell_of(cloud[i].x, cloud[i].y)) {
                cell[i] = *c;
                ++offsets_[*c + 1];
            }
        }
        std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
        order_.resize(offsets_.back());
        std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (cell[i] < spec.cell_count()) order_[cursor[cell[i]]++] = i;
        }
        const CanonicalPointLess less;
        for (std::size_t c = 0; c + 1 < offsets_.size(); ++c) {
            std::sort(order_.begin() + static_cast<std::ptrdiff_t>(offsets_[c]),
                      order_.begin() + static_cast<std::ptrdiff_t>(offsets_[c + 1]),
                      [&](std::size_t a, std::size_t b) { return less(cloud[a], cloud[b]); });
        }
    }

    [[nodiscard]] std::span<const std::size_t> column(std::size_t cell) const {
        return std::span(order_).subspan(offsets_[cell], offsets_[cell + 1] - offsets_[cell]);
    }
    [[nodiscard]] std::size_t cell_count() const noexcept { return offsets_.size() - 1; }
    [[nodiscard]] const PointCloud& cloud() const noexcept { return *cloud_; }

private:
    const PointCloud* cloud_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> order_;
};

namespace raster_detail {

inline double anchor_z(const PointCloud& cloud) { return cloud.bounds() ? cloud.bounds()->min_z : 0.0; }

inline long long voxel_of(double z, double anchor, double voxel) {
    return static_cast<long long>(std::floor((z - anchor) / voxel));
}

/// Mean z of each occupied voxel in a column, ascending by voxel index.
inline std::vector<double> voxel_means(const PointCloud& cloud, std::span<const std::size_t> col, double anchor, double voxel) {
    std::map<long long, std::pair<double, std::size_t>> acc;
    for (const auto i : col) {
        auto& slot = acc[voxel_of(cloud[i].z, anchor, voxel)];
        slot.first += cloud[i].z;
        ++slot.second;
    }
    std::vector<double> means;
    means.reserve(acc.size());
    for (const auto& [k, s] : acc) means.push_back(s.first / static_cast<double>(s.second));
    return means;
}

/// Mean z of the extreme (highest or lowest) occupied voxel of a column.
inline double extreme_voxel_mean(const PointCloud& cloud, std::span<const std::size_t> col, double anchor, double voxel, bool top) {
    long long best = voxel_of(cloud[col.front()].z, anchor, voxel);
    for (const auto i : col) {
        const auto k = voxel_of(cloud[i].z, anchor, voxel);
        best = top ? std::max(best, k) : std::min(best, k);
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto i : col) {
        if (voxel_of(cloud[i].z, anchor, voxel) == best) {
            sum += cloud[i].z;
            ++n;
        }
    }
    return sum / static_cast<double>(n);
}

/// Most frequent value; ties go to the smallest value.
template <typename Range, typename Proj>
unsigned mode_of(const Range& indices, Proj proj) {
    std::array<std::size_t, 256> hist{};
    for (const auto i : indices) ++hist[proj(i)];
    unsigned best = 0;
    for (unsigned v = 1; v < hist.size(); ++v) {
        if (hist[v] > hist[best]) best = v;
    }
    return best;
}

inline float column_value(const ColumnIndex& idx, std::size_t cell, BandKind kind, const GridSpec& spec, double anchor) {
    const auto& cloud = idx.cloud();
    const auto col = idx.column(cell);
    if (kind == BandKind::density) return static_cast<float>(col.size());
    if (col.empty()) return spec.nodata;
    switch (kind) {
        case BandKind::pixel_mean: {
            double sum = 0.0;
            for (const auto i : col) sum += cloud[i].z;
            return static_cast<float>(sum / static_cast<double>(col.size()));
        }
        case BandKind::voxel_top: return static_cast<float>(extreme_voxel_mean(cloud, col, anchor, spec.voxel_size_z, true));
        case BandKind::voxel_bottom: return static_cast<float>(extreme_voxel_mean(cloud, col, anchor, spec.voxel_size_z, false));
        case BandKind::stdev: {
            const auto means = voxel_means(cloud, col, anchor, spec.voxel_size_z);
            if (means.size() == 1) return 0.0f;
            const double mu = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
            double ss = 0.0;
            for (const double m : means) ss += (m - mu) * (m - mu);
            return static_cast<float>(std::sqrt(ss / static_cast<double>(means.size())));
        }
        case BandKind::echoes:
            return static_cast<float>(mode_of(col, [&](std::size_t i) { return cloud[i].echo_number; }));
        default: throw Error(ErrorCode::InvalidArgument, "band '" + std::string(to_string(kind)) + "' is not a per-column statistic");
    }
}

}  // namespace raster_detail

/// Rasterizes one non-semantic band using a prebuilt column index.
[[nodiscard]] inline RasterGrid rasterize_band(const ColumnIndex& idx, const GridSpec& spec, BandKind kind) {
    const double anchor = raster_detail::anchor_z(idx.cloud());
    RasterGrid grid(spec, kind, spec.nodata);
    auto& v = grid.values();
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = raster_detail::column_value(idx, c, kind, spec, anchor);
    return grid;
}

[[nodiscard]] inline RasterGrid rasterize_pixel_mean(const PointCloud& cloud, const GridSpec& spec) {
    return rasterize_band(ColumnIndex(cloud, spec), spec, BandKind::pixel_mean);
}
[[nodiscard]] inline RasterGrid rasterize_voxel_top(const PointCloud& cloud, const GridSpec& spec) {
    return rasterize_band(ColumnIndex(cloud, spec), spec, BandKind::voxel_top);
}
[[nodiscard]] inline RasterGrid rasterize_voxel_bottom(const PointCloud& cloud, const GridSpec& spec) {
    return rasterize_band(ColumnIndex(cloud, spec), spec, BandKind::voxel_bottom);
}
[[nodiscard]] inline RasterGrid rasterize_density(const PointCloud& cloud, const GridSpec& spec) {
    return rasterize_band(ColumnIndex(cloud, spec), spec, BandKind::density);
}
[[nodiscard]] inline RasterGrid rasterize_stdev(const PointCloud& cloud, const GridSpec& spec) {
    return rasterize_band(ColumnIndex(cloud, spec), spec, BandKind::stdev);
}
[[nodiscard]] inline RasterGrid rasterize_echoes(const PointCloud& cloud, const GridSpec& spec) {
    return rasterize_band(ColumnIndex(cloud, spec), spec, BandKind::echoes);
}

struct SemanticRasters {
    RasterGrid sem1;
    RasterStack sem2;  // sem2_ground, sem2_nonground
};

[[nodiscard]] inline SemanticRasters rasterize_semantics(const ColumnIndex& idx, const GridSpec& spec, const GroundCodes& ground_codes) {
    if (ground_codes.empty()) throw Error(ErrorCode::InvalidArgument, "ground_codes must not be empty");
    const auto& cloud = idx.cloud();
    RasterGrid sem1(spec, BandKind::sem1, spec.nodata);
    RasterGrid ground(spec, BandKind::sem2_ground, spec.nodata);
    RasterGrid nonground(spec, BandKind::sem2_nonground, spec.nodata);
    for (std::size_t c = 0; c < idx.cell_count(); ++c) {
        const auto col = idx.column(c);
        if (col.empty()) continue;
        const auto label = raster_detail::mode_of(col, [&](std::size_t i) { return cloud[i].class_label; });
        const bool is_ground = ground_codes.count(static_cast<std::uint8_t>(label)) > 0;
        sem1.values()[c] = is_ground ? 1.0f : 0.0f;
        ground.values()[c] = is_ground ? 1.0f : 0.0f;
        nonground.values()[c] = is_ground ? 0.0f : 1.0f;
    }
    return {std::move(sem1), stack_bands({std::move(ground), std::move(nonground)})};
}

[[nodiscard]] inline SemanticRasters rasterize_semantics(const PointCloud& cloud, const GridSpec& spec, const GroundCodes& ground_codes) {
    return rasterize_semantics(ColumnIndex(cloud, spec), spec, ground_codes);
}

/// Rasterizes the requested bands (in order) with a single column pass. "sem2" expands to
/// sem2_ground and sem2_nonground.
[[nodiscard]] inline RasterStack rasterize_bands(const PointCloud& cloud, const GridSpec& spec, const std::vector<std::string>& names,
                                                 const GroundCodes& ground_codes = {kGroundClass}) {
    const ColumnIndex idx(cloud, spec);
    std::optional<SemanticRasters> sem;
    const auto semantics = [&]() -> const SemanticRasters& {
        if (!sem) sem = rasterize_semantics(idx, spec, ground_codes);
        return *sem;
    };
    RasterStack stack;
    for (const auto& name : names) {
        if (name == "sem2") {
            for (const auto& b : semantics().sem2.bands()) stack.push_back(b);
            continue;
        }
        const auto kind = band_from_string(name);
        if (!kind || *kind == BandKind::dtm) throw Error(ErrorCode::InvalidArgument, "unknown band '" + name + "'");
        if (*kind == BandKind::sem1) {
            stack.push_back(semantics().sem1);
        } else if (*kind == BandKind::sem2_ground || *kind == BandKind::sem2_nonground) {
            stack.push_back(semantics().sem2.at(name));
        } else {
            stack.push_back(rasterize_band(idx, spec, *kind));
        }
    }
    return stack;
}

/// Block-reduces every band by `factor`. Non-divisible grids are padded with nodata on the
/// bottom and right. Elevation/stdev bands average valid cells; density sums; echoes take the
/// block mode; semantic bands average and re-binarize at 0.5. All-nodata blocks stay nodata.
[[nodiscard]] inline RasterStack downsample(const RasterStack& stack, std::size_t factor) {
    if (factor == 0) throw Error(ErrorCode::InvalidArgument, "downsample factor must be >= 1");
    if (factor == 1 || stack.empty()) return stack;
    const GridSpec& in = stack.spec();
    GridSpec out = in;
    out.cell_size = in.cell_size * static_cast<double>(factor);
    out.width = (in.width + factor - 1) / factor;
    out.height = (in.height + factor - 1) / factor;

    RasterStack result;
    for (const auto& band : stack.bands()) {
        RasterGrid dst(out, band.kind(), out.nodata, band.kind() == BandKind::custom ? band.name() : std::string{});
        for (std::size_t r = 0; r < out.height; ++r) {
            for (std::size_t c = 0; c < out.width; ++c) {
                double sum = 0.0;
                std::size_t n = 0;
                std::map<float, std::size_t> hist;
                for (std::size_t rr = r * factor; rr < std::min(in.height, (r + 1) * factor); ++rr) {
                    for (std::size_t cc = c * factor; cc < std::min(in.width, (c + 1) * factor); ++cc) {
                        const float v = band(rr, cc);
                        if (band.is_nodata(v)) continue;
                        sum += v;
                        ++n;
                        if (band.kind() == BandKind::echoes) ++hist[v];
                    }
                }
                if (n == 0) continue;
                float value = 0.0f;
                if (band.kind() == BandKind::density) {
                    value = static_cast<float>(sum);
                } else if (band.kind() == BandKind::echoes) {
                    auto best = hist.begin();
                    for (auto it = hist.begin(); it != hist.end(); ++it) {
                        if (it->second > best->second) best = it;
                    }
                    value = best->first;
                } else if (is_semantic(band.kind())) {
                    value = sum / static_cast<double>(n) >= 0.5 ? 1.0f : 0.0f;
                } else {
                    value = static_cast<float>(sum / static_cast<double>(n));
                }
                dst(r, c) = value;
            }
        }
        result.push_back(std::move(dst));
    }
    return result;
}

}  // namespace terrarast
