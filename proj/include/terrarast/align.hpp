#pragma once

// Integer-cell offset correction between a raster and a reference DTM on ground cells.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/grid.hpp"

namespace terrarast {

namespace align_detail {

inline void require_same_spec(const RasterGrid& a, const RasterGrid& b, const char* what) {
    const auto field = first_difference(a.spec(), b.spec());
    if (!field.empty()) throw Error(ErrorCode::SpecMismatch, std::string(what) + " grid specs differ in " + field);
}

inline bool is_ground(const RasterGrid& mask, std::size_t i) {
    const float v = mask.values()[i];
    return !mask.is_nodata(v) && v == 1.0f;
}

/// Masked RMSE with the raster and its mask read at (i - dy, j - dx); nullopt on empty overlap.
inline std::optional<double> shifted_rmse(const RasterGrid& raster, const RasterGrid& ref, const RasterGrid& mask, std::size_t dx,
                                          std::size_t dy) {
    const std::size_t w = ref.width(), h = ref.height();
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = dy; i < h; ++i) {
        for (std::size_t j = dx; j < w; ++j) {
            const std::size_t src = (i - dy) * w + (j - dx);
            if (!is_ground(mask, src)) continue;
            const float p = raster.values()[src];
            const float r = ref.values()[i * w + j];
            if (raster.is_nodata(p) || ref.is_nodata(r)) continue;
            const double d = static_cast<double>(p) - static_cast<double>(r);
            sum += d * d;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return std::sqrt(sum / static_cast<double>(n));
}

}  // namespace align_detail

/// Raster content moved dx columns east and dy rows south; vacated cells become nodata.
[[nodiscard]] inline RasterGrid shift(const RasterGrid& g, std::size_t dx, std::size_t dy) {
    RasterGrid out(g.spec(), g.kind(), g.nodata(), g.kind() == BandKind::custom ? g.name() : std::string{});
    for (std::size_t i = dy; i < g.height(); ++i) {
        for (std::size_t j = dx; j < g.width(); ++j) out(i, j) = g(i - dy, j - dx);
    }
    return out;
}

/// RMSE over cells where mask is 1 and both grids hold data.
[[nodiscard]] inline double masked_rmse(const RasterGrid& pred, const RasterGrid& ref, const RasterGrid& mask) {
    align_detail::require_same_spec(pred, ref, "pred/ref");
    align_detail::require_same_spec(pred, mask, "pred/mask");
    const auto r = align_detail::shifted_rmse(pred, ref, mask, 0, 0);
    if (!r) throw Error(ErrorCode::EmptyOverlap, "no cell is ground-masked and valid in both grids");
    return *r;
}

struct OffsetResult {
    std::size_t dx = 0;
    std::size_t dy = 0;
    double rmse_at_best = 0.0;
    /// rmse_grid[dy][dx]; NaN where the overlap at that offset is empty.
    std::vector<std::vector<double>> rmse_grid;
};

/// Brute-force search over (dx, dy) in [0, search_range]^2. The mask lives in the raster's frame
/// and moves with it. Ties go to the smaller dy, then the smaller dx.
[[nodiscard]] inline OffsetResult grid_offset_search(const RasterGrid& raster, const RasterGrid& dtm, const RasterGrid& ground_mask,
                                                     std::size_t search_range = 10) {
    align_detail::require_same_spec(raster, dtm, "raster/dtm");
    align_detail::require_same_spec(raster, ground_mask, "raster/mask");
    const std::size_t n = search_range + 1;
    OffsetResult res;
    res.rmse_grid.assign(n, std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
    bool found = false;
    for (std::size_t dy = 0; dy < n; ++dy) {
        for (std::size_t dx = 0; dx < n; ++dx) {
            const auto r = align_detail::shifted_rmse(raster, dtm, ground_mask, dx, dy);
            if (!r) continue;
            res.rmse_grid[dy][dx] = *r;
            if (!found || *r < res.rmse_at_best) {
                res.dx = dx;
                res.dy = dy;
                res.rmse_at_best = *r;
                found = true;
            }
        }
    }
    if (!found) throw Error(ErrorCode::EmptyOverlap, "no offset in the search range has a valid overlap");
    return res;
}

}  // namespace terrarast
