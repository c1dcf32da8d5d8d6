#pragma once

// DTM accuracy metrics and report tables.
//
// CSV schemas
//   elevation report   split,pixel_mean,voxel_top,voxel_bottom,tiles
//   per-tile RMSE      tile,split,rmse_m,cells
//   box stats          tile,min,q1,median,q3,max,count

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/grid.hpp"
#include "terrarast/rasterize.hpp"

namespace terrarast {

/// RMSE over cells valid in both grids.
[[nodiscard]] inline double dtm_rmse(const RasterGrid& pred, const RasterGrid& ref) {
    const auto field = first_difference(pred.spec(), ref.spec());
    if (!field.empty()) throw Error(ErrorCode::SpecMismatch, "pred/ref grid specs differ in " + field);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.values().size(); ++i) {
        const float p = pred.values()[i], r = ref.values()[i];
        if (pred.is_nodata(p) || ref.is_nodata(r)) continue;
        const double d = static_cast<double>(p) - static_cast<double>(r);
        sum += d * d;
        ++n;
    }
    if (n == 0) throw Error(ErrorCode::EmptyOverlap, "no cell is valid in both grids");
    return std::sqrt(sum / static_cast<double>(n));
}

/// Brings a band onto `target`. Integer-factor coarsening with aligned origins uses the
/// block rule of `downsample`; anything else samples the source at target cell centres.
[[nodiscard]] inline RasterGrid resample_to(const RasterGrid& g, const GridSpec& target) {
    if (first_difference(g.spec(), target).empty()) return g;
    const auto& s = g.spec();
    const double ratio = target.cell_size / s.cell_size;
    const double k = std::round(ratio);
    const double ox = (target.origin_x - s.origin_x) / s.cell_size;
    const double oy = (s.origin_y - target.origin_y) / s.cell_size;
    if (k >= 1.0 && std::abs(ratio - k) < 1e-9 && std::abs(ox) < 1e-9 && std::abs(oy) < 1e-9) {
        RasterStack one;
        one.push_back(g);
        const auto coarse = downsample(one, static_cast<std::size_t>(k))[0];
        RasterGrid out(target, g.kind(), target.nodata, g.kind() == BandKind::custom ? g.name() : std::string{});
        for (std::size_t r = 0; r < std::min(target.height, coarse.height()); ++r) {
            for (std::size_t c = 0; c < std::min(target.width, coarse.width()); ++c) {
                const float v = coarse(r, c);
                out(r, c) = coarse.is_nodata(v) ? target.nodata : v;
            }
        }
        return out;
    }
    RasterGrid out(target, g.kind(), target.nodata, g.kind() == BandKind::custom ? g.name() : std::string{});
    for (std::size_t r = 0; r < target.height; ++r) {
        for (std::size_t c = 0; c < target.width; ++c) {
            const auto cell = s.cell_of(target.center_x(c), target.center_y(r));
            if (!cell) continue;
            const float v = g.values()[*cell];
            if (!g.is_nodata(v)) out(r, c) = v;
        }
    }
    return out;
}

inline constexpr std::array<BandKind, 3> kElevationBands{BandKind::pixel_mean, BandKind::voxel_top, BandKind::voxel_bottom};

struct ElevationReportRow {
    std::string split;
    std::array<double, 3> mean_rmse{};  ///< pixel_mean, voxel_top, voxel_bottom
    std::size_t tiles = 0;
};

/// Mean over tiles of the RMSE of each elevation band used directly as the DTM. Bands are
/// resampled onto the reference grid first.
[[nodiscard]] inline ElevationReportRow elevation_raster_as_dtm_report(const std::vector<RasterStack>& stacks,
                                                                       const std::vector<RasterGrid>& refs, std::string split = "all") {
    if (stacks.size() != refs.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(stacks.size()) + " stacks but " + std::to_string(refs.size()) + " reference DTMs");
    }
    if (stacks.empty()) throw Error(ErrorCode::EmptyOverlap, "no tiles to report on");
    ElevationReportRow row;
    row.split = std::move(split);
    row.tiles = stacks.size();
    for (std::size_t t = 0; t < stacks.size(); ++t) {
        for (std::size_t b = 0; b < kElevationBands.size(); ++b) {
            const auto& band = stacks[t].at(to_string(kElevationBands[b]));
            row.mean_rmse[b] += dtm_rmse(resample_to(band, refs[t].spec()), refs[t]);
        }
    }
    for (auto& v : row.mean_rmse) v /= static_cast<double>(stacks.size());
    return row;
}

namespace eval_detail {

inline std::string fmt(double v, int digits = 4) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace eval_detail

[[nodiscard]] inline std::string elevation_report_csv(const std::vector<ElevationReportRow>& rows) {
    std::string out = "split,pixel_mean,voxel_top,voxel_bottom,tiles\n";
    for (const auto& r : rows) {
        out += r.split;
        for (const double v : r.mean_rmse) out += ',' + eval_detail::fmt(v);
        out += ',' + std::to_string(r.tiles) + '\n';
    }
    return out;
}

[[nodiscard]] inline std::string elevation_report_markdown(const std::vector<ElevationReportRow>& rows) {
    std::string out = "| Split | Pixel-mean | Voxel-top | Voxel-bottom |\n|---|---:|---:|---:|\n";
    for (const auto& r : rows) {
        out += "| " + r.split;
        for (const double v : r.mean_rmse) out += " | " + eval_detail::fmt(v, 2);
        out += " |\n";
    }
    return out;
}

struct Histogram {
    double bin_width = 1.0;
    std::map<long long, std::size_t> counts;  ///< bin k covers [k*bin_width, (k+1)*bin_width)

    [[nodiscard]] std::size_t total() const {
        std::size_t n = 0;
        for (const auto& [k, c] : counts) n += c;
        return n;
    }
};

[[nodiscard]] inline Histogram elevation_histogram(const RasterGrid& dtm, double bin_width) {
    if (!(bin_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "bin_width must be > 0");
    Histogram h;
    h.bin_width = bin_width;
    for (const float v : dtm.values()) {
        if (dtm.is_nodata(v)) continue;
        ++h.counts[static_cast<long long>(std::floor(static_cast<double>(v) / bin_width))];
    }
    return h;
}

struct BoxStats {
    double min = std::numeric_limits<double>::quiet_NaN();
    double q1 = std::numeric_limits<double>::quiet_NaN();
    double median = std::numeric_limits<double>::quiet_NaN();
    double q3 = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;
};

/// Quantile q of sorted values, interpolating linearly at position (n - 1) * q.
[[nodiscard]] inline double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = static_cast<double>(v.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return v[lo] + (v[hi] - v[lo]) * t;
}

[[nodiscard]] inline BoxStats box_stats(const RasterGrid& dtm) {
    std::vector<double> v;
    v.reserve(dtm.values().size());
    for (const float x : dtm.values()) {
        if (!dtm.is_nodata(x)) v.push_back(x);
    }
    BoxStats s;
    s.count = v.size();
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    s.min = v.front();
    s.q1 = quantile_sorted(v, 0.25);
    s.median = quantile_sorted(v, 0.5);
    s.q3 = quantile_sorted(v, 0.75);
    s.max = v.back();
    return s;
}

[[nodiscard]] inline std::vector<BoxStats> per_tile_boxstats(const std::vector<RasterGrid>& dtms) {
    std::vector<BoxStats> out;
    out.reserve(dtms.size());
    for (const auto& d : dtms) out.push_back(box_stats(d));
    return out;
}

[[nodiscard]] inline std::string boxstats_csv(const std::vector<BoxStats>& stats, const std::vector<std::string>& labels) {
    std::string out = "tile,min,q1,median,q3,max,count\n";
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& s = stats[i];
        out += (i < labels.size() ? labels[i] : std::to_string(i));
        for (const double v : {s.min, s.q1, s.median, s.q3, s.max}) out += ',' + eval_detail::fmt(v);
        out += ',' + std::to_string(s.count) + '\n';
    }
    return out;
}

/// Static box plot, one box per tile, elevation on the y axis.
[[nodiscard]] inline std::string boxplot_svg(const std::vector<BoxStats>& stats, const std::vector<std::string>& labels) {
    constexpr double W = 640, H = 360, left = 60, right = 20, top = 20, bottom = 50;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : stats) {
        if (s.count == 0) continue;
        lo = std::min(lo, s.min);
        hi = std::max(hi, s.max);
    }
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-9) lo -= 0.5, hi += 0.5;
    const auto y = [&](double v) { return top + (H - top - bottom) * (hi - v) / (hi - lo); };
    const double slot = (W - left - right) / static_cast<double>(std::max<std::size_t>(stats.size(), 1));
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<line x1=\"60\" y1=\"20\" x2=\"60\" y2=\"310\" stroke=\"black\"/>\n";
    s += "<text x=\"" + eval_detail::fmt(left - 5, 1) + "\" y=\"" + eval_detail::fmt(y(hi), 1) + "\" text-anchor=\"end\">" +
         eval_detail::fmt(hi, 1) + "</text>\n";
    s += "<text x=\"" + eval_detail::fmt(left - 5, 1) + "\" y=\"" + eval_detail::fmt(y(lo), 1) + "\" text-anchor=\"end\">" +
         eval_detail::fmt(lo, 1) + "</text>\n";
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& b = stats[i];
        const double cx = left + slot * (static_cast<double>(i) + 0.5);
        const double hw = std::min(20.0, slot * 0.3);
        if (b.count > 0) {
            s += "<line x1=\"" + eval_detail::fmt(cx, 1) + "\" y1=\"" + eval_detail::fmt(y(b.max), 1) + "\" x2=\"" +
                 eval_detail::fmt(cx, 1) + "\" y2=\"" + eval_detail::fmt(y(b.min), 1) + "\" stroke=\"black\"/>\n";
            s += "<rect x=\"" + eval_detail::fmt(cx - hw, 1) + "\" y=\"" + eval_detail::fmt(y(b.q3), 1) + "\" width=\"" +
                 eval_detail::fmt(2 * hw, 1) + "\" height=\"" + eval_detail::fmt(y(b.q1) - y(b.q3), 1) +
                 "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
            s += "<line x1=\"" + eval_detail::fmt(cx - hw, 1) + "\" y1=\"" + eval_detail::fmt(y(b.median), 1) + "\" x2=\"" +
                 eval_detail::fmt(cx + hw, 1) + "\" y2=\"" + eval_detail::fmt(y(b.median), 1) + "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        }
        s += "<text x=\"" + eval_detail::fmt(cx, 1) + "\" y=\"330\" text-anchor=\"middle\">" +
             (i < labels.size() ? labels[i] : std::to_string(i)) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

/// Static bar chart of a histogram, bins in ascending order.
[[nodiscard]] inline std::string histogram_svg(const Histogram& h) {
    constexpr double W = 640, H = 360, left = 60, right = 20, top = 20, bottom = 50;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" font-family=\"sans-serif\" font-size=\"11\">\n";
    if (!h.counts.empty()) {
        const long long k0 = h.counts.begin()->first, k1 = h.counts.rbegin()->first;
        const double nbins = static_cast<double>(k1 - k0 + 1);
        std::size_t peak = 0;
        for (const auto& [k, c] : h.counts) peak = std::max(peak, c);
        const double bw = (W - left - right) / nbins;
        for (const auto& [k, c] : h.counts) {
            const double bh = (H - top - bottom) * static_cast<double>(c) / static_cast<double>(peak);
            s += "<rect x=\"" + eval_detail::fmt(left + bw * static_cast<double>(k - k0), 2) + "\" y=\"" +
                 eval_detail::fmt(H - bottom - bh, 2) + "\" width=\"" + eval_detail::fmt(bw, 2) + "\" height=\"" +
                 eval_detail::fmt(bh, 2) + "\" fill=\"#6baed6\"/>\n";
        }
        s += "<text x=\"60\" y=\"330\">" + eval_detail::fmt(static_cast<double>(k0) * h.bin_width, 2) + " m</text>\n";
        s += "<text x=\"620\" y=\"330\" text-anchor=\"end\">" + eval_detail::fmt(static_cast<double>(k1 + 1) * h.bin_width, 2) +
             " m</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace terrarast
