#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/pointcloud.hpp"

namespace terrarast {

inline constexpr float kDefaultNodata = -9999.0f;

/// Georeferenced raster geometry. Row 0 is the north edge: cell (row, col) covers
/// [origin_x + col*cell, origin_x + (col+1)*cell) x (origin_y - (row+1)*cell, origin_y - row*cell].
struct GridSpec {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell_size = 0.25;
    std::size_t width = 1;
    std::size_t height = 1;
    double voxel_size_z = 0.25;
    float nodata = kDefaultNodata;
    std::optional<std::string> crs_tag;

    [[nodiscard]] std::size_t cell_count() const noexcept { return width * height; }

    void validate() const {
        if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw Error(ErrorCode::InvalidSpec, "cell_size must be > 0");
        if (!(voxel_size_z > 0.0) || !std::isfinite(voxel_size_z)) throw Error(ErrorCode::InvalidSpec, "voxel_size_z must be > 0");
        if (width == 0 || height == 0) throw Error(ErrorCode::InvalidSpec, "width and height must be > 0");
        if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) throw Error(ErrorCode::InvalidSpec, "origin must be finite");
    }

    /// Flat row-major index of the cell containing (x, y), or nullopt outside the grid.
    [[nodiscard]] std::optional<std::size_t> cell_of(double x, double y) const noexcept {
        const double fc = std::floor((x - origin_x) / cell_size);
        const double fr = std::floor((origin_y - y) / cell_size);
        if (fc < 0.0 || fr < 0.0 || fc >= static_cast<double>(width) || fr >= static_cast<double>(height)) return std::nullopt;
        return static_cast<std::size_t>(fr) * width + static_cast<std::size_t>(fc);
    }

    [[nodiscard]] double center_x(std::size_t col) const noexcept { return origin_x + (static_cast<double>(col) + 0.5) * cell_size; }
    [[nodiscard]] double center_y(std::size_t row) const noexcept { return origin_y - (static_cast<double>(row) + 0.5) * cell_size; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Name of the first field in which two specs differ, or empty when identical.
[[nodiscard]] inline std::string first_difference(const GridSpec& a, const GridSpec& b) {
    if (a.origin_x != b.origin_x) return "origin_x";
    if (a.origin_y != b.origin_y) return "origin_y";
    if (a.cell_size != b.cell_size) return "cell_size";
    if (a.width != b.width) return "width";
    if (a.height != b.height) return "height";
    if (a.voxel_size_z != b.voxel_size_z) return "voxel_size_z";
    if (std::memcmp(&a.nodata, &b.nodata, sizeof(float)) != 0) return "nodata";
    if (a.crs_tag != b.crs_tag) return "crs_tag";
    return {};
}

/// Grid snapped to multiples of cell_size that covers every point of the bounds.
[[nodiscard]] inline GridSpec grid_for_bounds(const BoundingBox& b, double cell_size, double voxel_size_z = 0.25) {
    GridSpec spec;
    spec.cell_size = cell_size;
    spec.voxel_size_z = voxel_size_z;
    spec.origin_x = std::floor(b.min_x / cell_size) * cell_size;
    spec.origin_y = std::ceil(b.max_y / cell_size) * cell_size;
    spec.width = static_cast<std::size_t>(std::floor((b.max_x - spec.origin_x) / cell_size)) + 1;
    spec.height = static_cast<std::size_t>(std::floor((spec.origin_y - b.min_y) / cell_size)) + 1;
    spec.validate();
    return spec;
}

enum class BandKind : std::uint8_t {
    pixel_mean,
    voxel_top,
    voxel_bottom,
    density,
    stdev,
    echoes,
    sem1,
    sem2_ground,
    sem2_nonground,
    dtm,
    custom,
};

inline constexpr std::array<std::pair<BandKind, std::string_view>, 10> kBandNames{{
    {BandKind::pixel_mean, "pixel_mean"},
    {BandKind::voxel_top, "voxel_top"},
    {BandKind::voxel_bottom, "voxel_bottom"},
    {BandKind::density, "density"},
    {BandKind::stdev, "stdev"},
    {BandKind::echoes, "echoes"},
    {BandKind::sem1, "sem1"},
    {BandKind::sem2_ground, "sem2_ground"},
    {BandKind::sem2_nonground, "sem2_nonground"},
    {BandKind::dtm, "dtm"},
}};

[[nodiscard]] inline std::optional<BandKind> band_from_string(std::string_view name) {
    for (const auto& [kind, text] : kBandNames) {
        if (text == name) return kind;
    }
    return std::nullopt;
}

[[nodiscard]] constexpr std::string_view to_string(BandKind kind) {
    for (const auto& [k, text] : kBandNames) {
        if (k == kind) return text;
    }
    return "custom";
}

[[nodiscard]] constexpr bool is_semantic(BandKind k) {
    return k == BandKind::sem1 || k == BandKind::sem2_ground || k == BandKind::sem2_nonground;
}

/// Single float band over a GridSpec; stored row-major north to south.
class RasterGrid {
public:
    RasterGrid() = default;

    RasterGrid(GridSpec spec, BandKind kind, float fill, std::string custom_name = {})
        : spec_(std::move(spec)), kind_(kind), custom_name_(std::move(custom_name)) {
        spec_.validate();
        values_.assign(spec_.cell_count(), fill);
        check_name();
    }

    RasterGrid(GridSpec spec, BandKind kind, std::vector<float> values, std::string custom_name = {})
        : spec_(std::move(spec)), values_(std::move(values)), kind_(kind), custom_name_(std::move(custom_name)) {
        spec_.validate();
        if (values_.size() != spec_.cell_count()) {
            throw Error(ErrorCode::SpecMismatch, "value count " + std::to_string(values_.size()) + " != width*height " +
                                                     std::to_string(spec_.cell_count()));
        }
        check_name();
    }

    [[nodiscard]] const GridSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] BandKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::string name() const { return kind_ == BandKind::custom ? custom_name_ : std::string(to_string(kind_)); }
    [[nodiscard]] std::size_t width() const noexcept { return spec_.width; }
    [[nodiscard]] std::size_t height() const noexcept { return spec_.height; }
    [[nodiscard]] float nodata() const noexcept { return spec_.nodata; }

    [[nodiscard]] float operator()(std::size_t row, std::size_t col) const { return values_[row * spec_.width + col]; }
    [[nodiscard]] float& operator()(std::size_t row, std::size_t col) { return values_[row * spec_.width + col]; }
    [[nodiscard]] const std::vector<float>& values() const noexcept { return values_; }
    [[nodiscard]] std::vector<float>& values() noexcept { return values_; }

    [[nodiscard]] bool is_nodata(float v) const noexcept { return v == spec_.nodata || !std::isfinite(v); }
    [[nodiscard]] bool valid_at(std::size_t row, std::size_t col) const { return !is_nodata((*this)(row, col)); }

    [[nodiscard]] RasterGrid renamed(BandKind kind, std::string custom_name = {}) const {
        RasterGrid copy = *this;
        copy.kind_ = kind;
        copy.custom_name_ = std::move(custom_name);
        copy.check_name();
        return copy;
    }

    friend bool operator==(const RasterGrid& a, const RasterGrid& b) {
        return a.spec_ == b.spec_ && a.kind_ == b.kind_ && a.custom_name_ == b.custom_name_ &&
               a.values_.size() == b.values_.size() &&
               (a.values_.empty() || std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(float)) == 0);
    }

private:
    void check_name() const {
        if (kind_ == BandKind::custom && (custom_name_.empty() || band_from_string(custom_name_))) {
            throw Error(ErrorCode::InvalidArgument, "custom band needs a non-empty name distinct from built-in band names");
        }
    }

    GridSpec spec_;
    std::vector<float> values_;
    BandKind kind_ = BandKind::custom;
    std::string custom_name_ = "unnamed";
};

/// Ordered bands sharing one GridSpec; the order is the channel order.
class RasterStack {
public:
    RasterStack() = default;

    void push_back(RasterGrid band) {
        if (!bands_.empty()) {
            if (const auto diff = first_difference(bands_.front().spec(), band.spec()); !diff.empty()) {
                throw Error(ErrorCode::SpecMismatch, "band '" + band.name() + "' differs in " + diff);
            }
        }
        for (const auto& b : bands_) {
            if (b.name() == band.name()) throw Error(ErrorCode::InvalidArgument, "duplicate band name '" + band.name() + "'");
        }
        bands_.push_back(std::move(band));
    }

    [[nodiscard]] std::size_t size() const noexcept { return bands_.size(); }
    [[nodiscard]] bool empty() const noexcept { return bands_.empty(); }
    [[nodiscard]] const RasterGrid& operator[](std::size_t i) const { return bands_[i]; }
    [[nodiscard]] const std::vector<RasterGrid>& bands() const noexcept { return bands_; }
    [[nodiscard]] const GridSpec& spec() const {
        if (bands_.empty()) throw Error(ErrorCode::InvalidArgument, "empty stack has no grid spec");
        return bands_.front().spec();
    }

    [[nodiscard]] const RasterGrid* find(std::string_view name) const {
        for (const auto& b : bands_) {
            if (b.name() == name) return &b;
        }
        return nullptr;
    }
    [[nodiscard]] const RasterGrid& at(std::string_view name) const {
        if (const auto* b = find(name)) return *b;
        throw Error(ErrorCode::InvalidArgument, "stack has no band '" + std::string(name) + "'");
    }

    friend bool operator==(const RasterStack&, const RasterStack&) = default;

private:
    std::vector<RasterGrid> bands_;
};

/// Concatenates bands in the given order; all must share an identical GridSpec.
[[nodiscard]] inline RasterStack stack_bands(std::vector<RasterGrid> grids) {
    RasterStack stack;
    for (auto& g : grids) stack.push_back(std::move(g));
    return stack;
}

}  // namespace terrarast
