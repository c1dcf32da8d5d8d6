#pragma once

// Deterministic synthetic ALS scenes.
//
// Sampling: the extent is split into nx * ny pulse cells with nx = round(width * sqrt(density)),
// ny = round(length * sqrt(density)); pulse k = row * nx + col fires once at a jittered position
// inside its cell (cell centre when jitter is off). Every random draw is counter-based:
// u(seed, k, stream) = splitmix64 chain over (seed, k, stream), so any pulse can be generated
// independently of the others.
//
// Terrain
//   flat      z = base
//   slope     z = base + tan(degrees) * (x - origin_x)
//   fractal   z = base + amplitude * sum_o 0.5^o * v(x * 2^o / wavelength, y * 2^o / wavelength, o) / sum_o 0.5^o
//             v = bilinear value noise over integer lattice values in [-1, 1] with smoothstep weights
//
// Objects (first hit wins, boxes before canopies, in list order)
//   box      flat roof at terrain(centre) + h over an axis-aligned w x l footprint; class 6, single return
//   canopy   crown of radius r: first echo on a dome reaching terrain + h, class 5; with probability
//            ground_prob the pulse also reaches the ground as its last echo (class 2); up to
//            max_returns - 2 intermediate class-5 echoes between them
// Open ground pulses return once at the terrain, class 2. Vertical noise is Gaussian with
// sigma noise_sigma_z, truncated at 4 sigma.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "terrarast/error.hpp"
#include "terrarast/fileio.hpp"
#include "terrarast/grid.hpp"
#include "terrarast/pointcloud.hpp"

namespace terrarast {

inline constexpr std::uint8_t kVegetationClass = 5;
inline constexpr std::uint8_t kBuildingClass = 6;

namespace synth_detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

/// Uniform in [0, 1).
inline double uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
    return static_cast<double>(hash3(seed, index, stream) >> 11) * 0x1.0p-53;
}

/// Standard normal by Box-Muller from two streams.
inline double normal(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
    const double u1 = 1.0 - uniform(seed, index, stream);
    const double u2 = uniform(seed, index, stream + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace synth_detail

struct TerrainSpec {
    enum class Kind { flat, slope, fractal };
    Kind kind = Kind::flat;
    double base = 0.0;
    double slope_degrees = 0.0;
    unsigned octaves = 4;
    double amplitude = 5.0;
    double wavelength = 32.0;
};

struct BoxSpec {
    double cx = 0, cy = 0;
    double w = 5, l = 5, h = 3;
};

struct CanopySpec {
    double cx = 0, cy = 0;
    double radius = 3;
    double height = 10;
    double ground_prob = 0.5;
    unsigned max_returns = 3;
};

struct SceneSpec {
    std::uint64_t seed = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double width = 10.0;
    double length = 10.0;
    TerrainSpec terrain;
    std::vector<BoxSpec> boxes;
    std::vector<CanopySpec> canopies;
    double point_density = 1.0;
    double noise_sigma_z = 0.0;
    bool jitter = true;

    void validate() const {
        const auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidSpec, m); };
        if (!(width > 0.0) || !(length > 0.0)) bad("extent must be positive");
        if (!(point_density > 0.0) || !std::isfinite(point_density)) bad("point_density must be > 0");
        if (!(noise_sigma_z >= 0.0)) bad("noise_sigma_z must be >= 0");
        if (terrain.kind == TerrainSpec::Kind::slope && !(std::abs(terrain.slope_degrees) < 90.0)) bad("slope must be in (-90, 90) degrees");
        if (terrain.kind == TerrainSpec::Kind::fractal) {
            if (terrain.octaves < 1 || terrain.octaves > 16) bad("fractal octaves must be in 1..16");
            if (!(terrain.wavelength > 0.0)) bad("fractal wavelength must be > 0");
            if (!(terrain.amplitude >= 0.0)) bad("fractal amplitude must be >= 0");
        }
        const auto inside = [&](double x0, double y0, double x1, double y1) {
            return x0 >= origin_x && y0 >= origin_y && x1 <= origin_x + width && y1 <= origin_y + length;
        };
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            const auto& b = boxes[i];
            if (!(b.w > 0 && b.l > 0 && b.h > 0)) bad("box " + std::to_string(i) + " needs positive w, l, h");
            if (!inside(b.cx - b.w / 2, b.cy - b.l / 2, b.cx + b.w / 2, b.cy + b.l / 2)) bad("box " + std::to_string(i) + " footprint leaves the extent");
        }
        for (std::size_t i = 0; i < canopies.size(); ++i) {
            const auto& c = canopies[i];
            if (!(c.radius > 0 && c.height > 0)) bad("canopy " + std::to_string(i) + " needs positive radius and height");
            if (!(c.ground_prob >= 0.0 && c.ground_prob <= 1.0)) bad("canopy " + std::to_string(i) + " ground_prob must be in [0, 1]");
            if (c.max_returns < 2 || c.max_returns > 7) bad("canopy " + std::to_string(i) + " max_returns must be in 2..7");
            if (!inside(c.cx - c.radius, c.cy - c.radius, c.cx + c.radius, c.cy + c.radius)) {
                bad("canopy " + std::to_string(i) + " footprint leaves the extent");
            }
        }
    }
};

/// True bare-earth elevation of a scene.
class Terrain {
public:
    Terrain(TerrainSpec spec, std::uint64_t seed, double origin_x) : spec_(spec), seed_(seed), origin_x_(origin_x) {}

    [[nodiscard]] double operator()(double x, double y) const {
        switch (spec_.kind) {
            case TerrainSpec::Kind::flat: return spec_.base;
            case TerrainSpec::Kind::slope: return spec_.base + std::tan(spec_.slope_degrees * std::numbers::pi / 180.0) * (x - origin_x_);
            case TerrainSpec::Kind::fractal: break;
        }
        double sum = 0.0, norm = 0.0, amp = 1.0, freq = 1.0 / spec_.wavelength;
        for (unsigned o = 0; o < spec_.octaves; ++o) {
            sum += amp * value_noise(x * freq, y * freq, o);
            norm += amp;
            amp *= 0.5;
            freq *= 2.0;
        }
        return spec_.base + spec_.amplitude * sum / norm;
    }

private:
    [[nodiscard]] double lattice(long long i, long long j, unsigned octave) const {
        const auto key = (static_cast<std::uint64_t>(i) << 32) ^ static_cast<std::uint64_t>(j & 0xFFFFFFFFll);
        return 2.0 * synth_detail::uniform(seed_ ^ 0xC0FFEEull, key, 1000 + octave) - 1.0;
    }

    [[nodiscard]] double value_noise(double u, double v, unsigned octave) const {
        const double fu = std::floor(u), fv = std::floor(v);
        const auto i = static_cast<long long>(fu), j = static_cast<long long>(fv);
        const auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
        const double tu = smooth(u - fu), tv = smooth(v - fv);
        const double a = lattice(i, j, octave), b = lattice(i + 1, j, octave);
        const double c = lattice(i, j + 1, octave), d = lattice(i + 1, j + 1, octave);
        return (a * (1 - tu) + b * tu) * (1 - tv) + (c * (1 - tu) + d * tu) * tv;
    }

    TerrainSpec spec_;
    std::uint64_t seed_;
    double origin_x_;
};

struct Scene {
    PointCloud cloud;
    Terrain true_dtm;
    std::vector<std::uint8_t> labels;  ///< ground-truth class per point
};

[[nodiscard]] inline Scene generate(const SceneSpec& spec) {
    using namespace synth_detail;
    spec.validate();
    const Terrain terrain(spec.terrain, spec.seed, spec.origin_x);
    const double per_axis = std::sqrt(spec.point_density);
    const auto nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.width * per_axis)));
    const auto ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.length * per_axis)));
    const double sx = spec.width / static_cast<double>(nx), sy = spec.length / static_cast<double>(ny);
    const double sigma = spec.noise_sigma_z;
    const std::uint64_t seed = spec.seed;

    enum Stream : std::uint64_t { kJx = 0, kJy = 1, kGround = 2, kExtra = 3, kDepth = 4, kNoise = 16 };
    std::vector<double> roof(spec.boxes.size());
    for (std::size_t b = 0; b < spec.boxes.size(); ++b) roof[b] = terrain(spec.boxes[b].cx, spec.boxes[b].cy) + spec.boxes[b].h;

    std::vector<PointRecord> pts;
    pts.reserve(nx * ny + nx * ny / 4);
    for (std::size_t r = 0; r < ny; ++r) {
        for (std::size_t c = 0; c < nx; ++c) {
            const std::uint64_t k = r * nx + c;
            const double jx = spec.jitter ? uniform(seed, k, kJx) : 0.5;
            const double jy = spec.jitter ? uniform(seed, k, kJy) : 0.5;
            const double x = spec.origin_x + (static_cast<double>(c) + jx) * sx;
            const double y = spec.origin_y + (static_cast<double>(r) + jy) * sy;
            std::uint64_t noise_stream = kNoise;
            const auto noisy = [&](double z) {
                if (sigma == 0.0) return z;
                const double n = std::clamp(normal(seed, k, noise_stream), -4.0, 4.0);
                noise_stream += 2;
                return z + sigma * n;
            };
            const double g = terrain(x, y);

            bool hit = false;
            for (std::size_t b = 0; b < spec.boxes.size() && !hit; ++b) {
                const auto& bx = spec.boxes[b];
                if (std::abs(x - bx.cx) <= bx.w / 2 && std::abs(y - bx.cy) <= bx.l / 2) {
                    pts.push_back({x, y, noisy(roof[b]), 0, 1, 1, kBuildingClass});
                    hit = true;
                }
            }
            for (std::size_t t = 0; t < spec.canopies.size() && !hit; ++t) {
                const auto& cp = spec.canopies[t];
                const double d = std::hypot(x - cp.cx, y - cp.cy);
                if (d > cp.radius) continue;
                hit = true;
                const double crown = g + cp.height * (0.6 + 0.4 * std::sqrt(std::max(0.0, 1.0 - (d / cp.radius) * (d / cp.radius))));
                const bool reaches = uniform(seed, k, kGround) < cp.ground_prob;
                const unsigned slots = cp.max_returns - (reaches ? 2u : 1u);
                const auto extra = static_cast<unsigned>(uniform(seed, k, kExtra) * (slots + 1));
                const unsigned n = 1 + extra + (reaches ? 1 : 0);
                const auto n8 = static_cast<std::uint8_t>(n);
                pts.push_back({x, y, noisy(crown), 0, 1, n8, kVegetationClass});
                double z = crown;
                for (unsigned e = 0; e < extra; ++e) {
                    z -= (z - g) * (0.2 + 0.5 * uniform(seed, k, kDepth + e));
                    pts.push_back({x, y, noisy(z), 0, static_cast<std::uint8_t>(2 + e), n8, kVegetationClass});
                }
                if (reaches) pts.push_back({x, y, noisy(g), 0, n8, n8, kGroundClass});
            }
            if (!hit) pts.push_back({x, y, noisy(g), 0, 1, 1, kGroundClass});
        }
    }
    std::vector<std::uint8_t> labels(pts.size());
    std::transform(pts.begin(), pts.end(), labels.begin(), [](const PointRecord& p) { return p.class_label; });
    return {PointCloud(std::move(pts)), terrain, std::move(labels)};
}

/// Extent of the scene as a flat bounding box (z range unset).
[[nodiscard]] inline BoundingBox scene_extent(const SceneSpec& s) {
    return {s.origin_x, s.origin_y, 0.0, s.origin_x + s.width, s.origin_y + s.length, 0.0};
}

/// Grid exactly covering the scene extent: origin at its north-west corner, cells of
/// `cell_size` (the extent is rounded up to whole cells).
[[nodiscard]] inline GridSpec scene_grid(const SceneSpec& s, double cell_size, double voxel_size_z = 0.25) {
    GridSpec g;
    g.origin_x = s.origin_x;
    g.origin_y = s.origin_y + s.length;
    g.cell_size = cell_size;
    g.voxel_size_z = voxel_size_z;
    g.width = static_cast<std::size_t>(std::ceil(s.width / cell_size - 1e-9));
    g.height = static_cast<std::size_t>(std::ceil(s.length / cell_size - 1e-9));
    g.validate();
    return g;
}

/// True terrain sampled at cell centres.
[[nodiscard]] inline RasterGrid truth_raster(const Terrain& t, const GridSpec& spec) {
    RasterGrid out(spec, BandKind::dtm, 0.0f);
    for (std::size_t r = 0; r < spec.height; ++r) {
        for (std::size_t c = 0; c < spec.width; ++c) out(r, c) = static_cast<float>(t(spec.center_x(c), spec.center_y(r)));
    }
    return out;
}

[[nodiscard]] inline SceneSpec scene_from_json(const nlohmann::json& j) {
    try {
        SceneSpec s;
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("origin")) {
            s.origin_x = j["origin"].at(0).get<double>();
            s.origin_y = j["origin"].at(1).get<double>();
        }
        if (!j.contains("extent")) throw Error(ErrorCode::InvalidSpec, "scene needs 'extent': [width, length]");
        s.width = j["extent"].at(0).get<double>();
        s.length = j["extent"].at(1).get<double>();
        s.point_density = j.value("point_density", 1.0);
        s.noise_sigma_z = j.value("noise_sigma_z", 0.0);
        s.jitter = j.value("jitter", true);
        if (j.contains("terrain")) {
            const auto& t = j["terrain"];
            const auto type = t.value("type", std::string("flat"));
            s.terrain.base = t.value("base", 0.0);
            if (type == "flat") {
                s.terrain.kind = TerrainSpec::Kind::flat;
            } else if (type == "slope") {
                s.terrain.kind = TerrainSpec::Kind::slope;
                s.terrain.slope_degrees = t.at("degrees").get<double>();
            } else if (type == "fractal") {
                s.terrain.kind = TerrainSpec::Kind::fractal;
                s.terrain.octaves = t.value("octaves", 4u);
                s.terrain.amplitude = t.value("amplitude", 5.0);
                s.terrain.wavelength = t.value("wavelength", 32.0);
            } else {
                throw Error(ErrorCode::InvalidSpec, "unknown terrain type '" + type + "'");
            }
        }
        for (const auto& o : j.value("objects", nlohmann::json::array())) {
            const auto type = o.at("type").get<std::string>();
            if (type == "box") {
                BoxSpec b;
                b.cx = o.at("center").at(0).get<double>();
                b.cy = o.at("center").at(1).get<double>();
                b.w = o.at("size").at(0).get<double>();
                b.l = o.at("size").at(1).get<double>();
                b.h = o.at("size").at(2).get<double>();
                s.boxes.push_back(b);
            } else if (type == "canopy") {
                CanopySpec c;
                c.cx = o.at("center").at(0).get<double>();
                c.cy = o.at("center").at(1).get<double>();
                c.radius = o.at("radius").get<double>();
                c.height = o.at("height").get<double>();
                if (o.contains("echo_profile")) {
                    c.ground_prob = o["echo_profile"].value("ground_prob", c.ground_prob);
                    c.max_returns = o["echo_profile"].value("max_returns", c.max_returns);
                }
                s.canopies.push_back(c);
            } else {
                throw Error(ErrorCode::InvalidSpec, "unknown object type '" + type + "'");
            }
        }
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("scene JSON: ") + e.what());
    }
}

[[nodiscard]] inline SceneSpec read_scene(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return scene_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

}  // namespace terrarast
