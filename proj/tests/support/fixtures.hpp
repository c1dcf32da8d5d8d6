#pragma once

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "terrarast/terrarast.hpp"

namespace fixtures {

using namespace terrarast;

inline PointRecord pt(double x, double y, double z, std::uint8_t echo = 1, std::uint8_t returns = 1, std::uint8_t cls = 0) {
    PointRecord p;
    p.x = x;
    p.y = y;
    p.z = z;
    p.echo_number = echo;
    p.num_returns = returns;
    p.class_label = cls;
    return p;
}

/// One-cell grid covering [0, 1) x (0, 1].
inline GridSpec unit_cell(double voxel = 0.25) {
    GridSpec s;
    s.origin_x = 0;
    s.origin_y = 1;
    s.cell_size = 1;
    s.width = 1;
    s.height = 1;
    s.voxel_size_z = voxel;
    return s;
}

inline PointCloud shuffled(const PointCloud& c, std::uint64_t seed, std::vector<std::size_t>* perm_out = nullptr) {
    std::vector<std::size_t> perm(c.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<PointRecord> pts;
    for (const auto i : perm) pts.push_back(c[i]);
    if (perm_out) *perm_out = perm;
    return PointCloud(std::move(pts), c.crs_tag());
}

inline std::vector<std::pair<double, double>> four_box_centres() { return {{15, 15}, {40, 20}, {25, 45}, {48, 48}}; }

/// 60 x 60 m test scene at 9 pts/m^2: flat, or flat with four 5 x 5 x 3 m boxes.
inline SceneSpec filter_scene(bool boxes, double slope_degrees = 0.0) {
    SceneSpec s;
    s.seed = 3;
    s.width = 60;
    s.length = 60;
    s.point_density = 9;
    s.noise_sigma_z = 0.02;
    if (slope_degrees != 0.0) {
        s.terrain.kind = TerrainSpec::Kind::slope;
        s.terrain.slope_degrees = slope_degrees;
    }
    if (boxes) {
        for (const auto& [x, y] : four_box_centres()) s.boxes.push_back({x, y, 5, 5, 3});
    }
    return s;
}

struct SceneScore {
    double ground_recall = 1.0;
    double roof_rejection = 1.0;
};

inline SceneScore score(const Scene& scene, const GroundMask& mask) {
    std::size_t g = 0, g_hit = 0, o = 0, o_hit = 0;
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        if (scene.labels[i] == kGroundClass) {
            ++g;
            g_hit += mask.flags[i];
        } else {
            ++o;
            o_hit += !mask.flags[i];
        }
    }
    return {g ? double(g_hit) / double(g) : 1.0, o ? double(o_hit) / double(o) : 1.0};
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("terrarast_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline RasterGrid random_grid(std::mt19937_64& rng, const GridSpec& spec, BandKind kind, double lo, double hi, double nodata_frac = 0.0) {
    std::uniform_real_distribution<double> u(lo, hi), f(0.0, 1.0);
    RasterGrid g(spec, kind, 0.0f);
    for (auto& v : g.values()) v = f(rng) < nodata_frac ? spec.nodata : static_cast<float>(u(rng));
    return g;
}

}  // namespace fixtures
