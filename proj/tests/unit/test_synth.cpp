#include <gtest/gtest.h>

#include <set>

#include "support/fixtures.hpp"

using namespace terrarast;

namespace {

SceneSpec canopy_scene() {
    SceneSpec s;
    s.seed = 11;
    s.width = 40;
    s.length = 40;
    s.point_density = 10;
    s.noise_sigma_z = 0.03;
    s.canopies.push_back({12, 12, 5, 12, 0.5, 3});
    s.canopies.push_back({28, 26, 4, 9, 0.5, 4});
    return s;
}

}  // namespace

TEST(Synth, FlatGridExample) {
    SceneSpec s;
    s.seed = 42;
    s.width = 10;
    s.length = 10;
    s.point_density = 1;
    const auto scene = generate(s);
    ASSERT_EQ(scene.cloud.size(), 100u);
    for (const auto& p : scene.cloud.points()) {
        EXPECT_EQ(p.z, 0.0);
        EXPECT_EQ(p.class_label, kGroundClass);
        EXPECT_GE(p.x, 0.0);
        EXPECT_LT(p.x, 10.0);
    }
}

TEST(Synth, SameSeedSameCloud) {
    const auto s = canopy_scene();
    EXPECT_EQ(generate(s).cloud, generate(s).cloud);
    auto t = s;
    t.seed = 12;
    EXPECT_FALSE(generate(s).cloud == generate(t).cloud);
}

TEST(Synth, GroundPointsWithinFourSigmaOfTruth) {
    auto s = canopy_scene();
    s.terrain.kind = TerrainSpec::Kind::fractal;
    s.boxes.push_back({30, 8, 5, 5, 3});
    const auto scene = generate(s);
    std::size_t ground = 0;
    for (const auto& p : scene.cloud.points()) {
        if (p.class_label != kGroundClass) continue;
        ++ground;
        ASSERT_LE(std::abs(p.z - scene.true_dtm(p.x, p.y)), 4 * s.noise_sigma_z + 1e-12);
    }
    EXPECT_GT(ground, scene.cloud.size() / 2);
    EXPECT_EQ(scene.labels.size(), scene.cloud.size());
}

TEST(Synth, CanopyColumnsHoldGroundLastEchoes) {
    const auto s = canopy_scene();
    const auto scene = generate(s);
    const auto spec = scene_grid(s, 0.5);
    std::set<std::size_t> footprint, with_ground;
    for (std::size_t r = 0; r < spec.height; ++r) {
        for (std::size_t c = 0; c < spec.width; ++c) {
            for (const auto& k : s.canopies) {
                if (std::hypot(spec.center_x(c) - k.cx, spec.center_y(r) - k.cy) < k.radius - 0.5) footprint.insert(r * spec.width + c);
            }
        }
    }
    for (const auto& p : scene.cloud.points()) {
        if (p.class_label == kGroundClass && p.echo_number == p.num_returns && p.num_returns > 1) {
            if (const auto cell = spec.cell_of(p.x, p.y); cell && footprint.count(*cell)) with_ground.insert(*cell);
        }
    }
    ASSERT_FALSE(footprint.empty());
    EXPECT_GE(double(with_ground.size()) / double(footprint.size()), 0.30);
}

TEST(Synth, BoxRoofsAndCanopyLabels) {
    SceneSpec s;
    s.width = 20;
    s.length = 20;
    s.point_density = 4;
    s.boxes.push_back({10, 10, 5, 5, 3});
    const auto scene = generate(s);
    for (const auto& p : scene.cloud.points()) {
        const bool inside = std::abs(p.x - 10) < 2.5 && std::abs(p.y - 10) < 2.5;
        if (p.class_label == kBuildingClass) {
            EXPECT_EQ(p.z, 3.0);
            EXPECT_LE(std::abs(p.x - 10), 2.5);
        } else {
            EXPECT_FALSE(inside);
        }
    }
    const auto canopy = generate(canopy_scene());
    std::size_t veg = 0;
    for (const auto& p : canopy.cloud.points()) {
        veg += p.class_label == kVegetationClass;
        ASSERT_GE(p.echo_number, 1);
        ASSERT_LE(p.echo_number, p.num_returns);
    }
    EXPECT_GT(veg, 0u);
}

TEST(Synth, FlatTruthMatchesTinOfGround) {
    SceneSpec s;
    s.seed = 2;
    s.width = 30;
    s.length = 30;
    s.point_density = 16;
    s.noise_sigma_z = 0.03;
    const auto scene = generate(s);
    GroundMask m;
    for (const auto& p : scene.cloud.points()) m.flags.push_back(p.class_label == kGroundClass);
    const auto spec = scene_grid(s, 0.25);
    const auto dtm = tin_to_dtm(delaunay(mask_to_dtm_points(scene.cloud, m)), spec);
    EXPECT_LE(dtm_rmse(dtm, truth_raster(scene.true_dtm, spec)), s.noise_sigma_z + 0.05);
}

TEST(Synth, FractalTerrainIsSmoothAndBounded) {
    TerrainSpec t;
    t.kind = TerrainSpec::Kind::fractal;
    t.amplitude = 5;
    const Terrain terrain(t, 9, 0);
    double lo = 1e9, hi = -1e9;
    for (double x = 0; x < 128; x += 0.5) {
        for (double y = 0; y < 128; y += 0.5) {
            const double z = terrain(x, y);
            lo = std::min(lo, z);
            hi = std::max(hi, z);
            EXPECT_LE(std::abs(terrain(x + 0.01, y) - z), 0.05);
        }
    }
    EXPECT_GE(lo, -5.0);
    EXPECT_LE(hi, 5.0);
    EXPECT_GT(hi - lo, 2.0);
}

TEST(Synth, SlopeTerrain) {
    TerrainSpec t;
    t.kind = TerrainSpec::Kind::slope;
    t.slope_degrees = 45;
    t.base = 1;
    const Terrain terrain(t, 0, 10);
    EXPECT_NEAR(terrain(15, 3), 6.0, 1e-12);
}

TEST(Synth, InvalidSpecs) {
    const auto bad = [](auto mutate) {
        SceneSpec s;
        mutate(s);
        try {
            (void)generate(s);
            return false;
        } catch (const Error& e) {
            return e.code() == ErrorCode::InvalidSpec;
        }
    };
    EXPECT_TRUE(bad([](SceneSpec& s) { s.point_density = 0; }));
    EXPECT_TRUE(bad([](SceneSpec& s) { s.width = -1; }));
    EXPECT_TRUE(bad([](SceneSpec& s) { s.boxes.push_back({9, 9, 5, 5, 3}); }));
    EXPECT_TRUE(bad([](SceneSpec& s) { s.canopies.push_back({5, 5, 1, 0, 0.5, 3}); }));
    EXPECT_TRUE(bad([](SceneSpec& s) { s.noise_sigma_z = -0.1; }));
}

TEST(Synth, SceneJson) {
    const auto j = nlohmann::json::parse(R"({
      "seed": 7, "extent": [64, 32],
      "terrain": {"type": "fractal", "octaves": 3, "amplitude": 2.5, "wavelength": 16},
      "objects": [
        {"type": "box", "center": [10, 10], "size": [5, 5, 3]},
        {"type": "canopy", "center": [40, 16], "radius": 4, "height": 12, "echo_profile": {"ground_prob": 0.6, "max_returns": 4}}
      ],
      "point_density": 9, "noise_sigma_z": 0.02})");
    const auto s = scene_from_json(j);
    EXPECT_EQ(s.seed, 7u);
    EXPECT_EQ(s.width, 64);
    EXPECT_EQ(s.terrain.octaves, 3u);
    ASSERT_EQ(s.boxes.size(), 1u);
    ASSERT_EQ(s.canopies.size(), 1u);
    EXPECT_EQ(s.canopies[0].max_returns, 4u);
    EXPECT_THROW((void)scene_from_json(nlohmann::json::parse(R"({"extent": [10, 10], "terrain": {"type": "alps"}})")), Error);
    EXPECT_THROW((void)scene_from_json(nlohmann::json::parse(R"({"seed": 1})")), Error);
}

TEST(Synth, CounterHashIsStable) {
    EXPECT_EQ(synth_detail::hash3(1, 2, 3), synth_detail::hash3(1, 2, 3));
    EXPECT_NE(synth_detail::hash3(1, 2, 3), synth_detail::hash3(1, 3, 2));
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const double u = synth_detail::uniform(5, i, 0);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LE(std::abs(synth_detail::normal(5, i, 1)), 4.0);
    }
}
