#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace terrarast;
using fixtures::pt;

namespace {

PointCloud grid_cloud(std::size_t n, double step) {
    std::vector<PointRecord> pts;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) pts.push_back(pt(double(i) * step, double(j) * step, double(i + j)));
    }
    return PointCloud(std::move(pts));
}

}  // namespace

TEST(PointCloud, BoundsAreTight) {
    std::mt19937_64 rng(11);
    const auto c = oracle::random_cloud(rng, 500, 37.0);
    const auto& b = *c.bounds();
    bool hx0 = false, hx1 = false, hy0 = false, hy1 = false, hz0 = false, hz1 = false;
    for (const auto& p : c.points()) {
        EXPECT_TRUE(p.x >= b.min_x && p.x <= b.max_x && p.y >= b.min_y && p.y <= b.max_y && p.z >= b.min_z && p.z <= b.max_z);
        hx0 |= p.x == b.min_x;
        hx1 |= p.x == b.max_x;
        hy0 |= p.y == b.min_y;
        hy1 |= p.y == b.max_y;
        hz0 |= p.z == b.min_z;
        hz1 |= p.z == b.max_z;
    }
    EXPECT_TRUE(hx0 && hx1 && hy0 && hy1 && hz0 && hz1);
}

TEST(PointCloud, EmptyHasNoBounds) { EXPECT_FALSE(PointCloud().bounds().has_value()); }

TEST(PointCloud, RejectsInvalidRecords) {
    EXPECT_THROW(PointCloud({pt(0, 0, std::nan(""))}), Error);
    EXPECT_THROW(PointCloud({pt(0, 0, 0, 3, 2)}), Error);
    EXPECT_THROW(PointCloud({pt(0, 0, 0, 0, 1)}), Error);
}

TEST(Crop, FullBoundsPlusEpsilonIsIdentity) {
    std::mt19937_64 rng(5);
    const auto c = oracle::random_cloud(rng, 300, 10.0);
    auto b = *c.bounds();
    b.max_x += 1e-9;
    b.max_y += 1e-9;
    EXPECT_EQ(crop(c, b), c);
}

TEST(Crop, QuartersPartitionTheCloud) {
    std::mt19937_64 rng(6);
    const auto c = oracle::random_cloud(rng, 4000, 1000.0);
    const auto tiles = tile_regions(*c.bounds(), 2);
    ASSERT_EQ(tiles.size(), 4u);
    std::vector<PointRecord> all;
    for (const auto& t : tiles) {
        const auto part = crop(c, t);
        all.insert(all.end(), part.points().begin(), part.points().end());
    }
    std::vector<PointRecord> orig(c.points().begin(), c.points().end());
    const CanonicalPointLess less;
    std::sort(all.begin(), all.end(), less);
    std::sort(orig.begin(), orig.end(), less);
    EXPECT_EQ(all, orig);
}

TEST(Crop, SharedEdgeGoesToExactlyOneTile) {
    const auto c = grid_cloud(9, 1.0);  // points land on tile edges
    for (const std::size_t n : {2u, 3u, 4u}) {
        std::size_t total = 0;
        for (const auto& t : tile_regions(*c.bounds(), n)) total += crop(c, t).size();
        EXPECT_EQ(total, c.size()) << n;
    }
}

TEST(Crop, RejectsInvertedRegion) {
    EXPECT_THROW((void)crop(grid_cloud(2, 1), BoundingBox{1, 0, 0, 0, 1, 0}), Error);
}

TEST(Las, OnePointFormat0ScaleExample) {
    const auto bytes = oracle::reference_las({{100, 200, 300}}, {pt(0, 0, 0)}, 0, 0.01, 0.0);
    const auto c = decode_las(bytes);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_DOUBLE_EQ(c[0].x, 1.0);
    EXPECT_DOUBLE_EQ(c[0].y, 2.0);
    EXPECT_DOUBLE_EQ(c[0].z, 3.0);
}

TEST(Las, DeclaredTenButEightOnDisk) {
    std::vector<std::array<std::int32_t, 3>> raw(8, {1, 2, 3});
    std::vector<PointRecord> attrs(8, pt(0, 0, 0));
    const auto bytes = oracle::reference_las(raw, attrs, 1, 0.01, 0.0, 10);
    try {
        (void)decode_las(bytes);
        FAIL() << "expected TruncatedPayload";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TruncatedPayload);
        EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
    }
}

TEST(Las, ReferenceAttributesDecode) {
    const auto bytes = oracle::reference_las({{-5, 7, 123456}}, {pt(0, 0, 0, 2, 3, 6)}, 1, 0.001, 1000.0);
    const auto c = decode_las(bytes);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_DOUBLE_EQ(c[0].x, -5 * 0.001 + 1000.0);
    EXPECT_EQ(c[0].echo_number, 2);
    EXPECT_EQ(c[0].num_returns, 3);
    EXPECT_EQ(c[0].class_label, 6);
}

TEST(Las, LazIsRejected) {
    fixtures::TempDir dir("laz");
    const auto p = dir / "tile.laz";
    write_las(PointCloud({pt(1, 2, 3)}), p);
    try {
        (void)read_las(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedFormat);
    }
    auto bytes = encode_las(PointCloud({pt(1, 2, 3)}));
    bytes[104] |= 0x80;
    try {
        (void)decode_las(bytes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsupportedFormat);
    }
}

TEST(Las, CorruptSignature) {
    auto bytes = encode_las(PointCloud({pt(1, 2, 3)}));
    bytes[0] = 'X';
    try {
        (void)decode_las(bytes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CorruptHeader);
    }
}

class LasRoundTrip : public ::testing::TestWithParam<std::pair<int, int>> {};

TEST_P(LasRoundTrip, QuantizedCloudSurvives) {
    const auto [format, minor] = GetParam();
    std::mt19937_64 rng(format * 10 + minor);
    std::uniform_int_distribution<int> q(-100000, 100000);
    std::vector<PointRecord> pts;
    for (int i = 0; i < 200; ++i) {
        auto p = pt(q(rng) * 0.01, q(rng) * 0.01, q(rng) * 0.01, 1, 1, static_cast<std::uint8_t>(rng() % 32));
        p.num_returns = static_cast<std::uint8_t>(1 + rng() % 7);
        p.echo_number = static_cast<std::uint8_t>(1 + rng() % p.num_returns);
        p.intensity = static_cast<std::uint16_t>(rng());
        pts.push_back(p);
    }
    const PointCloud c(pts);
    LasWriteOptions opt;
    opt.point_format = static_cast<std::uint8_t>(format);
    opt.version_minor = static_cast<std::uint8_t>(minor);
    const auto bytes = encode_las(c, opt);
    const auto back = decode_las(bytes);
    EXPECT_EQ(back, c);
    EXPECT_EQ(encode_las(back, opt), bytes);
}

INSTANTIATE_TEST_SUITE_P(Formats, LasRoundTrip, ::testing::Values(std::pair{0, 2}, std::pair{1, 2}, std::pair{3, 3}, std::pair{6, 4}));

TEST(Las, FileRoundTrip) {
    fixtures::TempDir dir("las");
    const PointCloud c({pt(1.25, -3.5, 100.75, 1, 2, 2), pt(2, 2, 2)});
    write_las(c, dir / "a.las");
    EXPECT_EQ(read_las(dir / "a.las"), c);
}

TEST(Ascii, DefaultFill) {
    const auto c = parse_ascii("1.0 2.0 3.0");
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0], pt(1, 2, 3));
    EXPECT_EQ(c[0].intensity, 0);
}

TEST(Ascii, CommentAndFullRecord) {
    const auto c = parse_ascii("# comment\n0 0 0 5 2 3 6");
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].intensity, 5);
    EXPECT_EQ(c[0].echo_number, 2);
    EXPECT_EQ(c[0].num_returns, 3);
    EXPECT_EQ(c[0].class_label, 6);
}

TEST(Ascii, CrLfAndBlankLines) {
    EXPECT_EQ(parse_ascii("1 2 3\r\n\r\n4 5 6\r\n").size(), 2u);
}

TEST(Ascii, ErrorsCarryLineNumbers) {
    for (const char* bad : {"1 2 3\n1 2\n", "1 2 3\n1 2 x\n", "1 2 3\n0 0 0 0 4 3 2\n"}) {
        try {
            (void)parse_ascii(bad);
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ParseError);
            EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
        }
    }
}

TEST(Ascii, FormatParseRoundTrip) {
    std::mt19937_64 rng(8);
    const auto c = oracle::random_cloud(rng, 300, 123.456);
    EXPECT_EQ(parse_ascii(format_ascii(c)), c);
}
