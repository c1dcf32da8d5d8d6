#include <gtest/gtest.h>

#include <bit>
#include <fstream>
#include <functional>
#include <random>

#include "support/fixtures.hpp"

using namespace terrarast;

namespace {

RasterStack six_band_stack(std::mt19937_64& rng) {
    GridSpec s;
    s.origin_x = 481000.25;
    s.origin_y = 5444000.75;
    s.width = 1 + rng() % 40;
    s.height = 1 + rng() % 40;
    s.crs_tag = "EPSG:26910";
    std::vector<RasterGrid> bands;
    for (const auto* name : {"pixel_mean", "voxel_top", "voxel_bottom", "density", "stdev", "echoes"}) {
        bands.push_back(fixtures::random_grid(rng, s, *band_from_string(name), -50, 50, 0.2));
    }
    return stack_bands(std::move(bands));
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::Io;
}

}  // namespace

TEST(Dtr, EmptyStackRoundTrip) {
    const auto enc = encode_stack(RasterStack{});
    EXPECT_TRUE(enc.payload.empty());
    EXPECT_TRUE(decode_stack(enc.sidecar, enc.payload).empty());
}

TEST(Dtr, NodataAndNanBitsPreserved) {
    GridSpec s;
    s.width = 3;
    s.height = 1;
    s.nodata = -3.4e38f;
    const float qnan = std::bit_cast<float>(0x7fc00123u);
    const auto st = stack_bands({RasterGrid(s, BandKind::voxel_bottom, std::vector<float>{s.nodata, qnan, -0.0f})});
    const auto enc = encode_stack(st);
    const auto back = decode_stack(enc.sidecar, enc.payload);
    EXPECT_TRUE(back == st);
    EXPECT_EQ(std::bit_cast<std::uint32_t>(back[0].values()[1]), 0x7fc00123u);
    EXPECT_TRUE(std::signbit(back[0].values()[2]));
}

TEST(Dtr, SixBandByteIdenticalReserialization) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
        const auto st = six_band_stack(rng);
        const auto enc = encode_stack(st);
        const auto back = decode_stack(enc.sidecar, enc.payload);
        ASSERT_TRUE(back == st);
        const auto again = encode_stack(back);
        EXPECT_EQ(again.sidecar, enc.sidecar);
        EXPECT_EQ(again.payload, enc.payload);
    }
}

TEST(Dtr, CustomBandNamesSurvive) {
    GridSpec s;
    const auto st = stack_bands({RasterGrid(s, BandKind::custom, 1.0f, "ndvi"), RasterGrid(s, BandKind::dtm, 2.0f)});
    const auto enc = encode_stack(st);
    const auto back = decode_stack(enc.sidecar, enc.payload);
    EXPECT_EQ(back[0].name(), "ndvi");
    EXPECT_EQ(back[1].kind(), BandKind::dtm);
}

TEST(Dtr, EveryCorruptedPayloadByteIsDetected) {
    std::mt19937_64 rng(2);
    const auto st = six_band_stack(rng);
    const auto enc = encode_stack(st);
    for (std::size_t i = 0; i < enc.payload.size(); i += 1 + enc.payload.size() / 97) {
        auto bad = enc.payload;
        bad[i] ^= 0x10;
        EXPECT_EQ(code_of([&] { (void)decode_stack(enc.sidecar, bad); }), ErrorCode::ChecksumFailure) << i;
    }
}

TEST(Dtr, VersionTruncationAndJsonErrors) {
    std::mt19937_64 rng(3);
    const auto enc = encode_stack(six_band_stack(rng));
    auto side = enc.sidecar;
    side.replace(side.find("\"format_version\": 1"), 19, "\"format_version\": 2");
    EXPECT_EQ(code_of([&] { (void)decode_stack(side, enc.payload); }), ErrorCode::FormatVersionMismatch);
    auto shorter = enc.payload;
    shorter.pop_back();
    EXPECT_EQ(code_of([&] { (void)decode_stack(enc.sidecar, shorter); }), ErrorCode::TruncatedPayload);
    EXPECT_EQ(code_of([&] { (void)decode_stack("{not json", enc.payload); }), ErrorCode::ParseError);
}

TEST(Dtr, FilePairRoundTrip) {
    fixtures::TempDir dir("dtr");
    std::mt19937_64 rng(4);
    const auto st = six_band_stack(rng);
    write_stack(st, dir / "tile.dtr");
    EXPECT_TRUE(std::filesystem::exists(dir / "tile.dtr.json"));
    EXPECT_TRUE(read_stack(dir / "tile.dtr") == st);
    EXPECT_EQ(code_of([&] { (void)read_stack(dir / "missing.dtr"); }), ErrorCode::Io);
}

TEST(Manifest, FourQuartersSplitTwoOneOne) {
    std::vector<TileEntry> tiles;
    for (int i = 0; i < 4; ++i) tiles.push_back({"q" + std::to_string(i) + ".las", "q" + std::to_string(i) + ".dtr", std::nullopt});
    const auto m = make_manifest(tiles, 42);
    std::map<Split, int> n;
    for (const auto& t : m.tiles) ++n[*t.split];
    EXPECT_EQ(n[Split::train], 2);
    EXPECT_EQ(n[Split::val], 1);
    EXPECT_EQ(n[Split::test], 1);
    const auto again = make_manifest(tiles, 42);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(m.tiles[i].split, again.tiles[i].split);
}

TEST(Manifest, SeedsChangeAssignment) {
    std::vector<TileEntry> tiles;
    for (int i = 0; i < 20; ++i) tiles.push_back({"t" + std::to_string(i), "", std::nullopt});
    std::set<std::vector<int>> seen;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::vector<int> v;
        for (const auto& t : make_manifest(tiles, seed).tiles) v.push_back(static_cast<int>(*t.split));
        seen.insert(v);
    }
    EXPECT_GT(seen.size(), 1u);
}

TEST(Manifest, PresetSplitsKeptAndDuplicatesRejected) {
    const auto m = make_manifest({{"a", "", Split::test}, {"b", "", std::nullopt}}, 1);
    EXPECT_EQ(*m.tiles[0].split, Split::test);
    EXPECT_EQ(code_of([] { (void)make_manifest({{"a", "", std::nullopt}, {"a", "", std::nullopt}}, 1); }), ErrorCode::DuplicateTile);
}

TEST(Manifest, FileRoundTripIsIdentical) {
    fixtures::TempDir dir("manifest");
    std::vector<TileEntry> tiles;
    for (int i = 0; i < 7; ++i) tiles.push_back({"c" + std::to_string(i) + ".las", "d" + std::to_string(i) + ".dtr", std::nullopt});
    const auto m = make_manifest(tiles, 9);
    write_manifest(m, dir / "m.json");
    const auto back = read_manifest(dir / "m.json");
    EXPECT_EQ(to_json(back), to_json(m));
    std::ofstream(dir / "bad.json") << "{\"tiles\": [{\"cloud_path\": \"x\", \"split\": \"holdout\"}]}";
    EXPECT_EQ(code_of([&] { (void)read_manifest(dir / "bad.json"); }), ErrorCode::ParseError);
}

TEST(Mask, RoundTripAndErrors) {
    GroundMask m;
    for (int i = 0; i < 37; ++i) m.flags.push_back(i % 3 == 0);
    const auto bytes = encode_mask(m);
    EXPECT_EQ(bytes.size(), 16u + 37u);
    EXPECT_EQ(decode_mask(bytes), m);
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_EQ(code_of([&] { (void)decode_mask(bad); }), ErrorCode::CorruptHeader);
    bad = bytes;
    bad[4] = 2;
    EXPECT_EQ(code_of([&] { (void)decode_mask(bad); }), ErrorCode::FormatVersionMismatch);
    bad = bytes;
    bad.pop_back();
    EXPECT_EQ(code_of([&] { (void)decode_mask(bad); }), ErrorCode::TruncatedPayload);
}

TEST(Toml, SubsetParses) {
    const auto j = parse_toml(R"(# run config
[pipeline]
filter = "pmf"   # trailing comment
cell_size = 0.25
downsample = 4
ground_codes = [2, 8]
bands = ["voxel_top", "density"]

[pmf]
slope = 30.0
window_growth = "exponential"

[csf.extra]
flag = true
)");
    EXPECT_EQ(j["pipeline"]["filter"], "pmf");
    EXPECT_EQ(j["pipeline"]["downsample"], 4);
    EXPECT_EQ(j["pipeline"]["ground_codes"][1], 8);
    EXPECT_EQ(j["pmf"]["slope"], 30.0);
    EXPECT_EQ(j["csf"]["extra"]["flag"], true);
    const auto c = pipeline_config(j);
    EXPECT_EQ(c.filter, "pmf");
    EXPECT_EQ(c.ground_codes, (GroundCodes{2, 8}));
    EXPECT_EQ(c.bands.size(), 2u);
    EXPECT_EQ(pmf_params(j).slope, 30.0);
}

TEST(Toml, ErrorsNameTheLine) {
    for (const char* bad : {"a = 1\na = 2\n", "a = 1\n[oops\n", "a = 1\nnovalue\n", "a = 1\nb = \"open\n"}) {
        try {
            (void)parse_toml(bad);
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ParseError);
            EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
        }
    }
}

TEST(Config, DefaultsAndValidation) {
    const auto empty = nlohmann::json::object();
    const auto pmf = pmf_params(empty);
    EXPECT_EQ(pmf.cell, 1.0);
    EXPECT_EQ(pmf.max_window, 33.0);
    EXPECT_EQ(pmf.initial_distance, 0.15);
    EXPECT_EQ(pmf.max_distance, 2.5);
    const auto smrf = smrf_params(empty);
    EXPECT_EQ(smrf.max_window, 18.0);
    EXPECT_EQ(smrf.elevation_scalar, 1.25);
    EXPECT_EQ(smrf.slope_tolerance, 0.15);
    const auto csf = csf_params(empty);
    EXPECT_EQ(csf.cloth_resolution, 0.5);
    EXPECT_EQ(csf.rigidness, 3u);
    EXPECT_EQ(csf.time_step, 0.65);
    EXPECT_EQ(csf.iterations, 500u);
    EXPECT_EQ(csf.class_threshold, 0.5);
    EXPECT_EQ(code_of([] { (void)pmf_params(parse_toml("[pmf]\nwindow = 3\n")); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { (void)pmf_params(parse_toml("[pmf]\nwindow_growth = \"linear\"\n")); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { (void)csf_params(parse_toml("[csf]\nrigidness = 4\n")); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { (void)pmf_params(parse_toml("[pmf]\ninitial_distance = 3.0\n")); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { (void)pipeline_config(parse_toml("[pipeline]\ncell_size = \"big\"\n")); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { (void)run_filter("mcc", PointCloud(), nlohmann::json::object()); }), ErrorCode::InvalidArgument);
}

TEST(FileIo, AtomicWriteLeavesNoTemp) {
    fixtures::TempDir dir("atomic");
    write_file_atomic(dir / "out.txt", std::string_view("hello"));
    write_file_atomic(dir / "out.txt", std::string_view("hello again"));
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++n;
    EXPECT_EQ(n, 1u);
    const auto b = read_file_bytes(dir / "out.txt");
    EXPECT_EQ(std::string(b.begin(), b.end()), "hello again");
}
