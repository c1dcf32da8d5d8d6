// terrarast: batch command-line driver.
//
// Exit codes: 0 success, 2 usage, 3 input format, 4 numeric failure.
// Logs are JSON lines on stderr. Every output file is written via temp file + rename.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "terrarast/terrarast.hpp"

namespace fs = std::filesystem;
using namespace terrarast;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidArgument: return kExitUsage;
        case ErrorCode::EmptyCloud:
        case ErrorCode::TooFewPoints:
        case ErrorCode::DegenerateInput:
        case ErrorCode::EmptyOverlap: return kExitNumeric;
        default: return kExitFormat;
    }
}

class Log {
public:
    void emit(const std::string& level, const std::string& cmd, const std::string& msg, ordered_json extra = ordered_json::object()) {
        ordered_json j;
        j["level"] = level;
        j["cmd"] = cmd;
        j["msg"] = msg;
        j["elapsed_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_).count();
        for (auto& [k, v] : extra.items()) j[k] = v;
        const std::lock_guard lock(mu_);
        std::cerr << j.dump() << '\n';
    }
    void info(const std::string& cmd, const std::string& msg, ordered_json extra = ordered_json::object()) {
        emit("info", cmd, msg, std::move(extra));
    }
    void error(const std::string& cmd, const std::string& msg, ordered_json extra = ordered_json::object()) {
        emit("error", cmd, msg, std::move(extra));
    }

private:
    std::mutex mu_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Log g_log;

PointCloud read_cloud(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".las" || ext == ".laz") return read_las(p);
    if (ext == ".xyz" || ext == ".txt" || ext == ".asc" || ext == ".csv") return read_ascii(p);
    throw Error(ErrorCode::UnsupportedFormat, "unrecognised point cloud extension '" + ext + "' for " + p.string());
}

void write_cloud(const PointCloud& c, const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (ext == ".las") return write_las(c, p);
    if (ext == ".xyz" || ext == ".txt" || ext == ".asc") return write_ascii(c, p);
    throw UsageError("output cloud must end in .las or .xyz: " + p.string());
}

/// "file.dtr:band" reference. The band part is optional.
struct BandRef {
    fs::path path;
    std::string band;
};

BandRef parse_band_ref(const std::string& s) {
    const auto colon = s.rfind(':');
    if (colon == std::string::npos || colon == 0 || s.find('/', colon) != std::string::npos) return {s, {}};
    return {s.substr(0, colon), s.substr(colon + 1)};
}

RasterGrid load_band(const std::string& ref, const std::string& fallback) {
    const auto r = parse_band_ref(ref);
    const auto stack = read_stack(r.path);
    if (stack.empty()) throw Error(ErrorCode::SpecMismatch, r.path.string() + " holds no bands");
    const std::string want = r.band.empty() ? fallback : r.band;
    if (!want.empty()) {
        if (const auto* b = stack.find(want)) return *b;
        if (!r.band.empty()) throw Error(ErrorCode::SpecMismatch, r.path.string() + " has no band '" + want + "'");
    }
    if (stack.size() == 1) return stack[0];
    throw UsageError(r.path.string() + " has several bands; name one as path:band");
}

GridSpec spec_from_json(const nlohmann::json& j) {
    try {
        GridSpec s;
        s.origin_x = j.at("origin_x").get<double>();
        s.origin_y = j.at("origin_y").get<double>();
        s.cell_size = j.at("cell_size").get<double>();
        s.width = j.at("width").get<std::size_t>();
        s.height = j.at("height").get<std::size_t>();
        s.voxel_size_z = j.value("voxel_size_z", s.voxel_size_z);
        s.nodata = j.value("nodata", s.nodata);
        if (j.contains("crs_tag") && !j["crs_tag"].is_null()) s.crs_tag = j["crs_tag"].get<std::string>();
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("grid spec JSON: ") + e.what());
    }
}

/// A grid spec from a JSON file, or the spec of an existing .dtr stack.
GridSpec load_spec(const fs::path& p) {
    if (p.extension() == ".dtr") return read_stack(p).spec();
    const auto bytes = read_file_bytes(p);
    try {
        return spec_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, p.string() + ": " + e.what());
    }
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

int jobs_default() {
    if (const char* env = std::getenv("TERRARAST_JOBS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
    }
    return 1;
}

void check_bands(const std::vector<std::string>& bands) {
    if (bands.empty()) throw UsageError("--bands needs at least one band");
    for (const auto& b : bands) {
        const auto kind = band_from_string(b);
        if (b != "sem2" && (!kind || *kind == BandKind::dtm || *kind == BandKind::custom)) throw UsageError("unknown band '" + b + "'");
    }
}

GroundCodes parse_codes(const std::vector<unsigned>& v) {
    GroundCodes out;
    for (const auto c : v) {
        if (c > 255) throw UsageError("ground code " + std::to_string(c) + " is out of range");
        out.insert(static_cast<std::uint8_t>(c));
    }
    if (out.empty()) throw UsageError("--ground-codes must not be empty");
    return out;
}

//------------------------------------------------------------------------------ subcommands

struct RasterizeOpts {
    std::string in, out, spec;
    double cell = 0.25, voxel = 0.25;
    std::vector<std::string> bands{"voxel_top", "voxel_bottom", "density", "stdev", "echoes"};
    std::vector<unsigned> ground_codes{kGroundClass};
    std::size_t downsample = 1;
};

int run_rasterize(const RasterizeOpts& o) {
    check_bands(o.bands);
    const auto codes = parse_codes(o.ground_codes);
    const auto cloud = read_cloud(o.in);
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, o.in + " has no points");
    GridSpec spec = o.spec.empty() ? grid_for_bounds(*cloud.bounds(), o.cell, o.voxel) : load_spec(o.spec);
    if (o.spec.empty()) spec.crs_tag = cloud.crs_tag();
    auto stack = rasterize_bands(cloud, spec, o.bands, codes);
    if (o.downsample > 1) stack = downsample(stack, o.downsample);
    write_stack(stack, o.out);
    g_log.info("rasterize", "wrote stack",
               {{"out", o.out}, {"bands", stack.size()}, {"width", stack.spec().width}, {"height", stack.spec().height}, {"points", cloud.size()}});
    return kExitOk;
}

struct FilterOpts {
    std::string algo, params, in, out;
};

int run_filter_cmd(const FilterOpts& o) {
    const nlohmann::json cfg = o.params.empty() ? nlohmann::json::object() : read_config(o.params);
    const auto cloud = read_cloud(o.in);
    const auto mask = run_filter(o.algo, cloud, cfg);
    write_mask(mask, o.out);
    g_log.info("filter", "wrote mask", {{"algo", o.algo}, {"out", o.out}, {"points", mask.size()}, {"ground", mask.count()}});
    return kExitOk;
}

struct TinOpts {
    std::string in, mask, spec, out;
    double cell = 0.25;
};

RasterGrid dtm_from_cloud(const PointCloud& cloud, const GroundMask& mask, const GridSpec& spec) {
    const auto ground = mask_to_dtm_points(cloud, mask);
    return tin_to_dtm(delaunay(ground), spec);
}

int run_tin(const TinOpts& o) {
    const auto cloud = read_cloud(o.in);
    GroundMask mask;
    if (o.mask.empty()) {
        mask.flags.resize(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i) mask.flags[i] = cloud[i].class_label == kGroundClass;
    } else {
        mask = read_mask(o.mask);
    }
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, o.in + " has no points");
    const GridSpec spec = o.spec.empty() ? grid_for_bounds(*cloud.bounds(), o.cell) : load_spec(o.spec);
    RasterStack out;
    out.push_back(dtm_from_cloud(cloud, mask, spec));
    write_stack(out, o.out);
    g_log.info("tin", "wrote dtm", {{"out", o.out}, {"ground_points", mask.count()}, {"width", spec.width}, {"height", spec.height}});
    return kExitOk;
}

struct AlignOpts {
    std::string raster, dtm, mask, out, grid_csv;
    std::size_t range = 10;
};

int run_align(const AlignOpts& o) {
    const auto raster = load_band(o.raster, "voxel_bottom");
    const auto dtm = load_band(o.dtm, "dtm");
    const auto mask = load_band(o.mask, "sem1");
    const auto res = grid_offset_search(raster, dtm, mask, o.range);
    ordered_json j;
    j["dx"] = res.dx;
    j["dy"] = res.dy;
    j["rmse_at_best"] = res.rmse_at_best;
    j["search_range"] = o.range;
    ordered_json grid = ordered_json::array();
    std::string csv = "dy\\dx";
    for (std::size_t dx = 0; dx <= o.range; ++dx) csv += "," + std::to_string(dx);
    csv += "\n";
    for (std::size_t dy = 0; dy <= o.range; ++dy) {
        ordered_json row = ordered_json::array();
        csv += std::to_string(dy);
        for (std::size_t dx = 0; dx <= o.range; ++dx) {
            const double v = res.rmse_grid[dy][dx];
            row.push_back(std::isnan(v) ? ordered_json(nullptr) : ordered_json(v));
            csv += "," + (std::isnan(v) ? std::string("nan") : fmt6(v));
        }
        csv += "\n";
        grid.push_back(row);
    }
    j["rmse_grid"] = grid;
    write_file_atomic(o.out, j.dump(2) + "\n");
    fs::path csv_path = o.grid_csv.empty() ? fs::path(o.out).replace_extension(".csv") : fs::path(o.grid_csv);
    write_file_atomic(csv_path, csv);
    g_log.info("align", "offset found", {{"dx", res.dx}, {"dy", res.dy}, {"rmse", res.rmse_at_best}, {"out", o.out}});
    return kExitOk;
}

struct EvalOpts {
    std::string pred, ref, report, markdown, hist_svg, box_svg;
    double bin_width = 1.0;
};

int run_eval(const EvalOpts& o) {
    const auto ref = load_band(o.ref, "dtm");
    const auto pred = resample_to(load_band(o.pred, "dtm"), ref.spec());
    const double rmse = dtm_rmse(pred, ref);
    std::size_t cells = 0;
    for (std::size_t i = 0; i < pred.values().size(); ++i) {
        cells += (!pred.is_nodata(pred.values()[i]) && !ref.is_nodata(ref.values()[i])) ? 1 : 0;
    }
    const std::string tile = parse_band_ref(o.pred).path.stem().string();
    write_file_atomic(o.report, "tile,split,rmse_m,cells\n" + tile + ",-," + fmt6(rmse) + "," + std::to_string(cells) + "\n");
    if (!o.markdown.empty()) {
        write_file_atomic(o.markdown, "| Tile | RMSE (m) | Cells |\n|---|---:|---:|\n| " + tile + " | " + fmt6(rmse) + " | " +
                                          std::to_string(cells) + " |\n");
    }
    if (!o.hist_svg.empty()) write_file_atomic(o.hist_svg, histogram_svg(elevation_histogram(pred, o.bin_width)));
    if (!o.box_svg.empty()) write_file_atomic(o.box_svg, boxplot_svg(per_tile_boxstats({pred, ref}), {"pred", "ref"}));
    g_log.info("eval", "rmse", {{"rmse", rmse}, {"cells", cells}, {"report", o.report}});
    return kExitOk;
}

struct SynthOpts {
    std::string scene, out, truth;
    double cell = 0.25;
};

int run_synth(const SynthOpts& o) {
    const auto spec = read_scene(o.scene);
    const auto scene = generate(spec);
    write_cloud(scene.cloud, o.out);
    if (!o.truth.empty()) {
        RasterStack t;
        t.push_back(truth_raster(scene.true_dtm, scene_grid(spec, o.cell)));
        write_stack(t, o.truth);
    }
    g_log.info("synth", "wrote scene", {{"out", o.out}, {"points", scene.cloud.size()}, {"truth", o.truth}});
    return kExitOk;
}

struct ManifestOpts {
    std::vector<std::string> tiles;
    std::uint64_t seed = 0;
    std::string out;
};

int run_manifest(const ManifestOpts& o) {
    std::vector<TileEntry> tiles;
    for (const auto& t : o.tiles) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const auto comma = t.find(',', start);
            parts.push_back(t.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (parts.size() < 2 || parts.size() > 3) throw UsageError("--tile expects cloud,dtm[,split], got '" + t + "'");
        TileEntry e{parts[0], parts[1], std::nullopt};
        if (parts.size() == 3) e.split = split_from_string(parts[2]);
        tiles.push_back(std::move(e));
    }
    const auto m = make_manifest(std::move(tiles), o.seed);
    write_manifest(m, o.out);
    g_log.info("manifest", "wrote manifest", {{"out", o.out}, {"tiles", m.tiles.size()}});
    return kExitOk;
}

struct PipelineOpts {
    std::string manifest, config;
    int jobs = 1;
};

struct TileResult {
    int code = kExitOk;
    std::string error;
    double rmse = 0.0;
    std::size_t cells = 0;
    std::optional<RasterStack> elevation;  // elevation bands on the evaluation grid
    std::optional<RasterGrid> ref;
    std::optional<RasterGrid> dtm;
};

TileResult process_tile(const TileEntry& t, const fs::path& base, const PipelineConfig& pc, const nlohmann::json& cfg) {
    TileResult res;
    const auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    const fs::path cloud_path = resolve(t.cloud_path);
    const std::string stem = cloud_path.stem().string();
    const fs::path out_dir = pc.out_dir;
    try {
        const auto cloud = read_cloud(cloud_path);
        if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, cloud_path.string() + " has no points");
        const auto ref_stack = read_stack(resolve(t.dtm_path));
        const auto* ref_band = ref_stack.find("dtm");
        if (!ref_band && ref_stack.size() != 1) throw Error(ErrorCode::SpecMismatch, t.dtm_path + " has no 'dtm' band");
        RasterGrid ref = ref_band ? *ref_band : ref_stack[0];
        GridSpec eval_spec = ref.spec();
        if (pc.eval_resolution > 0.0 && pc.eval_resolution != eval_spec.cell_size) {
            const double f = pc.eval_resolution / eval_spec.cell_size;
            eval_spec.cell_size = pc.eval_resolution;
            eval_spec.width = static_cast<std::size_t>(std::ceil(static_cast<double>(eval_spec.width) / f - 1e-9));
            eval_spec.height = static_cast<std::size_t>(std::ceil(static_cast<double>(eval_spec.height) / f - 1e-9));
            ref = resample_to(ref, eval_spec);
        }

        GridSpec spec = grid_for_bounds(*cloud.bounds(), pc.cell_size, pc.voxel_size_z);
        spec.crs_tag = cloud.crs_tag();
        auto names = pc.bands;
        for (const auto kind : kElevationBands) {
            if (std::find(names.begin(), names.end(), std::string(to_string(kind))) == names.end()) names.emplace_back(to_string(kind));
        }
        auto stack = rasterize_bands(cloud, spec, names, pc.ground_codes);
        if (pc.downsample > 1) stack = downsample(stack, pc.downsample);
        write_stack(stack, out_dir / (stem + ".dtr"));

        const auto mask = run_filter(pc.filter, cloud, cfg);
        write_mask(mask, out_dir / (stem + ".mask.bin"));
        auto dtm = dtm_from_cloud(cloud, mask, eval_spec);
        RasterStack dtm_stack;
        dtm_stack.push_back(dtm);
        write_stack(dtm_stack, out_dir / (stem + ".dtm.dtr"));

        res.rmse = dtm_rmse(dtm, ref);
        for (std::size_t i = 0; i < dtm.values().size(); ++i) {
            res.cells += (!dtm.is_nodata(dtm.values()[i]) && !ref.is_nodata(ref.values()[i])) ? 1 : 0;
        }
        RasterStack elev;
        for (const auto kind : kElevationBands) elev.push_back(resample_to(stack.at(to_string(kind)), eval_spec));
        res.elevation = std::move(elev);
        res.ref = std::move(ref);
        res.dtm = std::move(dtm);
    } catch (const UsageError& e) {
        res.code = kExitUsage;
        res.error = e.what();
    } catch (const Error& e) {
        res.code = exit_code_for(e.code());
        res.error = e.what();
    }
    return res;
}

int run_pipeline(const PipelineOpts& o) {
    const auto cfg = read_config(o.config);
    const auto pc = pipeline_config(cfg);
    check_bands(pc.bands);
    // Validate filter parameters once, before touching any tile.
    if (pc.filter == "pmf") (void)pmf_params(cfg);
    else if (pc.filter == "smrf") (void)smrf_params(cfg);
    else if (pc.filter == "csf") (void)csf_params(cfg);
    else if (pc.filter != "sbm") throw UsageError("unknown filter '" + pc.filter + "'");

    const auto manifest = read_manifest(o.manifest);
    const fs::path base = fs::absolute(o.manifest).parent_path();
    fs::create_directories(pc.out_dir);

    const std::size_t n = manifest.tiles.size();
    std::vector<TileResult> results(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            results[i] = process_tile(manifest.tiles[i], base, pc, cfg);
            const auto& r = results[i];
            if (r.code == kExitOk) {
                g_log.info("pipeline", "tile done", {{"tile", manifest.tiles[i].cloud_path}, {"rmse", r.rmse}});
            } else {
                g_log.error("pipeline", "tile failed", {{"tile", manifest.tiles[i].cloud_path}, {"error", r.error}, {"exit", r.code}});
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, o.jobs));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::string report = "tile,split,rmse_m,cells\n";
    std::map<Split, std::pair<std::vector<RasterStack>, std::vector<RasterGrid>>> by_split;
    std::vector<BoxStats> box;
    std::vector<std::string> labels;
    int code = kExitOk;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = manifest.tiles[i];
        const auto& r = results[i];
        const std::string split = to_string(*t.split);
        if (r.code != kExitOk) {
            report += t.cloud_path + "," + split + ",error,0\n";
            if (code == kExitOk) code = r.code;
            continue;
        }
        report += t.cloud_path + "," + split + "," + fmt6(r.rmse) + "," + std::to_string(r.cells) + "\n";
        by_split[*t.split].first.push_back(*r.elevation);
        by_split[*t.split].second.push_back(*r.ref);
        box.push_back(box_stats(*r.dtm));
        labels.push_back(fs::path(t.cloud_path).stem().string());
    }
    const fs::path out_dir = pc.out_dir;
    write_file_atomic(out_dir / "report.csv", report);
    std::vector<ElevationReportRow> rows;
    for (auto& [split, data] : by_split) {
        try {
            rows.push_back(elevation_raster_as_dtm_report(data.first, data.second, to_string(split)));
        } catch (const Error& e) {
            g_log.error("pipeline", "elevation report failed", {{"split", to_string(split)}, {"error", e.what()}});
            if (code == kExitOk) code = exit_code_for(e.code());
        }
    }
    write_file_atomic(out_dir / "elevation_as_dtm.csv", elevation_report_csv(rows));
    write_file_atomic(out_dir / "elevation_as_dtm.md", elevation_report_markdown(rows));
    write_file_atomic(out_dir / "boxstats.csv", boxstats_csv(box, labels));
    write_file_atomic(out_dir / "boxstats.svg", boxplot_svg(box, labels));
    g_log.info("pipeline", "finished", {{"tiles", n}, {"exit", code}, {"out_dir", pc.out_dir}});
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"terrarast: ALS point clouds to rasters, ground filters, TIN DTMs and evaluation"};
    app.set_version_flag("--version", "terrarast 1.0.0");
    app.require_subcommand(1);
    std::string active;

    RasterizeOpts ro;
    auto* rz = app.add_subcommand("rasterize", "rasterize a point cloud into a .dtr band stack");
    rz->add_option("--in", ro.in, "input cloud (.las or .xyz)")->required();
    rz->add_option("--out", ro.out, "output .dtr stack")->required();
    rz->add_option("--cell", ro.cell, "cell size in metres")->check(CLI::PositiveNumber);
    rz->add_option("--voxel", ro.voxel, "voxel height in metres")->check(CLI::PositiveNumber);
    rz->add_option("--bands", ro.bands, "comma-separated band list")->delimiter(',');
    rz->add_option("--spec", ro.spec, "grid spec JSON or .dtr to rasterize onto (default: cloud bounds)");
    rz->add_option("--ground-codes", ro.ground_codes, "classification codes counted as ground")->delimiter(',');
    rz->add_option("--downsample", ro.downsample, "block-reduction factor")->check(CLI::PositiveNumber);

    FilterOpts fo;
    auto* fl = app.add_subcommand("filter", "classify ground points");
    fl->add_option("--algo", fo.algo, "pmf, smrf, sbm or csf")->required()->check(CLI::IsMember({"pmf", "smrf", "sbm", "csf"}));
    fl->add_option("--params", fo.params, "TOML or JSON parameter file");
    fl->add_option("--in", fo.in, "input cloud")->required();
    fl->add_option("--out", fo.out, "output mask.bin")->required();

    TinOpts to;
    auto* tn = app.add_subcommand("tin", "interpolate ground points into a DTM");
    tn->add_option("--in", to.in, "input cloud")->required();
    tn->add_option("--mask", to.mask, "ground mask (default: points of class 2)");
    tn->add_option("--spec", to.spec, "grid spec JSON or .dtr whose grid to use (default: cloud bounds)");
    tn->add_option("--cell", to.cell, "cell size when no --spec is given")->check(CLI::PositiveNumber);
    tn->add_option("--out", to.out, "output .dtr")->required();

    AlignOpts ao;
    auto* al = app.add_subcommand("align", "integer offset search between a raster and a reference DTM");
    al->add_option("--raster", ao.raster, "raster band, e.g. tile.dtr:voxel_bottom")->required();
    al->add_option("--dtm", ao.dtm, "reference DTM, e.g. ref.dtr")->required();
    al->add_option("--mask", ao.mask, "ground mask band in the raster frame, e.g. tile.dtr:sem1")->required();
    al->add_option("--range", ao.range, "largest offset searched, in cells (offsets are non-negative)");
    al->add_option("--out", ao.out, "offset JSON")->required();
    al->add_option("--grid-csv", ao.grid_csv, "RMSE surface CSV (default: --out with .csv extension)");

    EvalOpts eo;
    auto* ev = app.add_subcommand("eval", "RMSE of a predicted DTM against a reference");
    ev->add_option("--pred", eo.pred, "predicted DTM .dtr[:band]")->required();
    ev->add_option("--ref", eo.ref, "reference DTM .dtr[:band]")->required();
    ev->add_option("--report", eo.report, "CSV report")->required();
    ev->add_option("--markdown", eo.markdown, "Markdown report");
    ev->add_option("--hist-svg", eo.hist_svg, "elevation histogram of the prediction as SVG");
    ev->add_option("--box-svg", eo.box_svg, "box plot of prediction and reference as SVG");
    ev->add_option("--bin-width", eo.bin_width, "histogram bin width in metres")->check(CLI::PositiveNumber);

    SynthOpts so;
    auto* sy = app.add_subcommand("synth", "generate a synthetic ALS scene");
    sy->add_option("--scene", so.scene, "scene JSON")->required();
    sy->add_option("--out", so.out, "output cloud (.las or .xyz)")->required();
    sy->add_option("--truth", so.truth, "true terrain as .dtr");
    sy->add_option("--cell", so.cell, "truth raster cell size")->check(CLI::PositiveNumber);

    ManifestOpts mo;
    auto* mf = app.add_subcommand("manifest", "build a seeded train/val/test manifest");
    mf->add_option("--tile", mo.tiles, "cloud,dtm[,split]; repeatable")->required();
    mf->add_option("--seed", mo.seed, "shuffle seed");
    mf->add_option("--out", mo.out, "manifest JSON")->required();

    PipelineOpts po;
    po.jobs = jobs_default();
    auto* pl = app.add_subcommand("pipeline", "rasterize, filter, tin and eval every manifest tile");
    pl->add_option("--manifest", po.manifest, "manifest JSON")->required();
    pl->add_option("--config", po.config, "run config (TOML or JSON)")->required();
    pl->add_option("--jobs", po.jobs, "parallel tiles (default: TERRARAST_JOBS or 1)")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        g_log.error("cli", e.what(), {{"exit", kExitUsage}});
        return kExitUsage;
    }

    for (auto* sub : app.get_subcommands()) active = sub->get_name();
    try {
        if (*rz) return run_rasterize(ro);
        if (*fl) return run_filter_cmd(fo);
        if (*tn) return run_tin(to);
        if (*al) return run_align(ao);
        if (*ev) return run_eval(eo);
        if (*sy) return run_synth(so);
        if (*mf) return run_manifest(mo);
        if (*pl) return run_pipeline(po);
    } catch (const UsageError& e) {
        g_log.error(active, e.what(), {{"exit", kExitUsage}});
        return kExitUsage;
    } catch (const Error& e) {
        const int code = exit_code_for(e.code());
        g_log.error(active, e.what(), {{"code", std::string(to_string(e.code()))}, {"exit", code}});
        return code;
    } catch (const std::filesystem::filesystem_error& e) {
        g_log.error(active, e.what(), {{"exit", kExitFormat}});
        return kExitFormat;
    }
    return kExitUsage;
}
