#pragma once

// Run configuration. Files are TOML (a subset: [tables], [a.b] dotted tables, key = value with
// strings, integers, floats, booleans and single-line arrays of those, # comments) or JSON
// when the extension is .json. Both parse into the same JSON tree; every field is optional and
// defaults to the filter's published parameters.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "terrarast/csf.hpp"
#include "terrarast/error.hpp"
#include "terrarast/fileio.hpp"
#include "terrarast/groundfilter.hpp"
#include "terrarast/rasterize.hpp"

namespace terrarast {

namespace toml_detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] inline void fail(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ParseError, "config line " + std::to_string(line) + ": " + what);
}

/// Drops a trailing comment that is not inside a string.
inline std::string_view strip_comment(std::string_view s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

inline nlohmann::json parse_scalar(std::string_view v, std::size_t line) {
    v = trim(v);
    if (v.empty()) fail(line, "missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                const char e = v[++i];
                out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            } else {
                out += v[i];
            }
        }
        return out;
    }
    if (v == "true") return true;
    if (v == "false") return false;
    std::string digits;
    for (const char c : v) {
        if (c != '_') digits += c;
    }
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" || digits == "nan";
    if (!is_float) {
        long long i = 0;
        const auto* b = digits.data() + (digits.front() == '+' ? 1 : 0);
        const auto [p, ec] = std::from_chars(b, digits.data() + digits.size(), i);
        if (ec == std::errc{} && p == digits.data() + digits.size()) return i;
    } else {
        double d = 0;
        const auto* b = digits.data() + (digits.front() == '+' ? 1 : 0);
        const auto [p, ec] = std::from_chars(b, digits.data() + digits.size(), d);
        if (ec == std::errc{} && p == digits.data() + digits.size()) return d;
    }
    fail(line, "cannot parse value '" + std::string(v) + "'");
}

inline nlohmann::json parse_value(std::string_view v, std::size_t line) {
    v = trim(v);
    if (v.empty() || v.front() != '[') return parse_scalar(v, line);
    if (v.back() != ']') fail(line, "arrays must close on the same line");
    auto arr = nlohmann::json::array();
    std::string_view body = trim(v.substr(1, v.size() - 2));
    bool in_str = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= body.size(); ++i) {
        if (i < body.size() && body[i] == '"') in_str = !in_str;
        if (i == body.size() || (body[i] == ',' && !in_str)) {
            const auto item = trim(body.substr(start, i - start));
            if (!item.empty()) arr.push_back(parse_scalar(item, line));
            start = i + 1;
        }
    }
    return arr;
}

inline nlohmann::json& table_at(nlohmann::json& root, std::string_view dotted, std::size_t line) {
    nlohmann::json* cur = &root;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const auto dot = dotted.find('.', start);
        const auto key = trim(dotted.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (key.empty()) fail(line, "empty table name");
        auto& next = (*cur)[std::string(key)];
        if (next.is_null()) next = nlohmann::json::object();
        if (!next.is_object()) fail(line, "'" + std::string(key) + "' is not a table");
        cur = &next;
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return *cur;
}

}  // namespace toml_detail

[[nodiscard]] inline nlohmann::json parse_toml(std::string_view text) {
    using namespace toml_detail;
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) fail(line_no, "malformed table header");
            table = &table_at(root, line.substr(1, line.size() - 2), line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected key = value");
        auto key = trim(line.substr(0, eq));
        if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
        if (key.empty()) fail(line_no, "empty key");
        if (table->contains(std::string(key))) fail(line_no, "duplicate key '" + std::string(key) + "'");
        (*table)[std::string(key)] = parse_value(line.substr(eq + 1), line_no);
    }
    return root;
}

/// Reads a TOML or JSON (by .json extension) config file into a JSON tree.
[[nodiscard]] inline nlohmann::json read_config(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    const std::string text(bytes.begin(), bytes.end());
    if (path.extension() == ".json") {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
        }
    }
    return parse_toml(text);
}

namespace config_detail {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& field, const char* section) {
    if (!j.contains(key)) return;
    try {
        field = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::InvalidArgument, std::string(section) + "." + key + " has the wrong type");
    }
}

inline const nlohmann::json& section(const nlohmann::json& root, const char* name) {
    static const nlohmann::json empty = nlohmann::json::object();
    if (!root.contains(name)) return empty;
    if (!root[name].is_object()) throw Error(ErrorCode::InvalidArgument, std::string("[") + name + "] must be a table");
    return root[name];
}

inline void reject_unknown(const nlohmann::json& j, const char* name, std::initializer_list<const char*> known) {
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* n : known) ok = ok || k == n;
        if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("unknown key ") + name + "." + k);
    }
}

}  // namespace config_detail

/// Parameters from the [pmf] table; absent keys keep their defaults.
[[nodiscard]] inline PmfParams pmf_params(const nlohmann::json& root) {
    using namespace config_detail;
    const auto& j = section(root, "pmf");
    reject_unknown(j, "pmf", {"cell", "max_window", "window_growth", "initial_distance", "max_distance", "slope"});
    PmfParams p;
    if (j.contains("window_growth") && j["window_growth"] != "exponential") {
        throw Error(ErrorCode::InvalidArgument, "pmf.window_growth must be \"exponential\"");
    }
    take(j, "cell", p.cell, "pmf");
    take(j, "max_window", p.max_window, "pmf");
    take(j, "initial_distance", p.initial_distance, "pmf");
    take(j, "max_distance", p.max_distance, "pmf");
    take(j, "slope", p.slope, "pmf");
    p.validate();
    return p;
}

[[nodiscard]] inline SmrfParams smrf_params(const nlohmann::json& root) {
    using namespace config_detail;
    const auto& j = section(root, "smrf");
    reject_unknown(j, "smrf", {"cell", "max_window", "elevation_scalar", "elevation_threshold", "slope_tolerance"});
    SmrfParams p;
    take(j, "cell", p.cell, "smrf");
    take(j, "max_window", p.max_window, "smrf");
    take(j, "elevation_scalar", p.elevation_scalar, "smrf");
    take(j, "elevation_threshold", p.elevation_threshold, "smrf");
    take(j, "slope_tolerance", p.slope_tolerance, "smrf");
    p.validate();
    return p;
}

[[nodiscard]] inline CsfParams csf_params(const nlohmann::json& root) {
    using namespace config_detail;
    const auto& j = section(root, "csf");
    reject_unknown(j, "csf", {"cloth_resolution", "rigidness", "time_step", "iterations", "class_threshold", "slope_smoothing"});
    CsfParams p;
    take(j, "cloth_resolution", p.cloth_resolution, "csf");
    take(j, "rigidness", p.rigidness, "csf");
    take(j, "time_step", p.time_step, "csf");
    take(j, "iterations", p.iterations, "csf");
    take(j, "class_threshold", p.class_threshold, "csf");
    take(j, "slope_smoothing", p.slope_smoothing, "csf");
    p.validate();
    return p;
}

/// Runs the named filter with parameters drawn from `config`.
[[nodiscard]] inline GroundMask run_filter(const std::string& algo, const PointCloud& cloud, const nlohmann::json& config) {
    if (algo == "pmf") return pmf(cloud, pmf_params(config));
    if (algo == "smrf") return smrf(cloud, smrf_params(config));
    if (algo == "sbm") return sbm(cloud);
    if (algo == "csf") return csf(cloud, csf_params(config));
    throw Error(ErrorCode::InvalidArgument, "unknown filter '" + algo + "' (expected pmf, smrf, sbm or csf)");
}

/// Settings of the [pipeline] table.
struct PipelineConfig {
    std::string filter = "csf";
    double cell_size = 0.25;
    double voxel_size_z = 0.25;
    std::vector<std::string> bands{"pixel_mean", "voxel_top", "voxel_bottom", "density", "stdev", "echoes"};
    std::size_t downsample = 1;
    GroundCodes ground_codes{kGroundClass};
    /// Cell size of the evaluation grid; 0 means the reference DTM's own grid.
    double eval_resolution = 0.0;
    std::string out_dir = "pipeline_out";
};

[[nodiscard]] inline PipelineConfig pipeline_config(const nlohmann::json& root) {
    using namespace config_detail;
    const auto& j = section(root, "pipeline");
    reject_unknown(j, "pipeline",
                   {"filter", "cell_size", "voxel_size_z", "bands", "downsample", "ground_codes", "eval_resolution", "out_dir"});
    PipelineConfig c;
    take(j, "filter", c.filter, "pipeline");
    take(j, "cell_size", c.cell_size, "pipeline");
    take(j, "voxel_size_z", c.voxel_size_z, "pipeline");
    take(j, "bands", c.bands, "pipeline");
    take(j, "downsample", c.downsample, "pipeline");
    take(j, "eval_resolution", c.eval_resolution, "pipeline");
    take(j, "out_dir", c.out_dir, "pipeline");
    if (j.contains("ground_codes")) {
        std::vector<unsigned> codes;
        take(j, "ground_codes", codes, "pipeline");
        c.ground_codes.clear();
        for (const auto v : codes) {
            if (v > 255) throw Error(ErrorCode::InvalidArgument, "pipeline.ground_codes entries must be 0..255");
            c.ground_codes.insert(static_cast<std::uint8_t>(v));
        }
    }
    if (!(c.cell_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "pipeline.cell_size must be > 0");
    if (!(c.voxel_size_z > 0.0)) throw Error(ErrorCode::InvalidArgument, "pipeline.voxel_size_z must be > 0");
    if (c.downsample == 0) throw Error(ErrorCode::InvalidArgument, "pipeline.downsample must be >= 1");
    if (c.eval_resolution < 0.0) throw Error(ErrorCode::InvalidArgument, "pipeline.eval_resolution must be >= 0");
    if (c.ground_codes.empty()) throw Error(ErrorCode::InvalidArgument, "pipeline.ground_codes must not be empty");
    return c;
}

}  // namespace terrarast
