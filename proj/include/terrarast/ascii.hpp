#pragma once

// Whitespace-separated "x y z [intensity] [echo_number] [num_returns] [class_label]" text clouds.

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/fileio.hpp"
#include "terrarast/pointcloud.hpp"

namespace terrarast {

namespace ascii_detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        const std::size_t start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

inline double parse_double(std::string_view tok, std::size_t line_no) {
    double v = 0.0;
    const char* first = tok.data();
    if (!tok.empty() && tok.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": non-numeric token '" + std::string(tok) + "'");
    }
    return v;
}

inline unsigned parse_uint(std::string_view tok, std::size_t line_no, unsigned max_value) {
    const double v = parse_double(tok, line_no);
    if (v < 0.0 || v > max_value || std::floor(v) != v) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": token '" + std::string(tok) +
                                               "' is not an integer in [0, " + std::to_string(max_value) + "]");
    }
    return static_cast<unsigned>(v);
}

}  // namespace ascii_detail

[[nodiscard]] inline PointCloud parse_ascii(std::string_view text) {
    using namespace ascii_detail;
    std::vector<PointRecord> points;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        const auto tokens = split_ws(line);
        if (tokens.empty() || tokens.front().front() == '#') continue;
        if (tokens.size() < 3 || tokens.size() > 7) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 3 to 7 fields, got " +
                                                   std::to_string(tokens.size()));
        }
        PointRecord p;
        p.x = parse_double(tokens[0], line_no);
        p.y = parse_double(tokens[1], line_no);
        p.z = parse_double(tokens[2], line_no);
        if (tokens.size() > 3) p.intensity = static_cast<std::uint16_t>(parse_uint(tokens[3], line_no, 65535));
        if (tokens.size() > 4) p.echo_number = static_cast<std::uint8_t>(parse_uint(tokens[4], line_no, 255));
        if (tokens.size() > 5) p.num_returns = static_cast<std::uint8_t>(parse_uint(tokens[5], line_no, 255));
        if (tokens.size() > 6) p.class_label = static_cast<std::uint8_t>(parse_uint(tokens[6], line_no, 255));
        if (!is_valid(p)) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": echo number must satisfy 1 <= echo <= returns");
        }
        points.push_back(p);
    }
    return PointCloud(std::move(points));
}

[[nodiscard]] inline PointCloud read_ascii(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return parse_ascii(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

/// Shortest round-trip decimal representation; parse_ascii(format_ascii(c)) == c.
[[nodiscard]] inline std::string format_ascii(const PointCloud& cloud) {
    std::string out;
    out.reserve(cloud.size() * 48);
    std::array<char, 32> buf{};
    const auto put = [&](double v) {
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
        out.append(buf.data(), res.ptr);
        out.push_back(' ');
    };
    for (const auto& p : cloud.points()) {
        put(p.x);
        put(p.y);
        put(p.z);
        out += std::to_string(p.intensity) + ' ' + std::to_string(p.echo_number) + ' ' + std::to_string(p.num_returns) +
               ' ' + std::to_string(p.class_label) + '\n';
    }
    return out;
}

inline void write_ascii(const PointCloud& cloud, const std::filesystem::path& path) {
    write_file_atomic(path, format_ascii(cloud));
}

}  // namespace terrarast
