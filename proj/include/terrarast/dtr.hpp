#pragma once

// ".dtr" raster stack files. A stack at `tile.dtr` is two files:
//   tile.dtr       raw band-sequential float32 little-endian, each band row-major north to south
//   tile.dtr.json  sidecar {format, format_version, width, height, bands, cell_size, voxel_size_z,
//                  origin_x, origin_y, nodata, crs_tag, crc32}
// crc32 holds one CRC-32 (zlib polynomial) per band over that band's bytes.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "terrarast/error.hpp"
#include "terrarast/fileio.hpp"
#include "terrarast/grid.hpp"

namespace terrarast {

static_assert(std::endian::native == std::endian::little, ".dtr codec assumes a little-endian host");

inline constexpr int kDtrFormatVersion = 1;

[[nodiscard]] inline std::filesystem::path dtr_sidecar_path(const std::filesystem::path& path) {
    auto p = path;
    p += ".json";
    return p;
}

[[nodiscard]] inline std::uint32_t band_crc32(const RasterGrid& band) {
    const auto& v = band.values();
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(v.data()), static_cast<uInt>(v.size() * sizeof(float)));
    return static_cast<std::uint32_t>(crc);
}

struct EncodedStack {
    std::string sidecar;
    std::vector<std::uint8_t> payload;
};

[[nodiscard]] inline EncodedStack encode_stack(const RasterStack& stack) {
    nlohmann::ordered_json j;
    j["format"] = "dtr";
    j["format_version"] = kDtrFormatVersion;
    std::vector<std::string> names;
    std::vector<std::uint32_t> crcs;
    for (const auto& b : stack.bands()) {
        names.push_back(b.name());
        crcs.push_back(band_crc32(b));
    }
    if (stack.empty()) {
        j["width"] = 0;
        j["height"] = 0;
    } else {
        const auto& s = stack.spec();
        j["width"] = s.width;
        j["height"] = s.height;
    }
    j["bands"] = names;
    if (!stack.empty()) {
        const auto& s = stack.spec();
        j["cell_size"] = s.cell_size;
        j["voxel_size_z"] = s.voxel_size_z;
        j["origin_x"] = s.origin_x;
        j["origin_y"] = s.origin_y;
        j["nodata"] = s.nodata;
        j["crs_tag"] = s.crs_tag ? nlohmann::ordered_json(*s.crs_tag) : nlohmann::ordered_json(nullptr);
    }
    j["crc32"] = crcs;

    EncodedStack out;
    out.sidecar = j.dump(2) + "\n";
    for (const auto& b : stack.bands()) {
        const auto* bytes = reinterpret_cast<const std::uint8_t*>(b.values().data());
        out.payload.insert(out.payload.end(), bytes, bytes + b.values().size() * sizeof(float));
    }
    return out;
}

[[nodiscard]] inline RasterStack decode_stack(const std::string& sidecar, const std::vector<std::uint8_t>& payload) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(sidecar);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("sidecar is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("format", std::string{}) != "dtr") throw Error(ErrorCode::FormatVersionMismatch, "sidecar format is not 'dtr'");
        const int version = j.at("format_version").get<int>();
        if (version != kDtrFormatVersion) {
            throw Error(ErrorCode::FormatVersionMismatch,
                        "format_version " + std::to_string(version) + ", expected " + std::to_string(kDtrFormatVersion));
        }
        const auto names = j.at("bands").get<std::vector<std::string>>();
        const auto crcs = j.at("crc32").get<std::vector<std::uint32_t>>();
        if (crcs.size() != names.size()) throw Error(ErrorCode::ParseError, "crc32 list length differs from band list");
        if (names.empty()) {
            if (!payload.empty()) throw Error(ErrorCode::TruncatedPayload, "payload present for a zero-band stack");
            return {};
        }
        GridSpec spec;
        spec.width = j.at("width").get<std::size_t>();
        spec.height = j.at("height").get<std::size_t>();
        spec.cell_size = j.at("cell_size").get<double>();
        spec.voxel_size_z = j.at("voxel_size_z").get<double>();
        spec.origin_x = j.at("origin_x").get<double>();
        spec.origin_y = j.at("origin_y").get<double>();
        spec.nodata = j.at("nodata").get<float>();
        if (j.contains("crs_tag") && !j["crs_tag"].is_null()) spec.crs_tag = j["crs_tag"].get<std::string>();
        spec.validate();

        const std::size_t band_bytes = spec.cell_count() * sizeof(float);
        if (payload.size() != band_bytes * names.size()) {
            throw Error(ErrorCode::TruncatedPayload, "payload has " + std::to_string(payload.size()) + " bytes, expected " +
                                                         std::to_string(band_bytes * names.size()));
        }
        RasterStack stack;
        for (std::size_t b = 0; b < names.size(); ++b) {
            std::vector<float> values(spec.cell_count());
            std::memcpy(values.data(), payload.data() + b * band_bytes, band_bytes);
            const auto kind = band_from_string(names[b]);
            RasterGrid band(spec, kind.value_or(BandKind::custom), std::move(values), kind ? std::string{} : names[b]);
            if (band_crc32(band) != crcs[b]) {
                throw Error(ErrorCode::ChecksumFailure, "band '" + names[b] + "' CRC32 mismatch");
            }
            stack.push_back(std::move(band));
        }
        return stack;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("sidecar field error: ") + e.what());
    }
}

/// Writes payload then sidecar, each atomically. The sidecar CRCs make a torn pair detectable.
inline void write_stack(const RasterStack& stack, const std::filesystem::path& path) {
    const auto enc = encode_stack(stack);
    write_file_atomic(path, enc.payload);
    write_file_atomic(dtr_sidecar_path(path), enc.sidecar);
}

[[nodiscard]] inline RasterStack read_stack(const std::filesystem::path& path) {
    const auto side = read_file_bytes(dtr_sidecar_path(path));
    return decode_stack(std::string(side.begin(), side.end()), read_file_bytes(path));
}

}  // namespace terrarast
