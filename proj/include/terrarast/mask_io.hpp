#pragma once

// Ground-mask files: "TRMK" magic, u32 version (1), u64 point count, then one byte per point
// (1 ground, 0 non-ground). Integers are little-endian.

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/fileio.hpp"
#include "terrarast/groundfilter.hpp"

namespace terrarast {

inline constexpr std::uint32_t kMaskFormatVersion = 1;

[[nodiscard]] inline std::vector<std::uint8_t> encode_mask(const GroundMask& mask) {
    std::vector<std::uint8_t> out(16 + mask.size());
    std::memcpy(out.data(), "TRMK", 4);
    const std::uint32_t v = kMaskFormatVersion;
    const auto n = static_cast<std::uint64_t>(mask.size());
    for (int i = 0; i < 4; ++i) out[4 + i] = static_cast<std::uint8_t>(v >> (8 * i));
    for (int i = 0; i < 8; ++i) out[8 + i] = static_cast<std::uint8_t>(n >> (8 * i));
    for (std::size_t i = 0; i < mask.size(); ++i) out[16 + i] = mask.flags[i] ? 1 : 0;
    return out;
}

[[nodiscard]] inline GroundMask decode_mask(const std::vector<std::uint8_t>& buf) {
    if (buf.size() < 16 || std::memcmp(buf.data(), "TRMK", 4) != 0) throw Error(ErrorCode::CorruptHeader, "not a TRMK mask file");
    std::uint32_t v = 0;
    std::uint64_t n = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[4 + i]) << (8 * i);
    for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(buf[8 + i]) << (8 * i);
    if (v != kMaskFormatVersion) throw Error(ErrorCode::FormatVersionMismatch, "mask version " + std::to_string(v));
    if (buf.size() - 16 != n) {
        throw Error(ErrorCode::TruncatedPayload, "mask declares " + std::to_string(n) + " points, holds " + std::to_string(buf.size() - 16));
    }
    GroundMask m;
    m.flags.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (buf[16 + i] > 1) throw Error(ErrorCode::CorruptHeader, "mask byte " + std::to_string(i) + " is not 0 or 1");
        m.flags[i] = buf[16 + i] == 1;
    }
    return m;
}

inline void write_mask(const GroundMask& mask, const std::filesystem::path& path) { write_file_atomic(path, encode_mask(mask)); }

[[nodiscard]] inline GroundMask read_mask(const std::filesystem::path& path) { return decode_mask(read_file_bytes(path)); }

}  // namespace terrarast
