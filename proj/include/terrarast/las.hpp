#pragma once

// LAS 1.2-1.4 reader/writer for point data record formats 0, 1, 3 and 6 (uncompressed only).

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "terrarast/error.hpp"
#include "terrarast/fileio.hpp"
#include "terrarast/pointcloud.hpp"

namespace terrarast {

static_assert(std::endian::native == std::endian::little, "LAS codec assumes a little-endian host");

namespace las_detail {

template <typename T>
T load(const std::vector<std::uint8_t>& buf, std::size_t offset) {
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof(T));
    return v;
}

template <typename T>
void store(std::vector<std::uint8_t>& buf, std::size_t offset, T v) {
    std::memcpy(buf.data() + offset, &v, sizeof(T));
}

constexpr std::size_t min_record_length(std::uint8_t format) {
    switch (format) {
        case 0: return 20;
        case 1: return 28;
        case 3: return 34;
        case 6: return 30;
        default: return 0;
    }
}

constexpr std::uint16_t header_size_for(std::uint8_t minor) {
    return minor >= 4 ? 375 : (minor == 3 ? 235 : 227);
}

inline std::string at(std::size_t offset) { return " (byte offset " + std::to_string(offset) + ")"; }

}  // namespace las_detail

/// Decodes a LAS byte buffer. Bounds are recomputed from the decoded points.
[[nodiscard]] inline PointCloud decode_las(const std::vector<std::uint8_t>& buf) {
    using namespace las_detail;
    if (buf.size() < 227) throw Error(ErrorCode::CorruptHeader, "file shorter than a LAS 1.2 header" + at(buf.size()));
    if (std::memcmp(buf.data(), "LASF", 4) != 0) throw Error(ErrorCode::CorruptHeader, "missing LASF signature" + at(0));
    const auto major = buf[24];
    const auto minor = buf[25];
    if (major != 1 || minor < 2 || minor > 4) {
        throw Error(ErrorCode::UnsupportedFormat,
                    "LAS version " + std::to_string(major) + "." + std::to_string(minor) + " not supported" + at(24));
    }
    const auto header_size = load<std::uint16_t>(buf, 94);
    if (header_size < header_size_for(minor) || header_size > buf.size()) {
        throw Error(ErrorCode::CorruptHeader, "header size " + std::to_string(header_size) + " invalid" + at(94));
    }
    const auto point_offset = load<std::uint32_t>(buf, 96);
    if (point_offset < header_size || point_offset > buf.size()) {
        throw Error(ErrorCode::CorruptHeader, "offset to point data " + std::to_string(point_offset) + " invalid" + at(96));
    }
    const std::uint8_t raw_format = buf[104];
    if (raw_format & 0xC0) {
        throw Error(ErrorCode::UnsupportedFormat, "compressed (LAZ) point data is not supported" + at(104));
    }
    const std::uint8_t format = raw_format & 0x3F;
    const std::size_t min_len = min_record_length(format);
    if (min_len == 0) {
        throw Error(ErrorCode::UnsupportedFormat, "point data format " + std::to_string(format) + " not supported" + at(104));
    }
    const auto record_length = load<std::uint16_t>(buf, 105);
    if (record_length < min_len) {
        throw Error(ErrorCode::CorruptHeader, "point record length " + std::to_string(record_length) +
                                                  " below minimum for format " + std::to_string(format) + at(105));
    }
    std::uint64_t count = load<std::uint32_t>(buf, 107);
    if (minor >= 4) {
        const auto count64 = load<std::uint64_t>(buf, 247);
        if (count == 0 || format >= 6) count = count64;
    }
    const auto sx = load<double>(buf, 131), sy = load<double>(buf, 139), sz = load<double>(buf, 147);
    const auto ox = load<double>(buf, 155), oy = load<double>(buf, 163), oz = load<double>(buf, 171);
    if (!(sx > 0.0 && sy > 0.0 && sz > 0.0) || !std::isfinite(ox) || !std::isfinite(oy) || !std::isfinite(oz)) {
        throw Error(ErrorCode::CorruptHeader, "non-positive scale or non-finite offset" + at(131));
    }

    const std::uint64_t available = (buf.size() - point_offset) / record_length;
    if (available < count) {
        const std::uint64_t end = point_offset + available * record_length;
        throw Error(ErrorCode::TruncatedPayload, "header declares " + std::to_string(count) + " points but only " +
                                                     std::to_string(available) + " complete records present" +
                                                     at(static_cast<std::size_t>(end)));
    }

    std::vector<PointRecord> points;
    points.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::size_t base = point_offset + static_cast<std::size_t>(i) * record_length;
        PointRecord p;
        p.x = load<std::int32_t>(buf, base) * sx + ox;
        p.y = load<std::int32_t>(buf, base + 4) * sy + oy;
        p.z = load<std::int32_t>(buf, base + 8) * sz + oz;
        p.intensity = load<std::uint16_t>(buf, base + 12);
        if (format < 6) {
            const std::uint8_t bits = buf[base + 14];
            p.echo_number = bits & 0x07;
            p.num_returns = (bits >> 3) & 0x07;
            p.class_label = buf[base + 15] & 0x1F;
        } else {
            const std::uint8_t bits = buf[base + 14];
            p.echo_number = bits & 0x0F;
            p.num_returns = (bits >> 4) & 0x0F;
            p.class_label = buf[base + 16];
        }
        if (p.echo_number == 0 || p.num_returns == 0 || p.echo_number > p.num_returns) {
            throw Error(ErrorCode::CorruptHeader, "point " + std::to_string(i) + " has invalid return numbering" + at(base + 14));
        }
        points.push_back(p);
    }
    return PointCloud(std::move(points));
}

[[nodiscard]] inline PointCloud read_las(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".laz") throw Error(ErrorCode::UnsupportedFormat, "LAZ files are not supported: " + path.string() + las_detail::at(0));
    return decode_las(read_file_bytes(path));
}

struct LasWriteOptions {
    std::uint8_t point_format = 1;
    std::uint8_t version_minor = 2;
    std::array<double, 3> scale{0.01, 0.01, 0.01};
    std::array<double, 3> offset{0.0, 0.0, 0.0};
};

/// Encodes a cloud as LAS. Coordinates are quantized with round((v - offset) / scale).
[[nodiscard]] inline std::vector<std::uint8_t> encode_las(const PointCloud& cloud, const LasWriteOptions& opt = {}) {
    using namespace las_detail;
    const std::size_t rec_len = min_record_length(opt.point_format);
    if (rec_len == 0) throw Error(ErrorCode::UnsupportedFormat, "cannot write point format " + std::to_string(opt.point_format));
    if (opt.version_minor < 2 || opt.version_minor > 4) throw Error(ErrorCode::UnsupportedFormat, "cannot write LAS 1." + std::to_string(opt.version_minor));
    if (opt.point_format == 6 && opt.version_minor < 4) throw Error(ErrorCode::UnsupportedFormat, "point format 6 requires LAS 1.4");

    const std::uint16_t header_size = header_size_for(opt.version_minor);
    const std::size_t n = cloud.size();
    std::vector<std::uint8_t> buf(header_size + n * rec_len, 0);
    std::memcpy(buf.data(), "LASF", 4);
    buf[24] = 1;
    buf[25] = opt.version_minor;
    const char system_id[] = "terrarast";
    std::memcpy(buf.data() + 26, system_id, sizeof(system_id) - 1);
    std::memcpy(buf.data() + 58, system_id, sizeof(system_id) - 1);
    store<std::uint16_t>(buf, 94, header_size);
    store<std::uint32_t>(buf, 96, header_size);
    store<std::uint32_t>(buf, 100, 0);
    buf[104] = opt.point_format;
    store<std::uint16_t>(buf, 105, static_cast<std::uint16_t>(rec_len));

    const bool legacy_ok = opt.point_format < 6 && n <= 0xFFFFFFFFull;
    std::array<std::uint64_t, 15> by_return{};
    for (const auto& p : cloud.points()) {
        if (p.echo_number >= 1 && p.echo_number <= 15) ++by_return[p.echo_number - 1];
    }
    store<std::uint32_t>(buf, 107, legacy_ok ? static_cast<std::uint32_t>(n) : 0u);
    for (std::size_t r = 0; r < 5; ++r) {
        store<std::uint32_t>(buf, 111 + 4 * r, legacy_ok ? static_cast<std::uint32_t>(by_return[r]) : 0u);
    }
    for (std::size_t a = 0; a < 3; ++a) {
        store<double>(buf, 131 + 8 * a, opt.scale[a]);
        store<double>(buf, 155 + 8 * a, opt.offset[a]);
    }
    if (const auto& b = cloud.bounds()) {
        store<double>(buf, 179, b->max_x);
        store<double>(buf, 187, b->min_x);
        store<double>(buf, 195, b->max_y);
        store<double>(buf, 203, b->min_y);
        store<double>(buf, 211, b->max_z);
        store<double>(buf, 219, b->min_z);
    }
    if (opt.version_minor >= 4) {
        store<std::uint64_t>(buf, 247, n);
        for (std::size_t r = 0; r < 15; ++r) store<std::uint64_t>(buf, 255 + 8 * r, by_return[r]);
    }

    const auto quantize = [&](double v, std::size_t axis, std::size_t index) {
        const double q = std::round((v - opt.offset[axis]) / opt.scale[axis]);
        if (!(q >= -2147483648.0 && q <= 2147483647.0)) {
            throw Error(ErrorCode::InvalidArgument, "point " + std::to_string(index) + " does not fit the LAS integer range");
        }
        return static_cast<std::int32_t>(q);
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = cloud[i];
        const std::size_t base = header_size + i * rec_len;
        store<std::int32_t>(buf, base, quantize(p.x, 0, i));
        store<std::int32_t>(buf, base + 4, quantize(p.y, 1, i));
        store<std::int32_t>(buf, base + 8, quantize(p.z, 2, i));
        store<std::uint16_t>(buf, base + 12, p.intensity);
        if (opt.point_format < 6) {
            if (p.echo_number > 7 || p.num_returns > 7 || p.class_label > 31) {
                throw Error(ErrorCode::InvalidArgument, "point " + std::to_string(i) + " fields exceed legacy format limits");
            }
            buf[base + 14] = static_cast<std::uint8_t>((p.echo_number & 0x07) | ((p.num_returns & 0x07) << 3));
            buf[base + 15] = p.class_label;
        } else {
            if (p.echo_number > 15 || p.num_returns > 15) {
                throw Error(ErrorCode::InvalidArgument, "point " + std::to_string(i) + " return numbers exceed 15");
            }
            buf[base + 14] = static_cast<std::uint8_t>((p.echo_number & 0x0F) | ((p.num_returns & 0x0F) << 4));
            buf[base + 16] = p.class_label;
        }
    }
    return buf;
}


inline void write_las(const PointCloud& cloud, const std::filesystem::path& path, const LasWriteOptions& opt = {}) {
    write_file_atomic(path, encode_las(cloud, opt));
}

}  // namespace terrarast
