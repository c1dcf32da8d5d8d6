#pragma once

// Dataset manifest: the list of tiles with their train/val/test split.
//
// JSON schema:
//   {"seed": <uint64>, "tiles": [{"cloud_path": str, "dtm_path": str, "split": "train"|"val"|"test"}, ...]}

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "terrarast/error.hpp"
#include "terrarast/fileio.hpp"

namespace terrarast {

enum class Split { train, val, test };

[[nodiscard]] inline std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "train";
}

[[nodiscard]] inline Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw Error(ErrorCode::ParseError, "unknown split '" + s + "'");
}

struct TileEntry {
    std::string cloud_path;
    std::string dtm_path;
    std::optional<Split> split;  // unset: assigned by make_manifest
};

struct Manifest {
    std::uint64_t seed = 0;
    std::vector<TileEntry> tiles;  // every split set
};

struct SplitFractions {
    double train = 0.5;
    double val = 0.25;
};

/// Assigns a split to every tile without one: the unassigned tiles are shuffled with a
/// seeded mt19937_64 and the first round(n*train) become train, the next round(n*val) val,
/// the rest test. Tiles that already carry a split keep it.
[[nodiscard]] inline Manifest make_manifest(std::vector<TileEntry> tiles, std::uint64_t seed, SplitFractions fractions = {}) {
    std::set<std::string> seen;
    for (const auto& t : tiles) {
        if (!seen.insert(t.cloud_path).second) throw Error(ErrorCode::DuplicateTile, "tile '" + t.cloud_path + "' listed twice");
    }
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        if (!tiles[i].split) open.push_back(i);
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = open.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(open[i - 1], open[j]);
    }
    const auto n = static_cast<double>(open.size());
    const auto n_train = static_cast<std::size_t>(std::llround(n * fractions.train));
    const auto n_val = std::min(open.size() - std::min(open.size(), n_train), static_cast<std::size_t>(std::llround(n * fractions.val)));
    for (std::size_t k = 0; k < open.size(); ++k) {
        tiles[open[k]].split = k < n_train ? Split::train : (k < n_train + n_val ? Split::val : Split::test);
    }
    return {seed, std::move(tiles)};
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const Manifest& m) {
    nlohmann::ordered_json j;
    j["seed"] = m.seed;
    j["tiles"] = nlohmann::ordered_json::array();
    for (const auto& t : m.tiles) {
        j["tiles"].push_back({{"cloud_path", t.cloud_path}, {"dtm_path", t.dtm_path}, {"split", to_string(t.split.value_or(Split::train))}});
    }
    return j;
}

[[nodiscard]] inline Manifest manifest_from_json(const nlohmann::json& j) {
    try {
        std::vector<TileEntry> tiles;
        for (const auto& t : j.at("tiles")) {
            TileEntry e{t.at("cloud_path").get<std::string>(), t.value("dtm_path", std::string{}), std::nullopt};
            if (t.contains("split") && !t["split"].is_null()) e.split = split_from_string(t["split"].get<std::string>());
            tiles.push_back(std::move(e));
        }
        return make_manifest(std::move(tiles), j.value("seed", std::uint64_t{0}));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
    }
}

inline void write_manifest(const Manifest& m, const std::filesystem::path& path) {
    write_file_atomic(path, to_json(m).dump(2) + "\n");
}

[[nodiscard]] inline Manifest read_manifest(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return manifest_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
    }
}

}  // namespace terrarast
