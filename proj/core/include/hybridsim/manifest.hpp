#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace hybridsim {

/// 64-bit FNV-1a over the file bytes, hex-encoded. Used to pin output files
/// in the run manifest.
std::string file_hash_hex(const std::string& file);

/// Every run emits a manifest with the resolved configuration, seed,
/// software version, a platform fingerprint, and the hash of each output.
struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::vector<std::string> output_files; // paths relative to the manifest

    nlohmann::json to_json(const std::string& base_dir) const;
};

/// Writes `<dir>/manifest.json` and returns its path.
std::string write_manifest(const RunManifest& manifest, const std::string& dir);

} // namespace hybridsim
