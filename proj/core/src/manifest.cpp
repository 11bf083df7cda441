#include "hybridsim/manifest.hpp"

#include "hybridsim/errors.hpp"
#include "hybridsim/version.hpp"

#include <cstdio>
#include <fstream>

namespace hybridsim {

std::string file_hash_hex(const std::string& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError("file_hash_hex: cannot open " + file);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[8192];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        const auto n = static_cast<std::size_t>(is.gcount());
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!is) break;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

nlohmann::json RunManifest::to_json(const std::string& base_dir) const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    j["version"] = std::string("hybridsim ") + version_string();
    j["platform"] = {
        {"compiler",
#if defined(__clang__)
         std::string("clang ") + __clang_version__
#elif defined(__GNUC__)
         std::string("gcc ") + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__)
#else
         "unknown"
#endif
        },
        {"pointer_bits", static_cast<int>(sizeof(void*) * 8)},
        {"float_format", "ieee754-binary64"},
    };
    j["outputs"] = nlohmann::json::array();
    for (const std::string& f : output_files) {
        j["outputs"].push_back({{"file", f}, {"fnv1a64", file_hash_hex(base_dir + "/" + f)}});
    }
    return j;
}

std::string write_manifest(const RunManifest& manifest, const std::string& dir) {
    const std::string path = dir + "/manifest.json";
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("write_manifest: cannot open " + path);
    os << manifest.to_json(dir).dump(2) << "\n";
    if (!os) throw IoError("write_manifest: write failure on " + path);
    return path;
}

} // namespace hybridsim
