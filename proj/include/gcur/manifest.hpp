#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gcur {

/// FNV-1a 64-bit content hash, hex-encoded.
uint64_t fnv1a64_file(const std::string& path);
std::string hex64(uint64_t v);

/// Run manifest: config echo, RNG id, code version, wall-clock bounds, and an
/// inventory of output files with content hashes. Written last so a missing
/// or partial manifest marks a crashed run.
struct RunManifest {
    std::string config_json;  // canonical config echo
    std::string command;
    std::string started_utc;
    std::string finished_utc;
    struct FileEntry {
        std::string path;  // relative to the output directory
        uint64_t bytes = 0;
        std::string fnv1a64;
    };
    std::vector<FileEntry> outputs;
};

std::string utc_now();

/// Hash and append an inventory entry for out_dir/rel_path.
void add_output(RunManifest& m, const std::string& out_dir, const std::string& rel_path);

/// Serialize and write out_dir/manifest.json.
void write_manifest(const RunManifest& m, const std::string& out_dir);

} // namespace gcur
