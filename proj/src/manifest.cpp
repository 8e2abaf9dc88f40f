#include "gcur/manifest.hpp"

#include "gcur/config_io.hpp"
#include "gcur/noise.hpp"

#include "json.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace gcur {

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("manifest: cannot open " + path);
    uint64_t h = 14695981039346656037ull;
    char buf[1 << 14];
    while (is) {
        is.read(buf, sizeof buf);
        const std::streamsize n = is.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= uint8_t(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void add_output(RunManifest& m, const std::string& out_dir, const std::string& rel_path) {
    const std::string full = out_dir + "/" + rel_path;
    std::ifstream is(full, std::ios::binary | std::ios::ate);
    if (!is) throw std::runtime_error("manifest: missing output " + full);
    RunManifest::FileEntry e;
    e.path = rel_path;
    e.bytes = uint64_t(is.tellg());
    is.close();
    e.fnv1a64 = hex64(fnv1a64_file(full));
    m.outputs.push_back(std::move(e));
}

void write_manifest(const RunManifest& m, const std::string& out_dir) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(m.config_json);
    j["command"] = m.command;
    j["rng"] = kRngId;
    j["code_version"] = kCodeVersion;
    j["started_utc"] = m.started_utc;
    j["finished_utc"] = m.finished_utc;
    j["hash_algorithm"] = "fnv1a64";
    for (const auto& e : m.outputs) {
        nlohmann::json f;
        f["path"] = e.path;
        f["bytes"] = e.bytes;
        f["fnv1a64"] = e.fnv1a64;
        j["outputs"].push_back(f);
    }
    if (m.outputs.empty()) j["outputs"] = nlohmann::json::array();
    std::ofstream os(out_dir + "/manifest.json", std::ios::trunc);
    if (!os) throw std::runtime_error("manifest: cannot write " + out_dir + "/manifest.json");
    os << j.dump(2) << "\n";
}

} // namespace gcur
