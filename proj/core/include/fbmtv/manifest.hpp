#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fbmtv {

/** SHA-256 digest as a lowercase hex string. */
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& data);
std::string sha256_file_hex(const std::string& path);

/** Current time as an ISO-8601 UTC timestamp. */
std::string utc_timestamp_now();

/** Sidecar path for an output artifact: `<output>.manifest.json`. */
std::string manifest_path_for(const std::string& output_path);

/**
 * Reproducibility sidecar written next to every output artifact: what
 * produced the file, with what configuration and seed, and the digest of
 * everything written.  Timestamps live here — and only here — so the
 * artifacts themselves stay bit-for-bit reproducible.
 */
struct RunManifest {
    std::string tool_version;
    std::string command;     // the invocation, reassembled from argv
    std::string config_echo; // canonical flat config text, empty if none
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    std::vector<std::pair<std::string, std::string>> outputs; // (path, sha256)

    /** Record `path` (which must exist) with its fresh digest. */
    void add_output(const std::string& path);

    std::string to_json() const;
    /** Serialize to `manifest_path_for(primary_output)`. */
    void write_beside(const std::string& primary_output) const;
};

} // namespace fbmtv
