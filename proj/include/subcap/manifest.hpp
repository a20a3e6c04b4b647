#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace subcap {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

struct OutputFile {
    std::string name; // relative to the output directory
    std::string sha256;
    std::uintmax_t bytes;
};

struct RunManifest {
    std::string config_json; // dump_config of the effective config
    std::string tool_version;
    std::uint64_t seed;
    std::vector<OutputFile> outputs; // sorted by name
    double duration_seconds;
    std::string notes_json; // experiment-specific JSON object
};

std::string tool_version();

/// Hashes the named files under `dir`, sorted by name.
std::vector<OutputFile> checksum_outputs(const std::filesystem::path& dir, std::vector<std::string> names);

std::string manifest_to_json(const RunManifest& manifest);

/// Recomputes every checksum listed in a manifest file; returns the names that differ.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path);

} // namespace subcap
