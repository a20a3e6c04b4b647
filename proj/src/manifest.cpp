#include "subcap/manifest.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#ifndef SUBCAP_VERSION
#define SUBCAP_VERSION "0.0.0"
#endif

namespace subcap {

namespace {

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

std::string sha256_hex(const std::string& bytes)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::string hex;
    for (unsigned int i = 0; i < length; ++i)
        hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string sha256_file(const std::filesystem::path& path)
{
    return sha256_hex(read_file(path));
}

std::string tool_version()
{
    return SUBCAP_VERSION;
}

std::vector<OutputFile> checksum_outputs(const std::filesystem::path& dir, std::vector<std::string> names)
{
    std::sort(names.begin(), names.end());
    std::vector<OutputFile> out;
    for (auto& name : names) {
        const auto path = dir / name;
        out.push_back({name, sha256_file(path), std::filesystem::file_size(path)});
    }
    return out;
}

std::string manifest_to_json(const RunManifest& m)
{
    nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
    for (const auto& f : m.outputs)
        outputs.push_back({{"file", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    nlohmann::ordered_json root;
    root["tool"] = "subcap";
    root["version"] = m.tool_version;
    root["seed"] = m.seed;
    root["config"] = nlohmann::ordered_json::parse(m.config_json);
    root["outputs"] = outputs;
    root["duration_seconds"] = m.duration_seconds;
    root["notes"] = m.notes_json.empty() ? nlohmann::ordered_json::object()
                                         : nlohmann::ordered_json::parse(m.notes_json);
    return root.dump(2) + "\n";
}

std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path)
{
    const auto root = nlohmann::json::parse(read_file(manifest_path));
    const auto dir = manifest_path.parent_path();
    std::vector<std::string> bad;
    for (const auto& f : root.at("outputs")) {
        const auto name = f.at("file").get<std::string>();
        const auto path = dir / name;
        if (!std::filesystem::exists(path) || sha256_file(path) != f.at("sha256").get<std::string>())
            bad.push_back(name);
    }
    return bad;
}

} // namespace subcap
