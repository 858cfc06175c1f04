#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kbrel/backends.hpp"
#include "kbrel/prompting.hpp"

namespace kbrel {

// INI-style sections: "[name]" headers, "key = value" lines, "#"/";"
// comments. Values keep internal whitespace.
using IniSections = std::map<std::string, std::map<std::string, std::string>>;
IniSections parse_ini(const std::string& content);

struct BackendConfig {
    std::string kind = "scripted";  // "http" or "scripted"
    std::string name;               // cache/backend id; defaults per kind

    // http
    std::string base_url;
    std::string model;
    std::string mode = "chat";  // "chat" or "completion"
    int max_concurrency = 4;
    double requests_per_minute = 0;
    int timeout_seconds = 120;

    // scripted
    std::filesystem::path table;  // exact prompt -> completion, JSONL
    std::filesystem::path rules;  // substring -> completion, JSONL
    std::string default_reply = "unsure";
    int dim = 32;  // scripted embedder dimension
};

BackendConfig backend_config_from(const std::map<std::string, std::string>& kv,
                                  const std::filesystem::path& base_dir);

// Reads a backend config from `path`: either a bare key-value file or a file
// with a [section] matching `preferred_section` (falling back to the first
// section present).
BackendConfig load_backend_config(const std::filesystem::path& path,
                                  const std::string& preferred_section);

std::unique_ptr<Responder> make_responder(const BackendConfig& config);
std::unique_ptr<Embedder> make_embedder(const BackendConfig& config);

struct RunConfig {
    BackendConfig model;
    BackendConfig judge;
    BackendConfig embedder;

    std::filesystem::path seen_path;
    std::filesystem::path unseen_path;
    std::filesystem::path r_seen_path;    // required for few-shot settings
    std::filesystem::path r_unseen_path;  // required for four-shot-2

    std::vector<SettingKind> settings;
    std::uint64_t seed = 0;
    int x_mcqs = 20;
    int workers = 4;
    std::filesystem::path cache_dir;
    std::filesystem::path output_dir;
    std::filesystem::path unsure_phrases;  // optional hedge-phrase override

    // Parses the config file; relative paths resolve against its directory.
    // KBREL_CACHE_DIR supplies the cache dir when the file does not.
    static RunConfig load(const std::filesystem::path& path);

    // Canonical serialization used for the manifest's config hash.
    std::string canonical() const;
};

}  // namespace kbrel
