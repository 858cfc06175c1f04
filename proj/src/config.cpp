#include "kbrel/config.hpp"

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kbrel/errors.hpp"
#include "kbrel/jsonl.hpp"
#include "kbrel/text.hpp"

namespace kbrel {

IniSections parse_ini(const std::string& content) {
    IniSections sections;
    std::string current;
    std::istringstream in(content);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']') {
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unterminated section header");
            }
            current = trim(stripped.substr(1, stripped.size() - 2));
            sections[current];
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        }
        sections[current][key] = value;
    }
    return sections;
}

namespace {
std::filesystem::path resolve(const std::filesystem::path& base_dir,
                              const std::string& value) {
    if (value.empty()) return {};
    std::filesystem::path p(value);
    if (p.is_absolute()) return p;
    return base_dir / p;
}

std::string get(const std::map<std::string, std::string>& kv, const std::string& key,
                const std::string& fallback = "") {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}
}  // namespace

BackendConfig backend_config_from(const std::map<std::string, std::string>& kv,
                                  const std::filesystem::path& base_dir) {
    BackendConfig config;
    config.kind = get(kv, "kind", "scripted");
    if (config.kind != "http" && config.kind != "scripted") {
        throw ConfigError("backend kind must be http or scripted, got " + config.kind);
    }
    config.name = get(kv, "name");
    config.base_url = get(kv, "base_url");
    config.model = get(kv, "model");
    config.mode = get(kv, "mode", "chat");
    if (config.mode != "chat" && config.mode != "completion") {
        throw ConfigError("backend mode must be chat or completion, got " + config.mode);
    }
    if (const std::string v = get(kv, "max_concurrency"); !v.empty()) {
        config.max_concurrency = std::stoi(v);
    }
    if (const std::string v = get(kv, "requests_per_minute"); !v.empty()) {
        config.requests_per_minute = std::stod(v);
    }
    if (const std::string v = get(kv, "timeout_seconds"); !v.empty()) {
        config.timeout_seconds = std::stoi(v);
    }
    config.table = resolve(base_dir, get(kv, "table"));
    config.rules = resolve(base_dir, get(kv, "rules"));
    if (kv.count("default")) config.default_reply = kv.at("default");
    if (const std::string v = get(kv, "dim"); !v.empty()) config.dim = std::stoi(v);
    if (config.kind == "http" && config.base_url.empty()) {
        throw ConfigError("http backend needs base_url");
    }
    return config;
}

BackendConfig load_backend_config(const std::filesystem::path& path,
                                  const std::string& preferred_section) {
    const IniSections sections = parse_ini(read_file(path));
    const std::filesystem::path base_dir = path.parent_path();
    if (auto it = sections.find(preferred_section); it != sections.end()) {
        return backend_config_from(it->second, base_dir);
    }
    if (auto it = sections.find(""); it != sections.end() && !it->second.empty()) {
        return backend_config_from(it->second, base_dir);
    }
    if (!sections.empty()) {
        return backend_config_from(sections.begin()->second, base_dir);
    }
    throw ConfigError("no backend configuration found in " + path.string());
}

std::unique_ptr<Responder> make_responder(const BackendConfig& config) {
    if (config.kind == "http") {
        HttpBackendOptions options;
        options.base_url = config.base_url;
        options.model = config.model;
        options.mode = config.mode;
        options.name = config.name;
        options.max_concurrency = config.max_concurrency;
        options.requests_per_minute = config.requests_per_minute;
        options.timeout_seconds = config.timeout_seconds;
        return std::make_unique<HttpResponder>(std::move(options));
    }
    auto scripted = std::make_unique<ScriptedResponder>(
        config.default_reply, config.name.empty() ? "scripted" : config.name);
    if (!config.table.empty()) {
        for (const json& row : read_jsonl(config.table)) {
            scripted->add_exact(row.at("prompt").get<std::string>(),
                                row.at("completion").get<std::string>());
        }
    }
    if (!config.rules.empty()) {
        for (const json& row : read_jsonl(config.rules)) {
            scripted->add_rule(row.at("contains").get<std::string>(),
                               row.at("completion").get<std::string>());
        }
    }
    return scripted;
}

std::unique_ptr<Embedder> make_embedder(const BackendConfig& config) {
    if (config.kind == "http") {
        HttpBackendOptions options;
        options.base_url = config.base_url;
        options.model = config.model;
        options.name = config.name;
        options.max_concurrency = config.max_concurrency;
        options.requests_per_minute = config.requests_per_minute;
        options.timeout_seconds = config.timeout_seconds;
        return std::make_unique<HttpEmbedder>(std::move(options));
    }
    return std::make_unique<ScriptedEmbedder>(
        config.dim, config.name.empty() ? "scripted-embedder" : config.name);
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    const IniSections sections = parse_ini(read_file(path));
    const std::filesystem::path base_dir = path.parent_path();

    RunConfig config;
    if (auto it = sections.find("model"); it != sections.end()) {
        config.model = backend_config_from(it->second, base_dir);
    } else {
        throw ConfigError("config needs a [model] section");
    }
    if (auto it = sections.find("judge"); it != sections.end()) {
        config.judge = backend_config_from(it->second, base_dir);
    } else {
        config.judge = config.model;
    }
    if (auto it = sections.find("embedder"); it != sections.end()) {
        config.embedder = backend_config_from(it->second, base_dir);
    }

    const auto datasets = sections.find("datasets");
    if (datasets == sections.end() || !datasets->second.count("seen") ||
        !datasets->second.count("unseen")) {
        throw ConfigError("config needs [datasets] with seen and unseen paths");
    }
    config.seen_path = resolve(base_dir, datasets->second.at("seen"));
    config.unseen_path = resolve(base_dir, datasets->second.at("unseen"));
    config.r_seen_path = resolve(base_dir, get(datasets->second, "r_seen"));
    config.r_unseen_path = resolve(base_dir, get(datasets->second, "r_unseen"));

    std::string kinds = "zero-shot";
    if (auto it = sections.find("settings"); it != sections.end()) {
        kinds = get(it->second, "kinds", kinds);
    }
    for (std::string piece; !kinds.empty();) {
        const std::size_t comma = kinds.find(',');
        piece = trim(kinds.substr(0, comma));
        if (!piece.empty()) config.settings.push_back(setting_kind_from_string(piece));
        if (comma == std::string::npos) break;
        kinds.erase(0, comma + 1);
    }
    if (config.settings.empty()) throw ConfigError("no prompt settings configured");

    std::map<std::string, std::string> run;
    if (auto it = sections.find("run"); it != sections.end()) run = it->second;
    if (const std::string v = get(run, "seed"); !v.empty()) config.seed = std::stoull(v);
    if (const std::string v = get(run, "x_mcqs"); !v.empty()) config.x_mcqs = std::stoi(v);
    if (const std::string v = get(run, "workers"); !v.empty()) config.workers = std::stoi(v);
    std::string cache_dir = get(run, "cache_dir");
    if (cache_dir.empty()) {
        if (const char* env = std::getenv("KBREL_CACHE_DIR"); env && *env) cache_dir = env;
    }
    if (cache_dir.empty()) cache_dir = "cache";
    config.cache_dir = resolve(base_dir, cache_dir);
    config.output_dir = resolve(base_dir, get(run, "output_dir", "out"));
    config.unsure_phrases = resolve(base_dir, get(run, "unsure_phrases"));
    return config;
}

std::string RunConfig::canonical() const {
    nlohmann::json j;
    auto backend = [](const BackendConfig& b) {
        nlohmann::json out;
        out["kind"] = b.kind;
        out["name"] = b.name;
        out["base_url"] = b.base_url;
        out["model"] = b.model;
        out["mode"] = b.mode;
        out["table"] = b.table.string();
        out["rules"] = b.rules.string();
        out["default"] = b.default_reply;
        out["dim"] = b.dim;
        return out;
    };
    j["model"] = backend(model);
    j["judge"] = backend(judge);
    j["embedder"] = backend(embedder);
    j["seen"] = seen_path.string();
    j["unseen"] = unseen_path.string();
    j["r_seen"] = r_seen_path.string();
    j["r_unseen"] = r_unseen_path.string();
    std::vector<std::string> names;
    names.reserve(settings.size());
    for (SettingKind kind : settings) names.push_back(to_string(kind));
    j["settings"] = names;
    j["seed"] = seed;
    j["x_mcqs"] = x_mcqs;
    return j.dump();
}

}  // namespace kbrel
