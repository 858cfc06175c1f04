#include "kbrel/cache.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "kbrel/errors.hpp"
#include "kbrel/jsonl.hpp"

namespace kbrel {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, data.data(), data.size());
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string cache_key(const CacheKeyInputs& inputs) {
    nlohmann::json j;
    j["backend"] = inputs.backend_id;
    j["mode"] = inputs.mode;
    j["prompt"] = inputs.prompt;
    j["temperature"] = inputs.decoding.temperature;
    j["max_new_tokens"] = inputs.decoding.max_new_tokens;
    return sha256_hex(j.dump());
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::lookup(const CacheKeyInputs& inputs) const {
    const std::string key = cache_key(inputs);
    const std::filesystem::path path = entry_path(key);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        nlohmann::json entry = nlohmann::json::parse(in);
        CacheKeyInputs stored;
        stored.backend_id = entry.at("backend").get<std::string>();
        stored.mode = entry.at("mode").get<std::string>();
        stored.prompt = entry.at("prompt").get<std::string>();
        stored.decoding.temperature = entry.at("temperature").get<double>();
        stored.decoding.max_new_tokens = entry.at("max_new_tokens").get<int>();
        if (cache_key(stored) != key) {
            // Entry does not hash to its filename: corrupt, recompute.
            std::filesystem::remove(path);
            return std::nullopt;
        }
        return entry.at("completion").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        std::error_code ec;
        std::filesystem::remove(path, ec);
        return std::nullopt;
    }
}

void ResponseCache::store(const CacheKeyInputs& inputs, const std::string& completion) const {
    const std::string key = cache_key(inputs);
    nlohmann::ordered_json entry;
    entry["backend"] = inputs.backend_id;
    entry["mode"] = inputs.mode;
    entry["prompt"] = inputs.prompt;
    entry["temperature"] = inputs.decoding.temperature;
    entry["max_new_tokens"] = inputs.decoding.max_new_tokens;
    entry["completion"] = completion;
    entry["created_at"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    atomic_write(entry_path(key), entry.dump());
}

std::string ResponseCache::get_or_call(const CacheKeyInputs& inputs,
                                       const std::function<std::string()>& caller) const {
    if (auto hit = lookup(inputs)) return *hit;
    const std::string value = caller();
    store(inputs, value);
    return value;
}

std::string CachedResponder::respond(const std::string& prompt,
                                     const DecodingParams& decoding) {
    const CacheKeyInputs inputs{inner_.id(), inner_.mode(), prompt, decoding};
    return cache_.get_or_call(inputs, [&] { return inner_.respond(prompt, decoding); });
}

std::string CachedResponder::respond_fresh(const std::string& prompt,
                                           const DecodingParams& decoding) {
    const CacheKeyInputs inputs{inner_.id(), inner_.mode(), prompt, decoding};
    const std::string value = inner_.respond(prompt, decoding);
    cache_.store(inputs, value);
    return value;
}

std::vector<double> CachedEmbedder::embed(const std::string& text) {
    const CacheKeyInputs inputs{inner_.id(), "embeddings", text, DecodingParams{0.0, 0}};
    const std::string packed = cache_.get_or_call(inputs, [&] {
        return nlohmann::json(inner_.embed(text)).dump();
    });
    try {
        return nlohmann::json::parse(packed).get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponse("cached embedding unreadable: " + std::string(e.what()));
    }
}

}  // namespace kbrel
