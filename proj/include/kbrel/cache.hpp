#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kbrel/backends.hpp"

namespace kbrel {

std::string sha256_hex(std::string_view data);

struct CacheKeyInputs {
    std::string backend_id;
    std::string mode;
    std::string prompt;
    DecodingParams decoding;
};

// key = sha256 over the canonical serialization of all inputs, so the same
// prompt sent through a different backend or wire mode never collides.
std::string cache_key(const CacheKeyInputs& inputs);

// File-per-entry response cache. Every entry stores its own key inputs; a
// stored entry whose recomputed key does not match its filename (truncated
// or corrupted file) is discarded and recomputed.
class ResponseCache {
  public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> lookup(const CacheKeyInputs& inputs) const;
    void store(const CacheKeyInputs& inputs, const std::string& completion) const;

    // Returns the cached value when present, otherwise invokes `caller`,
    // persists the result atomically, and returns it.
    std::string get_or_call(const CacheKeyInputs& inputs,
                            const std::function<std::string()>& caller) const;

    const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path entry_path(const std::string& key) const;
    std::filesystem::path dir_;
};

// Responder decorator routing every call through the cache. invocations()
// reports the inner backend's count, i.e. actual (non-cached) calls.
class CachedResponder : public Responder {
  public:
    CachedResponder(Responder& inner, const ResponseCache& cache)
        : inner_(inner), cache_(cache) {}

    std::string respond(const std::string& prompt,
                        const DecodingParams& decoding) override;
    // Bypasses the cached value, re-asks the backend and overwrites the entry.
    std::string respond_fresh(const std::string& prompt,
                              const DecodingParams& decoding);
    std::string id() const override { return inner_.id(); }
    std::string mode() const override { return inner_.mode(); }
    long invocations() const override { return inner_.invocations(); }

  private:
    Responder& inner_;
    const ResponseCache& cache_;
};

class CachedEmbedder : public Embedder {
  public:
    CachedEmbedder(Embedder& inner, const ResponseCache& cache)
        : inner_(inner), cache_(cache) {}

    std::vector<double> embed(const std::string& text) override;
    std::string id() const override { return inner_.id(); }
    long invocations() const override { return inner_.invocations(); }

  private:
    Embedder& inner_;
    const ResponseCache& cache_;
};

}  // namespace kbrel
