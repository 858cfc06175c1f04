#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace kbrel {

// Reference decoding contract for evaluated models: greedy, at most 100 new
// tokens. Judges use the same temperature with a 512-token limit.
struct DecodingParams {
    double temperature = 0.0;
    int max_new_tokens = 100;

    bool operator==(const DecodingParams&) const = default;
};

inline DecodingParams judge_decoding() { return DecodingParams{0.0, 512}; }

// Text-completion backend. Implementations must be safe to call from many
// workers at once.
class Responder {
  public:
    virtual ~Responder() = default;
    virtual std::string respond(const std::string& prompt,
                                const DecodingParams& decoding) = 0;
    // Stable identifier, part of the response-cache key.
    virtual std::string id() const = 0;
    // Wire mode ("chat", "completion", "scripted"); also part of the key.
    virtual std::string mode() const = 0;
    // Number of times respond() actually executed (not served from a cache).
    virtual long invocations() const = 0;
};

class Embedder {
  public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual std::string id() const = 0;
    virtual long invocations() const = 0;
};

// Deterministic lookup backend for tests and offline runs. Resolution order:
// exact prompt match, then first substring rule, then the default reply.
class ScriptedResponder : public Responder {
  public:
    explicit ScriptedResponder(std::string default_reply = "unsure",
                               std::string name = "scripted");

    void add_exact(std::string prompt, std::string completion);
    // Rules fire when `needle` occurs anywhere in the prompt; first match wins.
    void add_rule(std::string needle, std::string completion);

    std::string respond(const std::string& prompt,
                        const DecodingParams& decoding) override;
    std::string id() const override { return name_; }
    std::string mode() const override { return "scripted"; }
    long invocations() const override { return calls_.load(); }

  private:
    std::string default_reply_;
    std::string name_;
    std::map<std::string, std::string> exact_;
    std::vector<std::pair<std::string, std::string>> rules_;
    std::atomic<long> calls_{0};
};

// Deterministic embedding backend: hashed character trigrams, L2-normalized.
// Gives lexically similar texts similar vectors, which is enough for
// retrieval plumbing in tests and offline runs.
class ScriptedEmbedder : public Embedder {
  public:
    explicit ScriptedEmbedder(int dim = 32, std::string name = "scripted-embedder");

    std::vector<double> embed(const std::string& text) override;
    std::string id() const override { return name_; }
    long invocations() const override { return calls_.load(); }
    int dim() const { return dim_; }

  private:
    int dim_;
    std::string name_;
    std::atomic<long> calls_{0};
};

// Blocks callers so that successive acquisitions are at least one interval
// apart. A non-positive rate disables limiting.
class RateLimiter {
  public:
    explicit RateLimiter(double per_minute);
    void acquire();

  private:
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_{};
    std::chrono::duration<double> interval_{0};
};

// Counting semaphore bounding in-flight requests per endpoint.
class ConcurrencyLimiter {
  public:
    explicit ConcurrencyLimiter(int max_in_flight);
    void acquire();
    void release();

  private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

struct HttpBackendOptions {
    std::string base_url;             // e.g. https://api.openai.com
    std::string model;
    std::string mode = "chat";        // "chat" or "completion"
    std::string name;                 // defaults to model
    int max_concurrency = 4;
    double requests_per_minute = 0;   // 0 = unlimited
    int timeout_seconds = 120;
    std::string api_key_env = "KBREL_API_KEY";
};

// OpenAI-compatible client for /v1/chat/completions and /v1/completions.
// Transient failures (connect errors, timeouts, 429, 5xx) are retried three
// times with exponential backoff.
class HttpResponder : public Responder {
  public:
    explicit HttpResponder(HttpBackendOptions options);

    std::string respond(const std::string& prompt,
                        const DecodingParams& decoding) override;
    std::string id() const override;
    std::string mode() const override { return options_.mode; }
    long invocations() const override { return calls_.load(); }

  private:
    HttpBackendOptions options_;
    RateLimiter rate_limiter_;
    ConcurrencyLimiter concurrency_;
    std::atomic<long> calls_{0};
};

// OpenAI-compatible client for /v1/embeddings.
class HttpEmbedder : public Embedder {
  public:
    explicit HttpEmbedder(HttpBackendOptions options);

    std::vector<double> embed(const std::string& text) override;
    std::string id() const override;
    long invocations() const override { return calls_.load(); }

  private:
    HttpBackendOptions options_;
    RateLimiter rate_limiter_;
    ConcurrencyLimiter concurrency_;
    std::atomic<long> calls_{0};
};

// Cuts a raw completion at the first line starting with "QUESTION:" and
// trims the result. Completion-style models keep following the few-shot
// pattern; everything after the marker is the model talking to itself.
std::string truncate_completion(const std::string& raw);

}  // namespace kbrel
