#include "kbrel/backends.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "kbrel/errors.hpp"
#include "kbrel/text.hpp"

namespace kbrel {

ScriptedResponder::ScriptedResponder(std::string default_reply, std::string name)
    : default_reply_(std::move(default_reply)), name_(std::move(name)) {}

void ScriptedResponder::add_exact(std::string prompt, std::string completion) {
    exact_[std::move(prompt)] = std::move(completion);
}

void ScriptedResponder::add_rule(std::string needle, std::string completion) {
    rules_.emplace_back(std::move(needle), std::move(completion));
}

std::string ScriptedResponder::respond(const std::string& prompt,
                                       const DecodingParams&) {
    calls_.fetch_add(1);
    if (auto it = exact_.find(prompt); it != exact_.end()) return it->second;
    for (const auto& [needle, completion] : rules_) {
        if (prompt.find(needle) != std::string::npos) return completion;
    }
    return default_reply_;
}

ScriptedEmbedder::ScriptedEmbedder(int dim, std::string name)
    : dim_(dim), name_(std::move(name)) {}

std::vector<double> ScriptedEmbedder::embed(const std::string& text) {
    calls_.fetch_add(1);
    std::vector<double> v(static_cast<std::size_t>(dim_), 0.0);
    const std::string lowered = to_lower(text);
    for (std::size_t i = 0; i + 2 < lowered.size() || (i < lowered.size() && lowered.size() < 3);
         ++i) {
        // FNV-1a over the trigram starting at i (shorter texts hash what exists).
        std::uint64_t h = 14695981039346656037ULL;
        for (std::size_t j = i; j < std::min(i + 3, lowered.size()); ++j) {
            h ^= static_cast<unsigned char>(lowered[j]);
            h *= 1099511628211ULL;
        }
        v[h % static_cast<std::uint64_t>(dim_)] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm == 0.0) {
        v[0] = 1.0;  // repositories forbid zero vectors
        return v;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

RateLimiter::RateLimiter(double per_minute) {
    if (per_minute > 0) {
        interval_ = std::chrono::duration<double>(60.0 / per_minute);
    }
}

void RateLimiter::acquire() {
    if (interval_.count() <= 0) return;
    std::chrono::steady_clock::time_point wake;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        if (next_ < now) next_ = now;
        wake = next_;
        next_ += std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval_);
    }
    std::this_thread::sleep_until(wake);
}

ConcurrencyLimiter::ConcurrencyLimiter(int max_in_flight)
    : available_(max_in_flight > 0 ? max_in_flight : 1) {}

void ConcurrencyLimiter::acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
}

void ConcurrencyLimiter::release() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++available_;
    }
    cv_.notify_one();
}

namespace {

struct ConcurrencySlot {
    explicit ConcurrencySlot(ConcurrencyLimiter& limiter) : limiter_(limiter) {
        limiter_.acquire();
    }
    ~ConcurrencySlot() { limiter_.release(); }
    ConcurrencyLimiter& limiter_;
};

struct HttpReply {
    int status = 0;
    std::string body;
};

HttpReply http_post(const HttpBackendOptions& options, const std::string& path,
                    const std::string& payload) {
    httplib::Client client(options.base_url);
    client.set_connection_timeout(options.timeout_seconds);
    client.set_read_timeout(options.timeout_seconds);
    client.set_write_timeout(options.timeout_seconds);
    httplib::Headers headers;
    if (const char* key = std::getenv(options.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto result = client.Post(path, headers, payload, "application/json");
    if (!result) {
        const auto err = result.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write) {
            throw EndpointTimeout(options.base_url + path + ": " + httplib::to_string(err));
        }
        throw BackendUnreachable(options.base_url + path + ": " + httplib::to_string(err));
    }
    return {result->status, result->body};
}

// Runs one POST with retry on transient failures: connect errors, timeouts,
// HTTP 429 and 5xx. Other failures surface immediately.
std::string post_with_retries(const HttpBackendOptions& options, const std::string& path,
                              const std::string& payload) {
    constexpr int kAttempts = 3;
    for (int attempt = 0;; ++attempt) {
        try {
            HttpReply reply = http_post(options, path, payload);
            if (reply.status == 200) return reply.body;
            if (reply.status == 429) {
                throw RateLimited(options.base_url + path + ": HTTP 429");
            }
            if (reply.status >= 500) {
                throw EndpointTimeout(options.base_url + path + ": HTTP " +
                                      std::to_string(reply.status));
            }
            throw MalformedResponse(options.base_url + path + ": HTTP " +
                                    std::to_string(reply.status) + " " +
                                    reply.body.substr(0, 200));
        } catch (const RateLimited&) {
            if (attempt + 1 >= kAttempts) throw;
        } catch (const EndpointTimeout&) {
            if (attempt + 1 >= kAttempts) throw;
        } catch (const BackendUnreachable&) {
            if (attempt + 1 >= kAttempts) throw;
        }
        const auto backoff = std::chrono::milliseconds(500) * (1 << attempt);
        std::this_thread::sleep_for(backoff);
    }
}

}  // namespace

HttpResponder::HttpResponder(HttpBackendOptions options)
    : options_(std::move(options)),
      rate_limiter_(options_.requests_per_minute),
      concurrency_(options_.max_concurrency) {
    if (options_.name.empty()) options_.name = options_.model;
}

std::string HttpResponder::id() const {
    return options_.name + "@" + options_.base_url;
}

std::string HttpResponder::respond(const std::string& prompt,
                                   const DecodingParams& decoding) {
    ConcurrencySlot slot(concurrency_);
    rate_limiter_.acquire();
    calls_.fetch_add(1);

    nlohmann::json payload;
    payload["model"] = options_.model;
    payload["temperature"] = decoding.temperature;
    payload["max_tokens"] = decoding.max_new_tokens;
    std::string path;
    if (options_.mode == "chat") {
        path = "/v1/chat/completions";
        payload["messages"] = nlohmann::json::array(
            {nlohmann::json{{"role", "user"}, {"content", prompt}}});
    } else {
        path = "/v1/completions";
        payload["prompt"] = prompt;
    }

    const std::string body = post_with_retries(options_, path, payload.dump());
    try {
        nlohmann::json reply = nlohmann::json::parse(body);
        if (options_.mode == "chat") {
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        }
        return reply.at("choices").at(0).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponse(id() + ": cannot parse completion body: " + e.what());
    }
}

HttpEmbedder::HttpEmbedder(HttpBackendOptions options)
    : options_(std::move(options)),
      rate_limiter_(options_.requests_per_minute),
      concurrency_(options_.max_concurrency) {
    if (options_.name.empty()) options_.name = options_.model;
}

std::string HttpEmbedder::id() const {
    return options_.name + "@" + options_.base_url;
}

std::vector<double> HttpEmbedder::embed(const std::string& text) {
    ConcurrencySlot slot(concurrency_);
    rate_limiter_.acquire();
    calls_.fetch_add(1);

    nlohmann::json payload;
    payload["model"] = options_.model;
    payload["input"] = text;
    const std::string body = post_with_retries(options_, "/v1/embeddings", payload.dump());
    try {
        nlohmann::json reply = nlohmann::json::parse(body);
        return reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponse(id() + ": cannot parse embedding body: " + e.what());
    }
}

std::string truncate_completion(const std::string& raw) {
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        if (raw.compare(pos, 9, "QUESTION:") == 0) {
            return trim(raw.substr(0, pos));
        }
        const std::size_t nl = raw.find('\n', pos);
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    return trim(raw);
}

}  // namespace kbrel
