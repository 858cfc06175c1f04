#pragma once

#include <atomic>
#include <functional>
#include <string>

#include "kbrel/backends.hpp"

namespace kbrel::testing {

// Responder driven by an arbitrary function; for tests that need behavior
// richer than the table/rule lookup of ScriptedResponder.
class CallbackResponder : public Responder {
  public:
    using Fn = std::function<std::string(const std::string&)>;

    explicit CallbackResponder(Fn fn, std::string name = "callback")
        : fn_(std::move(fn)), name_(std::move(name)) {}

    std::string respond(const std::string& prompt, const DecodingParams&) override {
        calls_.fetch_add(1);
        return fn_(prompt);
    }
    std::string id() const override { return name_; }
    std::string mode() const override { return "scripted"; }
    long invocations() const override { return calls_.load(); }

  private:
    Fn fn_;
    std::string name_;
    std::atomic<long> calls_{0};
};

// Extracts the text after the last "QUESTION: " line of a QA prompt.
inline std::string last_question(const std::string& prompt) {
    const std::size_t pos = prompt.rfind("QUESTION: ");
    if (pos == std::string::npos) return {};
    const std::size_t start = pos + 10;
    const std::size_t end = prompt.find('\n', start);
    return prompt.substr(start, end == std::string::npos ? std::string::npos
                                                         : end - start);
}

// Extracts the labeled options of an MCQ prompt in label order.
inline std::vector<std::string> mcq_options(const std::string& prompt) {
    std::vector<std::string> options;
    for (char label = 'A'; label <= 'E'; ++label) {
        const std::string marker = std::string(1, '\n') + label + ". ";
        const std::size_t pos = prompt.find(marker);
        if (pos == std::string::npos) break;
        const std::size_t start = pos + marker.size();
        const std::size_t end = prompt.find('\n', start);
        options.push_back(prompt.substr(start, end - start));
    }
    return options;
}

}  // namespace kbrel::testing
