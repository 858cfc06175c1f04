#include "kbrel/judge.hpp"

#include <cctype>
#include <optional>
#include <unordered_set>

#include "kbrel/cache.hpp"
#include "kbrel/errors.hpp"
#include "kbrel/prompts.hpp"
#include "kbrel/text.hpp"

namespace kbrel {

namespace {

std::optional<bool> parse_yes_no(const std::string& completion) {
    std::size_t i = 0;
    while (i < completion.size() &&
           !std::isalpha(static_cast<unsigned char>(completion[i])))
        ++i;
    std::size_t j = i;
    while (j < completion.size() &&
           std::isalpha(static_cast<unsigned char>(completion[j])))
        ++j;
    const std::string token = to_lower(completion.substr(i, j - i));
    if (token == "yes") return true;
    if (token == "no") return false;
    return std::nullopt;
}

// Completion-style judges keep following the two-example pattern; cut at the
// next "Q:" block before splitting on the separator token.
std::string cut_at_next_example(const std::string& raw) {
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        if (raw.compare(pos, 2, "Q:") == 0) return raw.substr(0, pos);
        const std::size_t nl = raw.find('\n', pos);
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    return raw;
}

}  // namespace

JudgeClient::JudgeClient(Responder& responder, DecodingParams decoding)
    : responder_(responder), decoding_(decoding) {}

std::string JudgeClient::ask(const std::string& prompt) {
    return responder_.respond(prompt, decoding_);
}

std::string JudgeClient::ask_fresh(const std::string& prompt) {
    if (auto* cached = dynamic_cast<CachedResponder*>(&responder_)) {
        return cached->respond_fresh(prompt, decoding_);
    }
    return responder_.respond(prompt, decoding_);
}

bool JudgeClient::judge_correct(const std::string& question,
                                const std::vector<std::string>& gold_answers,
                                const std::string& prediction) {
    const std::string prompt =
        render_correctness_prompt(question, gold_answers, prediction);
    if (auto verdict = parse_yes_no(ask(prompt))) return *verdict;
    // One fresh retry; a cached garbage completion would otherwise be final.
    const std::string retry = ask_fresh(prompt);
    if (auto verdict = parse_yes_no(retry)) return *verdict;
    throw JudgeUnparseable("judge reply is not yes/no: " + retry.substr(0, 120));
}

std::vector<std::string> parse_distractor_completion(const std::string& completion,
                                                     const std::string& response) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    seen.insert(to_lower(trim(response)));
    static const std::string kSep = "[SEP]";
    std::size_t start = 0;
    while (start <= completion.size()) {
        const std::size_t sep = completion.find(kSep, start);
        const std::string piece =
            trim(completion.substr(start, sep == std::string::npos ? std::string::npos
                                                                   : sep - start));
        if (!piece.empty() && seen.insert(to_lower(piece)).second) {
            out.push_back(piece);
        }
        if (sep == std::string::npos) break;
        start = sep + kSep.size();
    }
    return out;
}

std::vector<std::string> JudgeClient::generate_distractors(const std::string& question,
                                                           const std::string& response) {
    if (response.empty()) {
        throw TooFewDistractors("cannot build distractors for an empty response");
    }
    const std::string prompt = render_distractor_prompt(question, response);
    std::vector<std::string> out =
        parse_distractor_completion(cut_at_next_example(ask(prompt)), response);
    if (out.size() < 4) {
        // Consistency probing needs 3 distinct distractors per MCQ with room
        // to vary across probes.
        throw TooFewDistractors("only " + std::to_string(out.size()) +
                                " distractors survived for: " + question);
    }
    return out;
}

std::string JudgeClient::flag_time_sensitive(const std::vector<std::string>& questions) {
    return ask(render_time_sensitivity_prompt(questions));
}

}  // namespace kbrel
