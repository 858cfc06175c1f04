#include "kbrel/classify.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

#include "kbrel/corpus.hpp"
#include "kbrel/errors.hpp"
#include "kbrel/text.hpp"

namespace kbrel {

const std::vector<std::string>& default_unsure_phrases() {
    static const std::vector<std::string> kPhrases = {
        "i am not sure",
        "i'm not sure",
        "i do not know",
        "i don't know",
        "i am just an ai",
        "i'm just an ai",
        "unable to answer",
        "don't have access to real-time",
    };
    return kPhrases;
}

std::vector<std::string> load_unsure_phrases(const std::filesystem::path& path) {
    std::vector<std::string> phrases;
    for (const std::string& line : load_pool_file(path)) {
        phrases.push_back(to_lower(line));
    }
    return phrases;
}

bool detect_unsure(const std::string& text, const std::vector<std::string>& phrases) {
    if (normalize_answer(text) == "unsure") return true;
    const std::string haystack = to_lower(canonicalize_apostrophes(text));
    for (const std::string& phrase : phrases) {
        if (haystack.find(phrase) != std::string::npos) return true;
    }
    return false;
}

namespace {

// Enumeration markers: "1.", "27.", "(a)", "(af)", "iv.", "3)". A bare word
// or number does not qualify; some bracket or trailing punctuation must be
// present, otherwise articles like "a" would match.
bool is_enum_marker(const std::string& token) {
    std::size_t i = 0;
    bool open_paren = false;
    if (i < token.size() && token[i] == '(') {
        open_paren = true;
        ++i;
    }
    std::size_t digits = 0;
    std::size_t letters = 0;
    while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) {
        ++digits;
        ++i;
    }
    if (digits == 0) {
        while (i < token.size() && std::isalpha(static_cast<unsigned char>(token[i]))) {
            ++letters;
            ++i;
        }
    }
    if (digits == 0 && letters == 0) return false;
    if (digits > 4 || letters > 2) return false;
    bool trailing = false;
    if (i < token.size() && (token[i] == '.' || token[i] == ')' || token[i] == ':')) {
        trailing = true;
        ++i;
    }
    if (open_paren && i < token.size() && token[i] == ')') {
        trailing = true;
        ++i;
    }
    return i == token.size() && (open_paren || trailing);
}

bool enum_run_repetition(const std::vector<std::string>& tokens,
                         const RepetitionConfig& config) {
    std::size_t best = 0;
    std::size_t run = 0;
    for (const std::string& token : tokens) {
        run = is_enum_marker(token) ? run + 1 : 0;
        best = std::max(best, run);
    }
    return best >= static_cast<std::size_t>(config.min_repeats) &&
           static_cast<double>(best) >= config.min_coverage * tokens.size();
}

bool ngram_run_repetition(const std::vector<std::string>& tokens,
                          const RepetitionConfig& config) {
    const std::size_t total = tokens.size();
    for (std::size_t n = 1; n <= static_cast<std::size_t>(config.max_ngram); ++n) {
        if (n * static_cast<std::size_t>(config.min_repeats) > total) break;
        for (std::size_t start = 0; start + n <= total; ++start) {
            std::size_t copies = 1;
            while (start + (copies + 1) * n <= total &&
                   std::equal(tokens.begin() + start, tokens.begin() + start + n,
                              tokens.begin() + start + copies * n)) {
                ++copies;
            }
            if (copies >= static_cast<std::size_t>(config.min_repeats) &&
                static_cast<double>(copies * n) >= config.min_coverage * total) {
                return true;
            }
        }
    }
    return false;
}

bool frequency_repetition(const std::vector<std::string>& tokens,
                          const RepetitionConfig& config) {
    if (tokens.size() < static_cast<std::size_t>(config.min_tokens_for_freq)) return false;
    std::unordered_map<std::string, std::size_t> counts;
    std::size_t best = 0;
    for (const std::string& token : tokens) {
        best = std::max(best, ++counts[token]);
    }
    return static_cast<double>(best) > config.max_token_freq * tokens.size();
}

}  // namespace

bool detect_repetition(const std::string& text, const RepetitionConfig& config) {
    std::vector<std::string> tokens = tokenize(to_lower(text));
    if (tokens.empty()) return false;
    return enum_run_repetition(tokens, config) || ngram_run_repetition(tokens, config) ||
           frequency_repetition(tokens, config);
}

namespace {

const std::unordered_set<std::string>& function_words() {
    static const std::unordered_set<std::string> kWords = {
        "a", "an", "the", "is", "are", "was", "were", "be", "been", "being",
        "of", "to", "in", "on", "at", "for", "and", "or", "it", "its",
        "this", "that", "these", "those", "with", "by", "as", "from",
        "who", "whom", "whose", "what", "which", "when", "where", "why", "how",
        "do", "does", "did", "done", "have", "has", "had",
        "will", "would", "can", "could", "s",
    };
    return kWords;
}

// Removes blank-fill runs ("____") before echo comparison.
std::string strip_blank_fills(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] == '_') {
            std::size_t j = i;
            while (j < text.size() && text[j] == '_') ++j;
            if (j - i >= 2) {
                i = j;
                continue;
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

bool markup_only(const std::string& text) {
    bool in_tag = false;
    for (char c : text) {
        if (c == '<') {
            in_tag = true;
        } else if (c == '>') {
            in_tag = false;
        } else if (!in_tag && std::isalnum(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

}  // namespace

bool detect_none(const std::string& question, const std::string& text) {
    const std::string stripped = normalize_answer(strip_blank_fills(text));
    if (stripped.empty()) return true;
    if (markup_only(text)) return true;

    // Question echo: every content token of the response already appears in
    // the question and at least 80% of all response tokens do.
    const std::vector<std::string> q_tokens = tokenize(normalize_answer(question));
    const std::unordered_set<std::string> q_set(q_tokens.begin(), q_tokens.end());
    const std::vector<std::string> r_tokens = tokenize(stripped);
    std::size_t overlap = 0;
    for (const std::string& token : r_tokens) {
        if (q_set.count(token)) {
            ++overlap;
        } else if (!function_words().count(token)) {
            return false;  // novel content token
        }
    }
    return static_cast<double>(overlap) >= 0.8 * r_tokens.size();
}

bool exact_match(const std::vector<std::string>& gold_answers,
                 const std::string& answer_text) {
    const std::string normalized = normalize_answer(answer_text);
    return std::any_of(gold_answers.begin(), gold_answers.end(),
                       [&](const std::string& gold) {
                           return normalize_answer(gold) == normalized;
                       });
}

Label classify_response(const QuestionRecord& question, const ResponseRecord& response,
                        JudgeClient* judge, const ClassifierConfig& config) {
    const std::string& answer = response.answer_text;
    if (detect_unsure(answer, config.unsure_phrases)) {
        return Label::uninformative(UninformativeKind::Unsure);
    }
    if (detect_none(question.text, answer)) {
        return Label::uninformative(UninformativeKind::NoneContent);
    }
    if (detect_repetition(answer, config.repetition)) {
        return Label::uninformative(UninformativeKind::Repetition);
    }
    if (question.knowledge_class == KnowledgeClass::Unseen) {
        // Informative answers about unseen knowledge are wrong by definition.
        return Label::wrong();
    }
    if (exact_match(question.gold_answers, answer)) {
        return Label::correct();
    }
    if (judge == nullptr) {
        throw JudgeUnavailable("correctness check for " + question.id +
                               " needs a judge");
    }
    return judge->judge_correct(question.text, question.gold_answers, answer)
               ? Label::correct()
               : Label::wrong();
}

LabelSummary summarize_labels(const Dataset& dataset,
                              const std::vector<ResponseRecord>& responses) {
    std::unordered_map<std::string, const ResponseRecord*> by_id;
    for (const ResponseRecord& r : responses) by_id[r.question_id] = &r;

    LabelSummary summary;
    for (const QuestionRecord& q : dataset.records) {
        const auto it = by_id.find(q.id);
        if (it == by_id.end() || !it->second->label) {
            throw UnlabeledRecords("no label for question " + q.id);
        }
        const Label& label = *it->second->label;
        if (q.knowledge_class == KnowledgeClass::Seen) {
            ++summary.n;
            if (label.kind == LabelKind::Correct) ++summary.n_correct;
            if (label.kind == LabelKind::Wrong) ++summary.n_wrong;
            if (label.kind == LabelKind::Uninformative) ++summary.n_uninformative;
        } else {
            ++summary.l;
            if (label.kind == LabelKind::Correct) {
                throw Error("unseen question " + q.id + " labeled Correct");
            }
            if (label.kind == LabelKind::Wrong) ++summary.l_wrong;
            if (label.kind == LabelKind::Uninformative) ++summary.l_uninformative;
        }
    }
    return summary;
}

}  // namespace kbrel
