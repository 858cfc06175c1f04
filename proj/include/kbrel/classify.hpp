#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kbrel/judge.hpp"
#include "kbrel/types.hpp"

namespace kbrel {

// Thresholds for the repetition detector. The defaults are the reference
// configuration; all of them are overridable.
struct RepetitionConfig {
    int max_ngram = 5;          // longest n-gram checked for consecutive repeats
    int min_repeats = 5;        // minimum consecutive copies
    double min_coverage = 0.5;  // repeated span must cover this share of tokens
    double max_token_freq = 0.4;   // single-token frequency threshold
    int min_tokens_for_freq = 10;  // frequency rule needs at least this many tokens
};

// Default inventory of hedge phrases; a superset seed, extensible via file.
const std::vector<std::string>& default_unsure_phrases();
std::vector<std::string> load_unsure_phrases(const std::filesystem::path& path);

struct ClassifierConfig {
    std::vector<std::string> unsure_phrases = default_unsure_phrases();
    RepetitionConfig repetition;
};

// True when the normalized text equals "unsure" or contains a hedge phrase.
bool detect_unsure(const std::string& text,
                   const std::vector<std::string>& phrases = default_unsure_phrases());

// True when the text repeatedly echoes a string: a 1..5-gram repeating at
// least 5 times consecutively and covering at least half the tokens, an
// enumeration-marker run of the same shape ("1. 2. 3. ...", "(a) (b) ..."),
// or one token making up over 40% of a 10+ token response.
bool detect_repetition(const std::string& text, const RepetitionConfig& config = {});

// True when the text has no content: empty, punctuation/markup only, or a
// blank-filled echo of the question with no novel content token.
bool detect_none(const std::string& question, const std::string& text);

// Normalized string equality against any gold answer.
bool exact_match(const std::vector<std::string>& gold_answers,
                 const std::string& answer_text);

// Full labeling pipeline: unsure > none > repetition > correctness.
// Seen questions fall back to the judge when exact match fails; unseen
// questions are Wrong whenever they are informative. `judge` may be null
// when the dataset is unseen-only; needing it then raises JudgeUnavailable.
Label classify_response(const QuestionRecord& question, const ResponseRecord& response,
                        JudgeClient* judge, const ClassifierConfig& config = {});

// Counts per knowledge class; labels must cover the whole dataset.
LabelSummary summarize_labels(const Dataset& dataset,
                              const std::vector<ResponseRecord>& responses);

}  // namespace kbrel
