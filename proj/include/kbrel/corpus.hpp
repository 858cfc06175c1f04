#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "kbrel/judge.hpp"
#include "kbrel/types.hpp"

namespace kbrel {

enum class PoolBinding { Countries, MedalEvents, Persons };

struct QuestionTemplate {
    std::string id;          // T1..T20
    std::string text;        // contains one bracketed placeholder
    std::string placeholder; // e.g. "[person]"
    PoolBinding pool = PoolBinding::Persons;
    AnswerType answer_type = AnswerType::Others;
};

// The 20 hand-written templates, four per answer type, in T1..T20 order.
const std::vector<QuestionTemplate>& question_templates();
const QuestionTemplate& find_template(const std::string& template_id);

// Replaces the bracketed placeholder with `value` verbatim; adjacent text
// such as possessive suffixes stays attached. The result contains no
// bracket characters.
std::string instantiate_template(const std::string& template_id,
                                 const std::string& value);

struct PlaceholderPools {
    std::vector<std::string> countries;     // 150
    std::vector<std::string> medal_events;  // 150
    std::vector<std::string> first_names;   // 100
    std::vector<std::string> middle_names;  // 100
    std::vector<std::string> last_names;    // 100
    std::vector<std::string> persons;       // 150 generated full names

    // Loads the five list files from `dir` and generates the person pool
    // from the name pools (seeded). Validates pool sizes and uniqueness.
    static PlaceholderPools load(const std::filesystem::path& dir, std::uint64_t seed);

    const std::vector<std::string>& pool_for(PoolBinding binding) const;
};

// UTF-8 list file, one entry per line; blank lines and "#" comments ignored.
std::vector<std::string> load_pool_file(const std::filesystem::path& path);

// `count` distinct "First Middle Last" names drawn uniformly without
// replacement from the Cartesian product of the three pools.
std::vector<std::string> generate_person_names(const std::vector<std::string>& first_pool,
                                               const std::vector<std::string>& middle_pool,
                                               const std::vector<std::string>& last_pool,
                                               std::int64_t count, std::uint64_t seed);

// 20 x per_template questions; each template contributes per_template
// questions with distinct placeholder values drawn from its bound pool.
Dataset generate_unseen_dataset(const PlaceholderPools& pools, std::int64_t per_template,
                                std::uint64_t seed);

enum class FilterReason { Keep, WhyQuestion, MultiAnswer, AnswerTooLong };

struct FilterDecision {
    bool keep = true;
    FilterReason reason = FilterReason::Keep;
};

std::string to_string(FilterReason reason);

// Factoid filter: rejects "why" questions, source-flagged multi-answer
// records whose gold aliases normalize to more than one distinct answer,
// and records with any gold answer over five whitespace tokens.
FilterDecision filter_factoid(const std::string& question,
                              const std::vector<std::string>& gold_answers,
                              bool source_marks_multi_answer = false);

// Asks the judge which of `questions` have yearly-changing answers and
// parses the comma-separated index reply into 1-based indices; indices
// outside [1, n] are dropped, an unparseable reply flags nothing.
std::set<std::size_t> detect_time_sensitive(const std::vector<std::string>& questions,
                                            JudgeClient& judge);

// Normalized ingestion record for the seen sources. `distinct_answers`
// marks the answer list as genuinely different answers rather than aliases
// of one answer.
struct IngestedRecord {
    std::string id;
    std::string question;
    std::vector<std::string> answers;
    bool distinct_answers = false;
};

struct SeenSource {
    std::string name;
    SourceKind kind = SourceKind::NaturalQuestions;
    std::vector<IngestedRecord> records;
};

SeenSource load_seen_source(const std::filesystem::path& path, SourceKind kind);

// Three-step pipeline per source: factoid filter, time-sensitive removal
// (judge batches of `judge_batch`), then seeded sampling of `per_source`
// survivors. Context fields never exist in IngestedRecord by construction.
Dataset build_seen_dataset(const std::vector<SeenSource>& sources, JudgeClient& judge,
                           std::int64_t per_source, std::uint64_t seed,
                           std::size_t judge_batch = 20);

}  // namespace kbrel
