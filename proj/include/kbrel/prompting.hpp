#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kbrel/backends.hpp"
#include "kbrel/types.hpp"

namespace kbrel {

enum class SettingKind { ZeroShot, FourShot, FourTwo };

std::string to_string(SettingKind kind);
SettingKind setting_kind_from_string(const std::string& s);

struct PromptSetting {
    SettingKind kind = SettingKind::ZeroShot;
    std::uint64_t seed = 0;  // base seed for per-question shot shuffling
};

struct ShotEntry {
    std::string question;
    std::string answer;
    std::vector<double> embedding;
};

// Embedded QA pairs used for dynamic few-shot retrieval. Embeddings are
// computed once when the repository is built and stored with the entries.
struct ShotRepository {
    std::string name;  // "r_seen" or "r_unseen"
    std::vector<ShotEntry> entries;

    std::size_t size() const { return entries.size(); }
    // Consistent dimensions, no zero vectors, non-empty.
    void validate() const;

    static ShotRepository load(const std::filesystem::path& path, std::string name);
    void save(const std::filesystem::path& path) const;
};

struct ShotRepositories {
    const ShotRepository* r_seen = nullptr;
    const ShotRepository* r_unseen = nullptr;
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Indices of the k entries most cosine-similar to the query, ordered by
// descending similarity; ties break toward the lower entry index.
std::vector<std::size_t> retrieve_shots(const std::vector<double>& query,
                                        const ShotRepository& repo, std::size_t k);

struct PromptText {
    std::string text;
    std::vector<std::string> shot_ids;  // provenance, e.g. "r_seen#12"
};

// QA prompt for one question under a setting. Few-shot settings retrieve
// from the repositories (four from R_seen, or two from R_seen plus two
// unsure shots from R_unseen) and shuffle the final shot order with a seed
// derived from (setting.seed, question id).
PromptText build_prompt(const QuestionRecord& question, const PromptSetting& setting,
                        const ShotRepositories& repos, Embedder* embedder);

// MCQ probe prompt: the MCQ instruction variant, the question, one option
// line per label, then the answer cue. Probes carry no shot blocks.
PromptText build_mcq_prompt(const MCQInstance& mcq, const std::string& question_text,
                            const PromptSetting& setting);

}  // namespace kbrel
