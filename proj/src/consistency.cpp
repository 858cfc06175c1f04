#include "kbrel/consistency.hpp"

#include <algorithm>
#include <cctype>

#include "kbrel/errors.hpp"
#include "kbrel/rng.hpp"
#include "kbrel/text.hpp"

namespace kbrel {

std::vector<MCQInstance> build_mcqs(const std::string& question_id,
                                    const std::string& response,
                                    const std::vector<std::string>& distractor_pool,
                                    int x_mcqs, std::uint64_t seed) {
    if (distractor_pool.size() < 3) {
        throw PoolTooSmall("MCQ construction needs at least 3 distractors, have " +
                           std::to_string(distractor_pool.size()));
    }
    if (x_mcqs < 1) throw Error("x_mcqs must be >= 1");

    std::vector<MCQInstance> probes;
    probes.reserve(static_cast<std::size_t>(x_mcqs));
    for (int probe = 1; probe <= x_mcqs; ++probe) {
        Rng rng(derive_seed(seed, "mcq", question_id,
                            static_cast<std::uint64_t>(probe)));
        const auto picks = rng.sample_indices(distractor_pool.size(), 3);

        // Roles: 0 = original response, 1..3 = distractors, 4 = unsure.
        // Shuffling role ids keeps positions trackable even when option
        // strings collide.
        std::vector<int> roles = {0, 1, 2, 3, 4};
        rng.shuffle(roles);

        MCQInstance mcq;
        mcq.question_id = question_id;
        mcq.probe_index = probe;
        mcq.distractor_ids.assign(picks.begin(), picks.end());
        for (int role : roles) {
            const int position = static_cast<int>(mcq.options.size());
            if (role == 0) {
                mcq.original_index = position;
                mcq.options.push_back(response);
            } else if (role == 4) {
                mcq.unsure_index = position;
                mcq.options.push_back("unsure");
            } else {
                mcq.options.push_back(
                    distractor_pool[static_cast<std::size_t>(picks[role - 1])]);
            }
        }
        probes.push_back(std::move(mcq));
    }
    return probes;
}

std::optional<int> parse_mcq_answer(const std::string& completion,
                                    const MCQInstance& mcq) {
    // Rule 1: first standalone uppercase letter A-E ("B", "(D).", "D)").
    for (std::size_t i = 0; i < completion.size(); ++i) {
        const char c = completion[i];
        if (c < 'A' || c > 'E') continue;
        const bool left_ok =
            i == 0 || !std::isalnum(static_cast<unsigned char>(completion[i - 1]));
        const bool right_ok =
            i + 1 == completion.size() ||
            !std::isalnum(static_cast<unsigned char>(completion[i + 1]));
        if (left_ok && right_ok) return c - 'A';
    }

    // Rule 2: unique case-insensitive option-text containment.
    const std::string haystack = to_lower(completion);
    int found = -1;
    int matches = 0;
    for (std::size_t i = 0; i < mcq.options.size(); ++i) {
        const std::string needle = to_lower(mcq.options[i]);
        if (!needle.empty() && haystack.find(needle) != std::string::npos) {
            ++matches;
            found = static_cast<int>(i);
        }
    }
    if (matches == 1) return found;
    return std::nullopt;
}

ConsistencyRecord cons_score(const std::vector<std::optional<int>>& selections,
                             const std::vector<MCQInstance>& mcqs) {
    if (selections.size() != mcqs.size() || mcqs.empty()) {
        throw LengthMismatch("cons_score: " + std::to_string(selections.size()) +
                             " selections vs " + std::to_string(mcqs.size()) + " probes");
    }
    ConsistencyRecord record;
    record.question_id = mcqs.front().question_id;
    record.x_mcqs = static_cast<int>(mcqs.size());
    for (std::size_t i = 0; i < mcqs.size(); ++i) {
        if (selections[i] && *selections[i] == mcqs[i].original_index) {
            ++record.match_count;
        }
    }
    record.cons = static_cast<double>(record.match_count) / record.x_mcqs;
    return record;
}

}  // namespace kbrel
