#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kbrel/types.hpp"

namespace kbrel {

// X_MCQs probes for one (question, response): each draws three distinct
// distractors from the pool and shuffles {response, d1, d2, d3, "unsure"}.
// Probe i uses a seed derived from (seed, question_id, i), so probes are
// independent of each other and of how many items a run contains.
std::vector<MCQInstance> build_mcqs(const std::string& question_id,
                                    const std::string& response,
                                    const std::vector<std::string>& distractor_pool,
                                    int x_mcqs, std::uint64_t seed);

// Selected option index, or nullopt when the completion names no option.
// Resolution order: first standalone letter A-E, then unique option-text
// containment.
std::optional<int> parse_mcq_answer(const std::string& completion,
                                    const MCQInstance& mcq);

// Fraction of probes whose selection is the original response. Unparsed and
// unsure selections count as non-matches.
ConsistencyRecord cons_score(const std::vector<std::optional<int>>& selections,
                             const std::vector<MCQInstance>& mcqs);

}  // namespace kbrel
