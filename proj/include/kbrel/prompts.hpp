#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kbrel {

// Literal prompt text. Everything the harness sends to a model is assembled
// from the blocks in this file; tests compare generated prompts byte for
// byte against golden files, so edits here are breaking changes.

extern const std::string kQaInstruction;
extern const std::string kMcqInstruction;

struct ShotPair {
    std::string question;
    std::string answer;
};

// Zero-shot: instruction, blank line, "QUESTION: ...\nANSWER:".
// Few-shot: the same with one "QUESTION: ...\nANSWER: ...\n\n" block per shot
// before the final question. No trailing whitespace after the answer cue.
std::string render_qa_prompt(const std::string& question,
                             const std::vector<ShotPair>& shots = {});

// MCQ variant: instruction, blank line, question, one "X. option" line per
// option labeled A-E by position, then the answer cue.
std::string render_mcq_prompt(const std::string& question,
                              const std::vector<std::string>& options);

// Judge prompt asking for the indices of time-sensitive questions; contains
// the worked four-question example with index reply "1, 4".
std::string render_time_sensitivity_prompt(const std::vector<std::string>& questions);

// Judge prompt asking whether a prediction matches the ground truth;
// contains the four worked examples and ends with "Correctness:".
std::string render_correctness_prompt(const std::string& question,
                                      const std::vector<std::string>& gold_answers,
                                      const std::string& prediction);

// Judge prompt asking for 20 "[SEP]"-separated distractors; contains the two
// worked examples and ends with "Distractors:".
std::string render_distractor_prompt(const std::string& question,
                                     const std::string& response);

}  // namespace kbrel
