#pragma once

#include <string>
#include <vector>

#include "kbrel/backends.hpp"

namespace kbrel {

// Splits a distractor completion on "[SEP]", trims the pieces, and drops
// empties and case-insensitive duplicates of each other or of the original
// response.
std::vector<std::string> parse_distractor_completion(const std::string& completion,
                                                     const std::string& response);

// Judge-model client: correctness grading, distractor generation and
// time-sensitivity flagging. The responder passed in is typically
// cache-wrapped; when a yes/no completion cannot be parsed the item is
// re-asked once, bypassing the cache so the retry is not a replay.
class JudgeClient {
  public:
    explicit JudgeClient(Responder& responder,
                         DecodingParams decoding = judge_decoding());

    // Strict parse of the first alphabetic token ("yes"/"no", any case).
    // Throws JudgeUnparseable when the retry also fails.
    bool judge_correct(const std::string& question,
                       const std::vector<std::string>& gold_answers,
                       const std::string& prediction);

    // Splits the completion on "[SEP]", trims pieces, drops empties and
    // case-insensitive duplicates of each other or of the response.
    // Throws TooFewDistractors when fewer than 4 survive.
    std::vector<std::string> generate_distractors(const std::string& question,
                                                  const std::string& response);

    // Raw completion for the time-sensitivity prompt over `questions`;
    // parsing is the caller's job (corpus::detect_time_sensitive).
    std::string flag_time_sensitive(const std::vector<std::string>& questions);

    Responder& responder() { return responder_; }

  private:
    std::string ask(const std::string& prompt);
    std::string ask_fresh(const std::string& prompt);

    Responder& responder_;
    DecodingParams decoding_;
};

}  // namespace kbrel
