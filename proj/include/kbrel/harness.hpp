#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kbrel/cache.hpp"
#include "kbrel/classify.hpp"
#include "kbrel/config.hpp"
#include "kbrel/judge.hpp"
#include "kbrel/metrics.hpp"

namespace kbrel {

// Raw (uncached) backends; run_eval wraps each with the response cache.
struct RunBackends {
    Responder* model = nullptr;
    Responder* judge = nullptr;
    Embedder* embedder = nullptr;
};

struct StageCounts {
    std::int64_t responses = 0;
    std::int64_t labels = 0;
    std::int64_t consistency = 0;
    std::int64_t unprobed = 0;
};

struct RunResult {
    std::filesystem::path run_dir;
    std::vector<MetricsReport> reports;
    std::map<std::string, StageCounts> stages;  // per setting
    long backend_calls = 0;  // actual invocations during this run (cache misses)
};

// End-to-end evaluation: prompts, responses, labels, consistency probes and
// metric reports for every configured setting. Stage outputs land in
// config.output_dir; completed stage files are loaded instead of recomputed,
// and all backend traffic goes through the cache, so interrupted runs resume
// where they stopped.
RunResult run_eval(const RunConfig& config, const RunBackends& backends);

struct ConsistencyItem {
    const QuestionRecord* question = nullptr;
    std::string answer;
};

// Probes each (question, answer): judge-generated distractors, X_MCQs
// multiple-choice prompts, selection parsing, Cons score. Items whose
// distractor generation falls short are marked unprobed.
std::vector<ConsistencyRecord> probe_consistency(const std::vector<ConsistencyItem>& items,
                                                 Responder& model, JudgeClient& judge,
                                                 int x_mcqs, std::uint64_t seed,
                                                 int workers);

// Rebuilds MetricsReports from the label and consistency files of an
// existing run directory (its manifest names datasets and settings).
std::vector<MetricsReport> recompute_reports(const std::filesystem::path& run_dir);

// Emits the report bundle for a run directory: per-setting CSV of all 12
// metrics, Markdown leaderboards, a correlation CSV, the answer-type UR
// breakdown where labels are available, and an unrounded JSON bundle.
void emit_report(const std::filesystem::path& run_dir);

// Report-layer rounding: half away from zero.
double round_half_away(double value, int decimals);
// "52.09" for 0.520924; "-" for Absent. Values scaled by 100.
std::string format_scaled(const std::optional<double>& value);

}  // namespace kbrel
