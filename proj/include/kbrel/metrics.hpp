#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kbrel/types.hpp"

namespace kbrel {

struct FactualityRates {
    double cr = 0.0;   // N_correct / N
    double wr = 0.0;   // N_wrong / N
    double ncr = 0.0;  // CR - WR
    double ur = 0.0;   // L_uninformative / L
};

// A mean over an empty set is Absent (std::nullopt), never silently zero;
// reports render it as "-" / null.
struct ConsistencyAggregates {
    std::optional<double> c_correct;  // mean cons over seen-correct items
    std::optional<double> c_wrong_s;  // mean cons over seen-wrong items
    std::optional<double> c_wrong_u;  // mean cons over unseen-wrong items
    std::optional<double> c_wrong;    // average of the two above, with fallback
    int unprobed = 0;                 // items skipped for lack of distractors
};

struct ReliabilityRates {
    double ccr = 0.0;   // CR * C_correct
    double cwr = 0.0;   // WR * C_wrong_s
    double nccr = 0.0;  // CCR - CWR
    double iur = 0.0;   // 1 - (1 - UR) * C_wrong_u
};

struct MetricsReport {
    std::string model_id;
    std::string setting;
    LabelSummary counts;
    FactualityRates factuality;
    ConsistencyAggregates consistency;
    ReliabilityRates reliability;
};

FactualityRates compute_factuality(const LabelSummary& summary);

// Label lookup for consistency aggregation: kind and knowledge class per
// question id.
struct LabeledItem {
    LabelKind kind = LabelKind::Wrong;
    KnowledgeClass knowledge_class = KnowledgeClass::Seen;
};

// Per Eqs. 5-8. Every Correct/Wrong labeled item must appear in `records`,
// either with a cons value or marked unprobed; unprobed items are excluded
// from the means and counted. When exactly one of C_wrong^s / C_wrong^u is
// Absent, C_wrong falls back to the defined one.
ConsistencyAggregates compute_consistency_aggregates(
    const std::vector<ConsistencyRecord>& records,
    const std::unordered_map<std::string, LabeledItem>& labels);

// Per Eqs. 9-10. An Absent consistency component is only legal when its
// rate factor vanishes (CR = 0, WR = 0, or UR = 1); then the product term
// is zero. Anything else raises InconsistentAbsence.
ReliabilityRates compute_reliability(double cr, double wr, double ur,
                                     std::optional<double> c_correct,
                                     std::optional<double> c_wrong_s,
                                     std::optional<double> c_wrong_u);

MetricsReport build_report(const std::string& model_id, const std::string& setting,
                           const LabelSummary& counts,
                           const ConsistencyAggregates& aggregates);

// Unified metric accessor for ranking, aggregation and report emission.
// Keys: cr wr ncr ur c_correct c_wrong_s c_wrong_u c_wrong ccr cwr nccr iur.
std::optional<double> metric_value(const MetricsReport& report, const std::string& key);
const std::vector<std::string>& metric_keys();

json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const json& j);

}  // namespace kbrel
