#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kbrel/metrics.hpp"
#include "kbrel/stats.hpp"
#include "kbrel/types.hpp"

namespace kbrel {

enum class SizeClass { Small, Medium, Large };

std::string to_string(SizeClass v);
SizeClass size_class_from_string(const std::string& s);

struct ModelMeta {
    std::string model_id;
    std::optional<double> params_b;        // parameter count in billions
    std::optional<SizeClass> size_class;   // absent when params are unknown
    bool fine_tuned = false;
};

// CSV with header model_id,params,size_class,fine_tuned.
std::vector<ModelMeta> load_model_meta(const std::filesystem::path& path);

enum class RankDirection { Ascending, Descending };

// Stable sort of reports by one metric; Absent values sort last in either
// direction, ties break by model_id.
std::vector<MetricsReport> rank_models(const std::vector<MetricsReport>& reports,
                                       const std::string& metric_key,
                                       RankDirection direction);

struct GroupUr {
    std::int64_t total = 0;
    std::int64_t uninformative = 0;
    double ur = 0.0;
};

// UR restricted to each answer-type group of an unseen dataset; every
// record must be labeled.
std::map<AnswerType, GroupUr> ur_by_answer_type(
    const std::vector<ResponseRecord>& responses, const Dataset& dataset);

enum class Facet { SizeClass, FineTuned, Setting };

struct MetricMean {
    double mean = 0.0;
    int n = 0;          // reports contributing a defined value
    int excluded = 0;   // reports with this metric Absent
};

// facet value -> metric key -> mean. Absent metric values are excluded from
// that metric's mean, with the exclusion count reported. Models without the
// faceted metadata (e.g. unknown size class) are skipped for that facet.
std::map<std::string, std::map<std::string, MetricMean>> aggregate_by(
    const std::vector<ModelMeta>& meta, const std::vector<MetricsReport>& reports,
    Facet facet);

struct CorrelationRow {
    std::string pair;  // "ncr:ur"
    std::string setting;
    CorrelationResult result;
};

// Pearson correlation of two metrics across the models of each setting
// present in `reports`.
std::vector<CorrelationRow> correlate_reports(const std::vector<MetricsReport>& reports,
                                              const std::vector<std::string>& pairs);

}  // namespace kbrel
