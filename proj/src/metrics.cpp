#include "kbrel/metrics.hpp"

#include <nlohmann/json.hpp>

#include "kbrel/errors.hpp"

namespace kbrel {

FactualityRates compute_factuality(const LabelSummary& summary) {
    if (summary.n <= 0 || summary.l <= 0) {
        throw EmptyDataset("factuality needs N > 0 and L > 0");
    }
    FactualityRates rates;
    rates.cr = static_cast<double>(summary.n_correct) / summary.n;
    rates.wr = static_cast<double>(summary.n_wrong) / summary.n;
    rates.ncr = rates.cr - rates.wr;
    rates.ur = static_cast<double>(summary.l_uninformative) / summary.l;
    return rates;
}

ConsistencyAggregates compute_consistency_aggregates(
    const std::vector<ConsistencyRecord>& records,
    const std::unordered_map<std::string, LabeledItem>& labels) {
    std::unordered_map<std::string, const ConsistencyRecord*> by_id;
    for (const ConsistencyRecord& r : records) by_id[r.question_id] = &r;

    double sum_correct = 0.0;
    double sum_wrong_s = 0.0;
    double sum_wrong_u = 0.0;
    std::int64_t n_correct = 0;
    std::int64_t n_wrong_s = 0;
    std::int64_t n_wrong_u = 0;
    ConsistencyAggregates out;

    for (const auto& [question_id, item] : labels) {
        if (item.kind == LabelKind::Uninformative) continue;
        const auto it = by_id.find(question_id);
        if (it == by_id.end()) {
            throw MissingRecords("no consistency record or unprobed mark for " +
                                 question_id);
        }
        if (it->second->unprobed) {
            ++out.unprobed;
            continue;
        }
        const double cons = it->second->cons;
        if (item.knowledge_class == KnowledgeClass::Seen) {
            if (item.kind == LabelKind::Correct) {
                sum_correct += cons;
                ++n_correct;
            } else {
                sum_wrong_s += cons;
                ++n_wrong_s;
            }
        } else if (item.kind == LabelKind::Wrong) {
            sum_wrong_u += cons;
            ++n_wrong_u;
        }
    }

    if (n_correct > 0) out.c_correct = sum_correct / n_correct;
    if (n_wrong_s > 0) out.c_wrong_s = sum_wrong_s / n_wrong_s;
    if (n_wrong_u > 0) out.c_wrong_u = sum_wrong_u / n_wrong_u;
    if (out.c_wrong_s && out.c_wrong_u) {
        out.c_wrong = (*out.c_wrong_s + *out.c_wrong_u) / 2.0;
    } else if (out.c_wrong_s) {
        out.c_wrong = out.c_wrong_s;
    } else if (out.c_wrong_u) {
        out.c_wrong = out.c_wrong_u;
    }
    return out;
}

ReliabilityRates compute_reliability(double cr, double wr, double ur,
                                     std::optional<double> c_correct,
                                     std::optional<double> c_wrong_s,
                                     std::optional<double> c_wrong_u) {
    ReliabilityRates rates;
    if (c_correct) {
        rates.ccr = cr * *c_correct;
    } else if (cr != 0.0) {
        throw InconsistentAbsence("C_correct absent while CR > 0");
    }
    if (c_wrong_s) {
        rates.cwr = wr * *c_wrong_s;
    } else if (wr != 0.0) {
        throw InconsistentAbsence("C_wrong^s absent while WR > 0");
    }
    rates.nccr = rates.ccr - rates.cwr;
    if (c_wrong_u) {
        rates.iur = 1.0 - (1.0 - ur) * *c_wrong_u;
    } else if (ur != 1.0) {
        throw InconsistentAbsence("C_wrong^u absent while UR < 1");
    } else {
        rates.iur = 1.0;
    }
    return rates;
}

MetricsReport build_report(const std::string& model_id, const std::string& setting,
                           const LabelSummary& counts,
                           const ConsistencyAggregates& aggregates) {
    MetricsReport report;
    report.model_id = model_id;
    report.setting = setting;
    report.counts = counts;
    report.factuality = compute_factuality(counts);
    report.consistency = aggregates;
    report.reliability = compute_reliability(
        report.factuality.cr, report.factuality.wr, report.factuality.ur,
        aggregates.c_correct, aggregates.c_wrong_s, aggregates.c_wrong_u);
    return report;
}

const std::vector<std::string>& metric_keys() {
    static const std::vector<std::string> kKeys = {
        "cr", "wr", "ncr", "ur", "c_correct", "c_wrong_s",
        "c_wrong_u", "c_wrong", "ccr", "cwr", "nccr", "iur",
    };
    return kKeys;
}

std::optional<double> metric_value(const MetricsReport& report, const std::string& key) {
    if (key == "cr") return report.factuality.cr;
    if (key == "wr") return report.factuality.wr;
    if (key == "ncr") return report.factuality.ncr;
    if (key == "ur") return report.factuality.ur;
    if (key == "c_correct") return report.consistency.c_correct;
    if (key == "c_wrong_s") return report.consistency.c_wrong_s;
    if (key == "c_wrong_u") return report.consistency.c_wrong_u;
    if (key == "c_wrong") return report.consistency.c_wrong;
    if (key == "ccr") return report.reliability.ccr;
    if (key == "cwr") return report.reliability.cwr;
    if (key == "nccr") return report.reliability.nccr;
    if (key == "iur") return report.reliability.iur;
    throw UnknownMetric("no metric named " + key);
}

namespace {
json optional_to_json(const std::optional<double>& value) {
    if (value) return *value;
    return nullptr;
}

std::optional<double> optional_from_json(const json& j, const std::string& key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}
}  // namespace

json report_to_json(const MetricsReport& report) {
    json j;
    j["model_id"] = report.model_id;
    j["setting"] = report.setting;
    json counts;
    counts["n"] = report.counts.n;
    counts["n_correct"] = report.counts.n_correct;
    counts["n_wrong"] = report.counts.n_wrong;
    counts["n_uninformative"] = report.counts.n_uninformative;
    counts["l"] = report.counts.l;
    counts["l_uninformative"] = report.counts.l_uninformative;
    counts["l_wrong"] = report.counts.l_wrong;
    j["counts"] = counts;
    json metrics;
    metrics["cr"] = report.factuality.cr;
    metrics["wr"] = report.factuality.wr;
    metrics["ncr"] = report.factuality.ncr;
    metrics["ur"] = report.factuality.ur;
    metrics["c_correct"] = optional_to_json(report.consistency.c_correct);
    metrics["c_wrong_s"] = optional_to_json(report.consistency.c_wrong_s);
    metrics["c_wrong_u"] = optional_to_json(report.consistency.c_wrong_u);
    metrics["c_wrong"] = optional_to_json(report.consistency.c_wrong);
    metrics["ccr"] = report.reliability.ccr;
    metrics["cwr"] = report.reliability.cwr;
    metrics["nccr"] = report.reliability.nccr;
    metrics["iur"] = report.reliability.iur;
    j["metrics"] = metrics;
    j["unprobed"] = report.consistency.unprobed;
    return j;
}

MetricsReport report_from_json(const json& j) {
    MetricsReport report;
    report.model_id = j.at("model_id").get<std::string>();
    report.setting = j.at("setting").get<std::string>();
    if (j.contains("counts")) {
        const json& counts = j.at("counts");
        report.counts.n = counts.value("n", 0);
        report.counts.n_correct = counts.value("n_correct", 0);
        report.counts.n_wrong = counts.value("n_wrong", 0);
        report.counts.n_uninformative = counts.value("n_uninformative", 0);
        report.counts.l = counts.value("l", 0);
        report.counts.l_uninformative = counts.value("l_uninformative", 0);
        report.counts.l_wrong = counts.value("l_wrong", 0);
    }
    const json& metrics = j.at("metrics");
    report.factuality.cr = metrics.at("cr").get<double>();
    report.factuality.wr = metrics.at("wr").get<double>();
    report.factuality.ncr = metrics.at("ncr").get<double>();
    report.factuality.ur = metrics.at("ur").get<double>();
    report.consistency.c_correct = optional_from_json(metrics, "c_correct");
    report.consistency.c_wrong_s = optional_from_json(metrics, "c_wrong_s");
    report.consistency.c_wrong_u = optional_from_json(metrics, "c_wrong_u");
    report.consistency.c_wrong = optional_from_json(metrics, "c_wrong");
    report.reliability.ccr = metrics.at("ccr").get<double>();
    report.reliability.cwr = metrics.at("cwr").get<double>();
    report.reliability.nccr = metrics.at("nccr").get<double>();
    report.reliability.iur = metrics.at("iur").get<double>();
    report.consistency.unprobed = j.value("unprobed", 0);
    return report;
}

}  // namespace kbrel
