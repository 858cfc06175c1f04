#include "kbrel/analysis.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "kbrel/errors.hpp"
#include "kbrel/text.hpp"

namespace kbrel {

std::string to_string(SizeClass v) {
    switch (v) {
        case SizeClass::Small: return "small";
        case SizeClass::Medium: return "medium";
        case SizeClass::Large: return "large";
    }
    return "small";
}

SizeClass size_class_from_string(const std::string& s) {
    if (s == "small") return SizeClass::Small;
    if (s == "medium") return SizeClass::Medium;
    if (s == "large") return SizeClass::Large;
    throw Error("unknown size class: " + s);
}

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}
}  // namespace

std::vector<ModelMeta> load_model_meta(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model metadata " + path.string());
    std::vector<ModelMeta> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() < 4) throw Error("bad metadata row: " + line);
        ModelMeta meta;
        meta.model_id = trim(fields[0]);
        const std::string params = trim(fields[1]);
        if (!params.empty()) {
            // "0.08B" / "7B" / plain number, in billions.
            std::string digits = params;
            if (!digits.empty() && (digits.back() == 'B' || digits.back() == 'b')) {
                digits.pop_back();
            }
            try {
                meta.params_b = std::stod(digits);
            } catch (const std::exception&) {
                // unknown parameter count stays absent
            }
        }
        const std::string size_class = trim(fields[2]);
        if (!size_class.empty()) {
            meta.size_class = size_class_from_string(to_lower(size_class));
        }
        const std::string fine_tuned = to_lower(trim(fields[3]));
        meta.fine_tuned = fine_tuned == "true" || fine_tuned == "1" || fine_tuned == "yes";
        out.push_back(std::move(meta));
    }
    return out;
}

std::vector<MetricsReport> rank_models(const std::vector<MetricsReport>& reports,
                                       const std::string& metric_key,
                                       RankDirection direction) {
    if (std::find(metric_keys().begin(), metric_keys().end(), metric_key) ==
        metric_keys().end()) {
        throw UnknownMetric("no metric named " + metric_key);
    }
    std::vector<MetricsReport> ranked = reports;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](const MetricsReport& a, const MetricsReport& b) {
                         const auto va = metric_value(a, metric_key);
                         const auto vb = metric_value(b, metric_key);
                         if (va.has_value() != vb.has_value()) return va.has_value();
                         if (va && vb && *va != *vb) {
                             return direction == RankDirection::Descending ? *va > *vb
                                                                           : *va < *vb;
                         }
                         return a.model_id < b.model_id;
                     });
    return ranked;
}

std::map<AnswerType, GroupUr> ur_by_answer_type(
    const std::vector<ResponseRecord>& responses, const Dataset& dataset) {
    if (dataset.knowledge_class != KnowledgeClass::Unseen) {
        throw Error("answer-type UR breakdown is defined on unseen datasets");
    }
    std::unordered_map<std::string, const ResponseRecord*> by_id;
    for (const ResponseRecord& r : responses) by_id[r.question_id] = &r;

    std::map<AnswerType, GroupUr> groups;
    for (const QuestionRecord& q : dataset.records) {
        const auto it = by_id.find(q.id);
        if (it == by_id.end() || !it->second->label) {
            throw UnlabeledRecords("no label for question " + q.id);
        }
        GroupUr& group = groups[q.answer_type];
        ++group.total;
        if (it->second->label->kind == LabelKind::Uninformative) ++group.uninformative;
    }
    for (auto& [type, group] : groups) {
        group.ur = static_cast<double>(group.uninformative) / group.total;
    }
    return groups;
}

namespace {
std::string facet_value(const ModelMeta& meta, const MetricsReport& report, Facet facet,
                        bool& available) {
    available = true;
    switch (facet) {
        case Facet::SizeClass:
            if (!meta.size_class) {
                available = false;
                return {};
            }
            return to_string(*meta.size_class);
        case Facet::FineTuned:
            return meta.fine_tuned ? "fine-tuned" : "base";
        case Facet::Setting:
            return report.setting;
    }
    available = false;
    return {};
}
}  // namespace

std::map<std::string, std::map<std::string, MetricMean>> aggregate_by(
    const std::vector<ModelMeta>& meta, const std::vector<MetricsReport>& reports,
    Facet facet) {
    std::unordered_map<std::string, const ModelMeta*> meta_by_id;
    for (const ModelMeta& m : meta) meta_by_id[m.model_id] = &m;

    struct Accumulator {
        double sum = 0.0;
        int n = 0;
        int excluded = 0;
    };
    std::map<std::string, std::map<std::string, Accumulator>> buckets;

    for (const MetricsReport& report : reports) {
        const auto it = meta_by_id.find(report.model_id);
        if (it == meta_by_id.end()) {
            throw MissingMetadata("no metadata for model " + report.model_id);
        }
        bool available = false;
        const std::string value = facet_value(*it->second, report, facet, available);
        if (!available) continue;
        for (const std::string& key : metric_keys()) {
            Accumulator& acc = buckets[value][key];
            if (const auto metric = metric_value(report, key)) {
                acc.sum += *metric;
                ++acc.n;
            } else {
                ++acc.excluded;
            }
        }
    }

    std::map<std::string, std::map<std::string, MetricMean>> out;
    for (const auto& [value, metrics] : buckets) {
        for (const auto& [key, acc] : metrics) {
            MetricMean mean;
            mean.n = acc.n;
            mean.excluded = acc.excluded;
            mean.mean = acc.n > 0 ? acc.sum / acc.n : 0.0;
            out[value][key] = mean;
        }
    }
    return out;
}

std::vector<CorrelationRow> correlate_reports(const std::vector<MetricsReport>& reports,
                                              const std::vector<std::string>& pairs) {
    std::set<std::string> settings;
    for (const MetricsReport& r : reports) settings.insert(r.setting);

    std::vector<CorrelationRow> rows;
    for (const std::string& pair : pairs) {
        const std::size_t colon = pair.find(':');
        if (colon == std::string::npos) throw Error("bad metric pair: " + pair);
        const std::string key_x = pair.substr(0, colon);
        const std::string key_y = pair.substr(colon + 1);
        for (const std::string& setting : settings) {
            std::vector<double> xs;
            std::vector<double> ys;
            for (const MetricsReport& r : reports) {
                if (r.setting != setting) continue;
                const auto x = metric_value(r, key_x);
                const auto y = metric_value(r, key_y);
                if (x && y) {
                    xs.push_back(*x);
                    ys.push_back(*y);
                }
            }
            CorrelationRow row;
            row.pair = pair;
            row.setting = setting;
            row.result = pearson(xs, ys);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace kbrel
