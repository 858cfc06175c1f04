#include "kbrel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "kbrel/analysis.hpp"
#include "kbrel/consistency.hpp"
#include "kbrel/errors.hpp"
#include "kbrel/jsonl.hpp"
#include "kbrel/prompting.hpp"
#include "kbrel/rng.hpp"

namespace kbrel {

namespace {

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (count == 0) return;
    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(count);  // stop handing out work
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(body);
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

long total_invocations(const RunBackends& backends) {
    long total = 0;
    if (backends.model) total += backends.model->invocations();
    if (backends.judge) total += backends.judge->invocations();
    if (backends.embedder) total += backends.embedder->invocations();
    return total;
}

std::filesystem::path stage_file(const std::filesystem::path& run_dir,
                                 const std::string& stage, const std::string& setting) {
    return run_dir / (stage + "-" + setting + ".jsonl");
}

// A stage file counts as complete when it holds exactly one row per item.
std::optional<std::vector<json>> load_complete(const std::filesystem::path& path,
                                               std::size_t expected) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::vector<json> rows = read_jsonl(path);
    if (rows.size() != expected) return std::nullopt;
    return rows;
}

}  // namespace

std::vector<ConsistencyRecord> probe_consistency(const std::vector<ConsistencyItem>& items,
                                                 Responder& model, JudgeClient& judge,
                                                 int x_mcqs, std::uint64_t seed,
                                                 int workers) {
    std::vector<ConsistencyRecord> records(items.size());
    const DecodingParams decoding{};  // greedy, 100 new tokens
    parallel_for(items.size(), workers, [&](std::size_t i) {
        const ConsistencyItem& item = items[i];
        ConsistencyRecord& record = records[i];
        record.question_id = item.question->id;
        record.x_mcqs = x_mcqs;
        std::vector<std::string> pool;
        try {
            pool = judge.generate_distractors(item.question->text, item.answer);
        } catch (const TooFewDistractors&) {
            record.unprobed = true;
            return;
        }
        const std::vector<MCQInstance> mcqs =
            build_mcqs(item.question->id, item.answer, pool, x_mcqs, seed);
        std::vector<std::optional<int>> selections;
        selections.reserve(mcqs.size());
        for (const MCQInstance& mcq : mcqs) {
            const PromptText prompt =
                build_mcq_prompt(mcq, item.question->text, PromptSetting{});
            selections.push_back(parse_mcq_answer(model.respond(prompt.text, decoding), mcq));
        }
        record = cons_score(selections, mcqs);
    });
    return records;
}

namespace {

struct SettingArtifacts {
    std::vector<ResponseRecord> responses;  // labeled
    std::vector<ConsistencyRecord> consistency;
};

std::vector<json> responses_to_rows(const std::vector<ResponseRecord>& responses) {
    std::vector<json> rows;
    rows.reserve(responses.size());
    for (const ResponseRecord& r : responses) rows.push_back(response_to_json(r));
    return rows;
}

// One evaluated setting: respond, label, probe, report.
MetricsReport run_setting(const RunConfig& config, const std::string& model_id,
                          const Dataset& seen, const Dataset& unseen,
                          const ShotRepositories& repos, SettingKind kind,
                          CachedResponder& model, CachedEmbedder* embedder,
                          JudgeClient& judge, const ClassifierConfig& classifier,
                          const std::filesystem::path& run_dir, StageCounts& counts) {
    const std::string setting_name = to_string(kind);
    const PromptSetting setting{kind, config.seed};

    std::vector<const QuestionRecord*> questions;
    questions.reserve(seen.size() + unseen.size());
    for (const QuestionRecord& q : seen.records) questions.push_back(&q);
    for (const QuestionRecord& q : unseen.records) questions.push_back(&q);

    // Stage 1: responses. The cache already makes recomputation cheap; a
    // complete stage file short-circuits it entirely.
    std::vector<ResponseRecord> responses(questions.size());
    const auto responses_path = stage_file(run_dir, "responses", setting_name);
    bool have_labels = false;
    if (auto rows = load_complete(responses_path, questions.size())) {
        for (std::size_t i = 0; i < rows->size(); ++i) {
            responses[i] = response_from_json((*rows)[i]);
            if (responses[i].question_id != questions[i]->id) {
                throw PartialRun(responses_path.string() + " does not match the dataset");
            }
        }
    } else {
        const DecodingParams decoding{};
        parallel_for(questions.size(), config.workers, [&](std::size_t i) {
            const QuestionRecord& q = *questions[i];
            const PromptText prompt = build_prompt(q, setting, repos, embedder);
            ResponseRecord record;
            record.question_id = q.id;
            record.raw_text = model.respond(prompt.text, decoding);
            record.answer_text = truncate_completion(record.raw_text);
            responses[i] = std::move(record);
        });
        write_jsonl(responses_path, responses_to_rows(responses));
    }
    counts.responses = static_cast<std::int64_t>(responses.size());

    // Stage 2: labels. Adopt a complete labels file only as a whole; a file
    // whose ids do not line up belongs to some other run or dataset.
    const auto labels_path = stage_file(run_dir, "labels", setting_name);
    if (auto rows = load_complete(labels_path, questions.size())) {
        std::vector<ResponseRecord> labeled(rows->size());
        bool matches = true;
        for (std::size_t i = 0; i < rows->size(); ++i) {
            labeled[i] = response_from_json((*rows)[i]);
            if (labeled[i].question_id != questions[i]->id || !labeled[i].label) {
                matches = false;
                break;
            }
        }
        if (!matches) {
            throw PartialRun(labels_path.string() + " does not match the dataset");
        }
        for (std::size_t i = 0; i < labeled.size(); ++i) {
            labeled[i].raw_text = responses[i].raw_text;
            responses[i] = std::move(labeled[i]);
        }
        have_labels = true;
    }
    if (!have_labels) {
        parallel_for(questions.size(), config.workers, [&](std::size_t i) {
            responses[i].label = classify_response(*questions[i], responses[i], &judge,
                                                   classifier);
        });
        std::vector<json> rows;
        rows.reserve(responses.size());
        for (const ResponseRecord& r : responses) {
            json row = response_to_json(r);
            row.erase("raw_text");  // label files carry the truncated answer only
            rows.push_back(std::move(row));
        }
        write_jsonl(labels_path, rows);
    }
    counts.labels = static_cast<std::int64_t>(responses.size());

    // Stage 3: consistency for seen-correct, seen-wrong and unseen-wrong.
    std::vector<ConsistencyItem> items;
    std::unordered_map<std::string, LabeledItem> label_map;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const QuestionRecord& q = *questions[i];
        const Label& label = *responses[i].label;
        if (label.kind == LabelKind::Uninformative) continue;
        label_map[q.id] = {label.kind, q.knowledge_class};
        items.push_back({&q, responses[i].answer_text});
    }
    std::vector<ConsistencyRecord> records;
    const auto consistency_path = stage_file(run_dir, "consistency", setting_name);
    if (auto cached_rows = load_complete(consistency_path, items.size())) {
        records.reserve(cached_rows->size());
        for (const json& row : *cached_rows) {
            records.push_back(consistency_from_json(row));
        }
    } else {
        records = probe_consistency(items, model, judge, config.x_mcqs,
                                    derive_seed(config.seed, "consistency"),
                                    config.workers);
        std::vector<json> rows;
        rows.reserve(records.size());
        for (const ConsistencyRecord& r : records) rows.push_back(consistency_to_json(r));
        write_jsonl(consistency_path, rows);
    }
    counts.consistency = static_cast<std::int64_t>(records.size());
    for (const ConsistencyRecord& r : records) {
        if (r.unprobed) ++counts.unprobed;
    }

    // Stage 4: metrics.
    std::vector<ResponseRecord> seen_responses(responses.begin(),
                                               responses.begin() + seen.size());
    std::vector<ResponseRecord> unseen_responses(responses.begin() + seen.size(),
                                                 responses.end());
    LabelSummary summary = summarize_labels(seen, seen_responses);
    const LabelSummary unseen_summary = summarize_labels(unseen, unseen_responses);
    summary.l = unseen_summary.l;
    summary.l_uninformative = unseen_summary.l_uninformative;
    summary.l_wrong = unseen_summary.l_wrong;

    const ConsistencyAggregates aggregates =
        compute_consistency_aggregates(records, label_map);
    MetricsReport report = build_report(model_id, setting_name, summary, aggregates);
    atomic_write(run_dir / "reports" / ("report-" + setting_name + ".json"),
                 report_to_json(report).dump(1));
    return report;
}

}  // namespace

RunResult run_eval(const RunConfig& config, const RunBackends& backends) {
    if (!backends.model || !backends.judge) {
        throw BackendUnreachable("run_eval needs model and judge backends");
    }
    const long calls_before = total_invocations(backends);

    const Dataset seen = load_dataset(config.seen_path);
    const Dataset unseen = load_dataset(config.unseen_path);
    if (seen.knowledge_class != KnowledgeClass::Seen ||
        unseen.knowledge_class != KnowledgeClass::Unseen) {
        throw Error("dataset knowledge classes do not match their config roles");
    }

    const bool needs_repos =
        std::any_of(config.settings.begin(), config.settings.end(),
                    [](SettingKind kind) { return kind != SettingKind::ZeroShot; });
    ShotRepository r_seen;
    ShotRepository r_unseen;
    ShotRepositories repos;
    if (needs_repos) {
        if (config.r_seen_path.empty()) {
            throw MissingRepository("few-shot settings need datasets.r_seen");
        }
        r_seen = ShotRepository::load(config.r_seen_path, "r_seen");
        repos.r_seen = &r_seen;
        if (!config.r_unseen_path.empty()) {
            r_unseen = ShotRepository::load(config.r_unseen_path, "r_unseen");
            repos.r_unseen = &r_unseen;
        }
    }

    ClassifierConfig classifier;
    if (!config.unsure_phrases.empty()) {
        classifier.unsure_phrases = load_unsure_phrases(config.unsure_phrases);
    }

    const ResponseCache cache(config.cache_dir);
    CachedResponder model(*backends.model, cache);
    CachedResponder judge_responder(*backends.judge, cache);
    std::optional<CachedEmbedder> embedder;
    if (backends.embedder) embedder.emplace(*backends.embedder, cache);
    JudgeClient judge(judge_responder);

    const std::string model_id =
        config.model.name.empty()
            ? (config.model.model.empty() ? backends.model->id() : config.model.model)
            : config.model.name;

    RunResult result;
    result.run_dir = config.output_dir;
    std::filesystem::create_directories(result.run_dir);

    nlohmann::ordered_json manifest;
    manifest["config_hash"] = sha256_hex(config.canonical());
    manifest["seed"] = config.seed;
    manifest["model_id"] = model_id;
    manifest["x_mcqs"] = config.x_mcqs;
    manifest["datasets"] = {{"seen", config.seen_path.string()},
                            {"unseen", config.unseen_path.string()}};
    std::vector<std::string> setting_names;
    for (SettingKind kind : config.settings) setting_names.push_back(to_string(kind));
    manifest["settings"] = setting_names;
    manifest["stages"] = nlohmann::ordered_json::object();
    manifest["complete"] = false;

    auto write_manifest = [&] {
        atomic_write(result.run_dir / "manifest.json", manifest.dump(1));
    };
    write_manifest();

    for (SettingKind kind : config.settings) {
        StageCounts counts;
        try {
            result.reports.push_back(run_setting(
                config, model_id, seen, unseen, repos, kind, model,
                embedder ? &*embedder : nullptr, judge, classifier, result.run_dir,
                counts));
        } catch (...) {
            // Leave a manifest behind that marks how far the run got.
            manifest["stages"][to_string(kind)] = {{"complete", false}};
            write_manifest();
            throw;
        }
        result.stages[to_string(kind)] = counts;
        manifest["stages"][to_string(kind)] = {{"responses", counts.responses},
                                               {"labels", counts.labels},
                                               {"consistency", counts.consistency},
                                               {"unprobed", counts.unprobed},
                                               {"complete", true}};
        write_manifest();
    }
    manifest["complete"] = true;
    write_manifest();

    result.backend_calls = total_invocations(backends) - calls_before;
    return result;
}

std::vector<MetricsReport> recompute_reports(const std::filesystem::path& run_dir) {
    const nlohmann::json manifest =
        nlohmann::json::parse(read_file(run_dir / "manifest.json"));
    const Dataset seen = load_dataset(manifest.at("datasets").at("seen").get<std::string>());
    const Dataset unseen =
        load_dataset(manifest.at("datasets").at("unseen").get<std::string>());
    const std::string model_id = manifest.at("model_id").get<std::string>();

    std::vector<MetricsReport> reports;
    for (const auto& setting : manifest.at("settings")) {
        const std::string name = setting.get<std::string>();
        const auto labels_path = stage_file(run_dir, "labels", name);
        std::vector<ResponseRecord> responses;
        for (const json& row : read_jsonl(labels_path)) {
            responses.push_back(response_from_json(row));
        }
        std::unordered_map<std::string, KnowledgeClass> classes;
        for (const QuestionRecord& q : seen.records) classes[q.id] = q.knowledge_class;
        for (const QuestionRecord& q : unseen.records) classes[q.id] = q.knowledge_class;

        std::vector<ResponseRecord> seen_responses;
        std::vector<ResponseRecord> unseen_responses;
        std::unordered_map<std::string, LabeledItem> label_map;
        for (const ResponseRecord& r : responses) {
            const auto it = classes.find(r.question_id);
            if (it == classes.end()) {
                throw Error("label for unknown question " + r.question_id);
            }
            if (it->second == KnowledgeClass::Seen) {
                seen_responses.push_back(r);
            } else {
                unseen_responses.push_back(r);
            }
            if (r.label && r.label->kind != LabelKind::Uninformative) {
                label_map[r.question_id] = {r.label->kind, it->second};
            }
        }
        LabelSummary summary = summarize_labels(seen, seen_responses);
        const LabelSummary unseen_summary = summarize_labels(unseen, unseen_responses);
        summary.l = unseen_summary.l;
        summary.l_uninformative = unseen_summary.l_uninformative;
        summary.l_wrong = unseen_summary.l_wrong;

        std::vector<ConsistencyRecord> records;
        for (const json& row : read_jsonl(stage_file(run_dir, "consistency", name))) {
            records.push_back(consistency_from_json(row));
        }
        MetricsReport report = build_report(model_id, name, summary,
                                            compute_consistency_aggregates(records,
                                                                           label_map));
        atomic_write(run_dir / "reports" / ("report-" + name + ".json"),
                     report_to_json(report).dump(1));
        reports.push_back(std::move(report));
    }
    return reports;
}

double round_half_away(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return (value < 0 ? -1.0 : 1.0) * std::floor(std::fabs(value) * scale + 0.5) / scale;
}

std::string format_scaled(const std::optional<double>& value) {
    if (!value) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", round_half_away(*value * 100.0, 2));
    return buf;
}

namespace {

const std::vector<std::string>& default_correlation_pairs() {
    static const std::vector<std::string> kPairs = {
        "ncr:ur",       "nccr:iur",     "c_correct:c_wrong", "ncr:c_correct",
        "ncr:c_wrong",  "ur:c_correct", "ur:c_wrong",
    };
    return kPairs;
}

bool lower_is_better(const std::string& key) {
    return key == "wr" || key == "c_wrong" || key == "c_wrong_s" ||
           key == "c_wrong_u" || key == "cwr";
}

}  // namespace

void emit_report(const std::filesystem::path& run_dir) {
    const std::filesystem::path reports_dir = run_dir / "reports";
    std::vector<MetricsReport> reports;
    if (std::filesystem::is_directory(reports_dir)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(reports_dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            reports.push_back(report_from_json(json::parse(read_file(file))));
        }
    }
    if (reports.empty()) {
        throw MissingReports("no reports under " + reports_dir.string());
    }

    std::set<std::string> settings;
    for (const MetricsReport& r : reports) settings.insert(r.setting);

    nlohmann::ordered_json bundle;
    bundle["reports"] = nlohmann::ordered_json::array();
    for (const MetricsReport& r : reports) bundle["reports"].push_back(report_to_json(r));

    for (const std::string& setting : settings) {
        std::vector<MetricsReport> group;
        for (const MetricsReport& r : reports) {
            if (r.setting == setting) group.push_back(r);
        }
        std::sort(group.begin(), group.end(),
                  [](const MetricsReport& a, const MetricsReport& b) {
                      return a.model_id < b.model_id;
                  });

        // Per-setting CSV, values scaled by 100, "-" for Absent.
        std::ostringstream csv;
        csv << "model_id";
        for (const std::string& key : metric_keys()) csv << ',' << key;
        csv << '\n';
        for (const MetricsReport& r : group) {
            csv << r.model_id;
            for (const std::string& key : metric_keys()) {
                csv << ',' << format_scaled(metric_value(r, key));
            }
            csv << '\n';
        }
        atomic_write(run_dir / ("metrics-" + setting + ".csv"), csv.str());

        // Markdown leaderboards, top 15 per metric, best first.
        std::ostringstream md;
        md << "# Leaderboards (" << setting << ")\n";
        for (const std::string& key : metric_keys()) {
            const RankDirection direction = lower_is_better(key)
                                               ? RankDirection::Ascending
                                               : RankDirection::Descending;
            const std::vector<MetricsReport> ranked = rank_models(group, key, direction);
            md << "\n## " << key << "\n\n| rank | model | " << key << " |\n"
               << "|---:|---|---:|\n";
            const std::size_t top = std::min<std::size_t>(15, ranked.size());
            for (std::size_t i = 0; i < top; ++i) {
                md << "| " << (i + 1) << " | " << ranked[i].model_id << " | "
                   << format_scaled(metric_value(ranked[i], key)) << " |\n";
            }
        }
        atomic_write(run_dir / ("leaderboard-" + setting + ".md"), md.str());
    }

    // Pairwise correlations across models, per setting with >= 3 models.
    std::ostringstream corr_csv;
    corr_csv << "pair,setting,rho,p_value,significant\n";
    bundle["correlations"] = nlohmann::ordered_json::array();
    for (const std::string& pair : default_correlation_pairs()) {
        for (const std::string& setting : settings) {
            std::vector<MetricsReport> group;
            for (const MetricsReport& r : reports) {
                if (r.setting == setting) group.push_back(r);
            }
            if (group.size() < 3) continue;
            std::vector<CorrelationRow> rows;
            try {
                rows = correlate_reports(group, {pair});
            } catch (const Error&) {
                continue;  // constant or undersized series in a degenerate bundle
            }
            for (const CorrelationRow& row : rows) {
                char line[160];
                std::snprintf(line, sizeof(line), "%s,%s,%.4f,%.6f,%s\n",
                              row.pair.c_str(), row.setting.c_str(), row.result.rho,
                              row.result.p_value,
                              row.result.significant ? "true" : "false");
                corr_csv << line;
                nlohmann::ordered_json j;
                j["pair"] = row.pair;
                j["setting"] = row.setting;
                j["rho"] = row.result.rho;
                j["p_value"] = row.result.p_value;
                j["n"] = row.result.n;
                j["significant"] = row.result.significant;
                bundle["correlations"].push_back(std::move(j));
            }
        }
    }
    atomic_write(run_dir / "correlations.csv", corr_csv.str());

    // Answer-type UR breakdown when this run has labels and a manifest.
    bundle["answer_type_ur"] = nlohmann::ordered_json::object();
    const std::filesystem::path manifest_path = run_dir / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        const nlohmann::json manifest = nlohmann::json::parse(read_file(manifest_path));
        const std::string unseen_path =
            manifest.at("datasets").at("unseen").get<std::string>();
        const std::string model_id = manifest.at("model_id").get<std::string>();
        const Dataset unseen = load_dataset(unseen_path);
        for (const std::string& setting : settings) {
            const auto labels_path = stage_file(run_dir, "labels", setting);
            if (!std::filesystem::exists(labels_path)) continue;
            std::vector<ResponseRecord> responses;
            std::set<std::string> unseen_ids;
            for (const QuestionRecord& q : unseen.records) unseen_ids.insert(q.id);
            for (const json& row : read_jsonl(labels_path)) {
                ResponseRecord r = response_from_json(row);
                if (unseen_ids.count(r.question_id)) responses.push_back(std::move(r));
            }
            const auto groups = ur_by_answer_type(responses, unseen);
            std::ostringstream csv;
            csv << "model_id,number,person,time,location,others\n";
            csv << model_id;
            nlohmann::ordered_json row;
            for (AnswerType type :
                 {AnswerType::Number, AnswerType::Person, AnswerType::Time,
                  AnswerType::Location, AnswerType::Others}) {
                const auto it = groups.find(type);
                const std::optional<double> ur =
                    it == groups.end() ? std::nullopt
                                       : std::optional<double>(it->second.ur);
                csv << ',' << format_scaled(ur);
                row[to_string(type)] = ur ? json(*ur) : json(nullptr);
            }
            csv << '\n';
            atomic_write(run_dir / ("answer_type_ur-" + setting + ".csv"), csv.str());
            bundle["answer_type_ur"][setting] = std::move(row);
        }
    }

    atomic_write(run_dir / "bundle.json", bundle.dump(1));
}

}  // namespace kbrel
