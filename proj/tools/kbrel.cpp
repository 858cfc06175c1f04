#include <cstdlib>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kbrel/analysis.hpp"
#include "kbrel/cache.hpp"
#include "kbrel/config.hpp"
#include "kbrel/corpus.hpp"
#include "kbrel/errors.hpp"
#include "kbrel/harness.hpp"
#include "kbrel/jsonl.hpp"
#include "kbrel/prompting.hpp"
#include "kbrel/rng.hpp"

namespace {

using namespace kbrel;

std::string default_cache_dir() {
    if (const char* env = std::getenv("KBREL_CACHE_DIR"); env && *env) return env;
    return "cache";
}

SourceKind infer_source_kind(const std::filesystem::path& path) {
    const std::string stem = path.stem().string();
    if (stem.find("natural") != std::string::npos) return SourceKind::NaturalQuestions;
    if (stem.find("trivia") != std::string::npos) return SourceKind::TriviaQA;
    if (stem.find("pop") != std::string::npos) return SourceKind::PopQA;
    return SourceKind::NaturalQuestions;
}

int cmd_gen_unseen(const std::string& pools_dir, std::int64_t per_template,
                   std::uint64_t seed, const std::string& out) {
    const PlaceholderPools pools = PlaceholderPools::load(pools_dir, seed);
    const Dataset dataset = generate_unseen_dataset(pools, per_template, seed);
    save_dataset(out, dataset);
    std::cout << "wrote " << dataset.size() << " unseen questions to " << out << '\n';
    return 0;
}

int cmd_build_seen(const std::vector<std::string>& sources, std::int64_t per_source,
                   std::uint64_t seed, const std::string& judge_config,
                   const std::string& out, std::size_t batch,
                   const std::string& cache_dir) {
    std::vector<SeenSource> loaded;
    loaded.reserve(sources.size());
    for (const std::string& path : sources) {
        loaded.push_back(load_seen_source(path, infer_source_kind(path)));
    }
    const BackendConfig config = load_backend_config(judge_config, "judge");
    const auto backend = make_responder(config);
    const ResponseCache cache(cache_dir);
    CachedResponder cached(*backend, cache);
    JudgeClient judge(cached);
    const Dataset dataset = build_seen_dataset(loaded, judge, per_source, seed, batch);
    save_dataset(out, dataset);
    std::cout << "wrote " << dataset.size() << " seen questions to " << out << '\n';
    return 0;
}

int cmd_build_repo(const std::string& pairs_path, const std::string& embedder_config,
                   const std::string& out, const std::string& name,
                   const std::string& cache_dir) {
    const BackendConfig config = load_backend_config(embedder_config, "embedder");
    const auto backend = make_embedder(config);
    const ResponseCache cache(cache_dir);
    CachedEmbedder cached(*backend, cache);

    ShotRepository repo;
    repo.name = name;
    for (const json& row : read_jsonl(pairs_path)) {
        ShotEntry entry;
        entry.question = row.at("question").get<std::string>();
        entry.answer = row.at("answer").get<std::string>();
        entry.embedding = cached.embed(entry.question);
        repo.entries.push_back(std::move(entry));
    }
    repo.validate();
    repo.save(out);
    std::cout << "wrote " << repo.size() << " shots to " << out << '\n';
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& cache_dir,
            const std::string& output_dir, const std::string& unsure_phrases) {
    RunConfig config = RunConfig::load(config_path);
    if (!cache_dir.empty()) config.cache_dir = cache_dir;
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (!unsure_phrases.empty()) config.unsure_phrases = unsure_phrases;

    const auto model = make_responder(config.model);
    const auto judge = make_responder(config.judge);
    const auto embedder = make_embedder(config.embedder);
    RunBackends backends{model.get(), judge.get(), embedder.get()};

    const RunResult result = run_eval(config, backends);
    for (const auto& [setting, counts] : result.stages) {
        std::cout << setting << ": " << counts.responses << " responses, "
                  << counts.consistency << " consistency records (" << counts.unprobed
                  << " unprobed)\n";
    }
    std::cout << result.backend_calls << " backend calls; artifacts in "
              << result.run_dir.string() << '\n';
    emit_report(result.run_dir);
    return 0;
}

int cmd_consistency(const std::string& responses_path,
                    const std::vector<std::string>& dataset_paths,
                    const std::string& model_config, const std::string& judge_config,
                    int x_mcqs, std::uint64_t seed, const std::string& out,
                    const std::string& cache_dir, int workers) {
    std::vector<Dataset> datasets;
    for (const std::string& path : dataset_paths) datasets.push_back(load_dataset(path));
    std::map<std::string, const QuestionRecord*> by_id;
    for (const Dataset& dataset : datasets) {
        for (const QuestionRecord& q : dataset.records) by_id[q.id] = &q;
    }

    std::vector<ConsistencyItem> items;
    for (const json& row : read_jsonl(responses_path)) {
        const ResponseRecord record = response_from_json(row);
        if (!record.label || record.label->kind == LabelKind::Uninformative) continue;
        const auto it = by_id.find(record.question_id);
        if (it == by_id.end()) {
            throw Error("response for unknown question " + record.question_id);
        }
        items.push_back({it->second, record.answer_text});
    }

    const auto model = make_responder(load_backend_config(model_config, "model"));
    const auto judge_backend = make_responder(load_backend_config(judge_config, "judge"));
    const ResponseCache cache(cache_dir);
    CachedResponder cached_model(*model, cache);
    CachedResponder cached_judge(*judge_backend, cache);
    JudgeClient judge(cached_judge);

    const auto records = probe_consistency(items, cached_model, judge, x_mcqs,
                                           derive_seed(seed, "consistency"), workers);
    std::vector<json> rows;
    rows.reserve(records.size());
    for (const ConsistencyRecord& r : records) rows.push_back(consistency_to_json(r));
    write_jsonl(out, rows);
    std::cout << "wrote " << records.size() << " consistency records to " << out << '\n';
    return 0;
}

std::vector<MetricsReport> gather_reports(const std::vector<std::string>& run_dirs) {
    std::vector<MetricsReport> reports;
    for (const std::string& dir : run_dirs) {
        const std::filesystem::path reports_dir = std::filesystem::path(dir) / "reports";
        if (!std::filesystem::is_directory(reports_dir)) {
            throw MissingReports("no reports under " + reports_dir.string());
        }
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(reports_dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            reports.push_back(report_from_json(json::parse(read_file(file))));
        }
    }
    return reports;
}

int cmd_corr(const std::vector<std::string>& run_dirs, const std::string& pairs_arg,
             const std::string& out) {
    std::vector<MetricsReport> reports = gather_reports(run_dirs);

    std::vector<std::string> pairs;
    std::string rest = pairs_arg;
    while (!rest.empty()) {
        const std::size_t comma = rest.find(',');
        const std::string piece = rest.substr(0, comma);
        if (!piece.empty()) pairs.push_back(piece);
        if (comma == std::string::npos) break;
        rest.erase(0, comma + 1);
    }

    if (reports.size() < 3) {
        throw TooFewPoints("correlations need reports from at least 3 runs per setting; got " +
                           std::to_string(reports.size()));
    }
    std::set<std::string> settings;
    for (const MetricsReport& r : reports) settings.insert(r.setting);

    std::ostringstream csv;
    csv << "pair,setting,rho,p_value,significant\n";
    for (const std::string& pair : pairs) {
        for (const std::string& setting : settings) {
            std::vector<MetricsReport> group;
            for (const MetricsReport& r : reports) {
                if (r.setting == setting) group.push_back(r);
            }
            std::vector<CorrelationRow> rows;
            try {
                rows = correlate_reports(group, {pair});
            } catch (const Error& e) {
                std::cerr << "skipping " << pair << " (" << setting << "): " << e.what()
                          << '\n';
                continue;
            }
            for (const CorrelationRow& row : rows) {
                char line[160];
                std::snprintf(line, sizeof(line), "%s,%s,%.4f,%.6f,%s\n",
                              row.pair.c_str(), row.setting.c_str(), row.result.rho,
                              row.result.p_value,
                              row.result.significant ? "true" : "false");
                csv << line;
            }
        }
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        atomic_write(out, csv.str());
        std::cout << "wrote correlations to " << out << '\n';
    }
    return 0;
}

int cmd_aggregate(const std::vector<std::string>& run_dirs, const std::string& meta_path,
                  const std::string& facet_name, const std::string& out) {
    const std::vector<MetricsReport> reports = gather_reports(run_dirs);
    const std::vector<ModelMeta> meta = load_model_meta(meta_path);
    Facet facet;
    if (facet_name == "size") {
        facet = Facet::SizeClass;
    } else if (facet_name == "fine-tuned") {
        facet = Facet::FineTuned;
    } else if (facet_name == "setting") {
        facet = Facet::Setting;
    } else {
        throw Error("facet must be size, fine-tuned or setting, got " + facet_name);
    }

    std::ostringstream csv;
    csv << "facet,metric,mean,n,excluded\n";
    for (const auto& [value, metrics] : aggregate_by(meta, reports, facet)) {
        for (const std::string& key : metric_keys()) {
            const auto it = metrics.find(key);
            if (it == metrics.end()) continue;
            char line[160];
            std::snprintf(line, sizeof(line), "%s,%s,%s,%d,%d\n", value.c_str(),
                          key.c_str(),
                          it->second.n > 0 ? format_scaled(it->second.mean).c_str() : "-",
                          it->second.n, it->second.excluded);
            csv << line;
        }
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        atomic_write(out, csv.str());
        std::cout << "wrote aggregates to " << out << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kbrel - LLM-as-knowledge-base reliability evaluation"};
    app.require_subcommand(1);

    // gen-unseen
    auto* gen = app.add_subcommand("gen-unseen", "generate an UnseenQA-style dataset");
    std::string pools_dir = "data/pools";
    std::int64_t per_template = 150;
    std::uint64_t seed = 0;
    std::string out;
    gen->add_option("--pools", pools_dir, "directory with pool list files");
    gen->add_option("--per-template", per_template, "questions per template");
    gen->add_option("--seed", seed, "generation seed");
    gen->add_option("--out", out, "output dataset (JSONL)")->required();

    // build-seen
    auto* seen = app.add_subcommand("build-seen", "filter and sample seen QA sources");
    std::vector<std::string> sources;
    std::int64_t per_source = 1000;
    std::string judge_config;
    std::size_t batch = 20;
    std::string cache_dir = default_cache_dir();
    seen->add_option("--source", sources, "source JSONL file(s)")->required();
    seen->add_option("--per-source", per_source, "records sampled per source");
    seen->add_option("--seed", seed, "sampling seed");
    seen->add_option("--judge", judge_config, "judge backend config")->required();
    seen->add_option("--out", out, "output dataset (JSONL)")->required();
    seen->add_option("--batch", batch, "questions per time-sensitivity judge call");
    seen->add_option("--cache-dir", cache_dir, "response cache directory");

    // build-repo
    auto* repo = app.add_subcommand("build-repo", "embed QA pairs into a shot repository");
    std::string pairs_path;
    std::string embedder_config;
    std::string repo_name = "r_seen";
    repo->add_option("--pairs", pairs_path, "QA pairs (JSONL)")->required();
    repo->add_option("--embedder", embedder_config, "embedder backend config")->required();
    repo->add_option("--out", out, "output repository (JSONL)")->required();
    repo->add_option("--name", repo_name, "repository name (r_seen/r_unseen)");
    repo->add_option("--cache-dir", cache_dir, "response cache directory");

    // run
    auto* run = app.add_subcommand("run", "run a full evaluation");
    std::string config_path;
    std::string output_dir;
    std::string cache_override;
    std::string unsure_phrases;
    run->add_option("--config", config_path, "run config file")->required();
    run->add_option("--cache-dir", cache_override, "override the cache directory");
    run->add_option("--output-dir", output_dir, "override the output directory");
    run->add_option("--unsure-phrases", unsure_phrases, "hedge-phrase list override");

    // consistency
    auto* cons = app.add_subcommand("consistency", "probe consistency of labeled responses");
    std::string responses_path;
    std::vector<std::string> dataset_paths;
    std::string model_config;
    int x_mcqs = 20;
    int workers = 4;
    cons->add_option("--responses", responses_path, "labeled responses (JSONL)")->required();
    cons->add_option("--dataset", dataset_paths, "dataset(s) with question texts")->required();
    cons->add_option("--model", model_config, "model backend config")->required();
    cons->add_option("--judge", judge_config, "judge backend config")->required();
    cons->add_option("--xmcqs", x_mcqs, "probes per item");
    cons->add_option("--seed", seed, "probe seed");
    cons->add_option("--out", out, "output records (JSONL)")->required();
    cons->add_option("--cache-dir", cache_dir, "response cache directory");
    cons->add_option("--workers", workers, "concurrent items");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "recompute reports from run artifacts");
    std::string run_dir;
    metrics->add_option("--run", run_dir, "run directory")->required();

    // report
    auto* report = app.add_subcommand("report", "emit the report bundle for a run");
    report->add_option("--run", run_dir, "run directory")->required();

    // corr
    auto* corr = app.add_subcommand("corr", "pairwise metric correlations across runs");
    std::vector<std::string> run_dirs;
    std::string pairs_spec = "ncr:ur,nccr:iur,c_correct:c_wrong,ncr:c_correct,ncr:c_wrong,ur:c_correct,ur:c_wrong";
    corr->add_option("--runs", run_dirs, "run directories")->required();
    corr->add_option("--pairs", pairs_spec, "metric pairs, e.g. ncr:ur,nccr:iur");
    corr->add_option("--out", out, "output CSV (stdout when omitted)");

    // aggregate
    auto* aggregate =
        app.add_subcommand("aggregate", "mean metrics per model-metadata facet");
    std::string meta_path;
    std::string facet_name = "fine-tuned";
    aggregate->add_option("--runs", run_dirs, "run directories")->required();
    aggregate->add_option("--meta", meta_path, "model metadata CSV")->required();
    aggregate->add_option("--facet", facet_name, "size | fine-tuned | setting");
    aggregate->add_option("--out", out, "output CSV (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_unseen(pools_dir, per_template, seed, out);
        if (seen->parsed()) {
            return cmd_build_seen(sources, per_source, seed, judge_config, out, batch,
                                  cache_dir);
        }
        if (repo->parsed()) {
            return cmd_build_repo(pairs_path, embedder_config, out, repo_name, cache_dir);
        }
        if (run->parsed()) {
            return cmd_run(config_path, cache_override, output_dir, unsure_phrases);
        }
        if (cons->parsed()) {
            return cmd_consistency(responses_path, dataset_paths, model_config,
                                   judge_config, x_mcqs, seed, out, cache_dir, workers);
        }
        if (metrics->parsed()) {
            recompute_reports(run_dir);
            std::cout << "reports rebuilt under " << run_dir << "/reports\n";
            return 0;
        }
        if (report->parsed()) {
            emit_report(run_dir);
            std::cout << "report bundle written to " << run_dir << '\n';
            return 0;
        }
        if (corr->parsed()) return cmd_corr(run_dirs, pairs_spec, out);
        if (aggregate->parsed()) return cmd_aggregate(run_dirs, meta_path, facet_name, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
