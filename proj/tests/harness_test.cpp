#include <doctest.h>

#include <fstream>
#include <map>

#include "fixture_helpers.hpp"
#include "helpers.hpp"
#include "kbrel/corpus.hpp"
#include "kbrel/errors.hpp"
#include "kbrel/harness.hpp"
#include "kbrel/prompts.hpp"

using namespace kbrel;
using kbrel::testing::CallbackResponder;
using kbrel::testing::last_question;
using kbrel::testing::mcq_options;

namespace {

std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("kbrel_harness_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

Dataset make_seen(int n) {
    Dataset d;
    d.name = "mini-seen";
    d.knowledge_class = KnowledgeClass::Seen;
    for (int i = 0; i < n; ++i) {
        QuestionRecord q;
        q.id = "s" + std::to_string(i);
        q.text = "What is seen fact " + std::to_string(i) + "?";
        q.gold_answers = {"gold " + std::to_string(i)};
        q.knowledge_class = KnowledgeClass::Seen;
        q.source = SourceKind::TriviaQA;
        d.records.push_back(q);
    }
    return d;
}

Dataset make_unseen(int n) {
    Dataset d;
    d.name = "mini-unseen";
    d.knowledge_class = KnowledgeClass::Unseen;
    const AnswerType types[] = {AnswerType::Number, AnswerType::Person, AnswerType::Time,
                                AnswerType::Location, AnswerType::Others};
    for (int i = 0; i < n; ++i) {
        QuestionRecord q;
        q.id = "u" + std::to_string(i);
        q.text = "What is unseen fact " + std::to_string(i) + "?";
        q.knowledge_class = KnowledgeClass::Unseen;
        q.answer_type = types[i % 5];
        q.template_id = "T" + std::to_string(1 + i % 20);
        d.records.push_back(q);
    }
    return d;
}

// Model that answers gold for seen questions, refuses unseen ones, and
// re-selects its own answer on every MCQ probe.
CallbackResponder::Fn perfect_model(const std::map<std::string, std::string>& gold) {
    return [gold](const std::string& prompt) -> std::string {
        const std::string question = last_question(prompt);
        const auto it = gold.find(question);
        const bool is_mcq = prompt.rfind("INSTRUCTION: Please answer "
                                         "knowledge-related multi-choice",
                                         0) == 0;
        if (is_mcq) {
            const auto options = mcq_options(prompt);
            const std::string target = it != gold.end() ? it->second : "unsure";
            for (std::size_t i = 0; i < options.size(); ++i) {
                if (options[i] == target) {
                    return std::string(1, static_cast<char>('A' + i));
                }
            }
            return "E";
        }
        return it != gold.end() ? it->second : "unsure";
    };
}

CallbackResponder::Fn scripted_judge() {
    return [](const std::string& prompt) -> std::string {
        if (prompt.find("Distractors:") != std::string::npos) {
            return "alpha [SEP] beta [SEP] gamma [SEP] delta [SEP] epsilon";
        }
        if (prompt.find("Correctness:") != std::string::npos) return "no";
        return "";
    };
}

RunConfig base_config(const std::filesystem::path& dir, const Dataset& seen,
                      const Dataset& unseen) {
    save_dataset(dir / "seen.jsonl", seen);
    save_dataset(dir / "unseen.jsonl", unseen);
    RunConfig config;
    config.model.kind = "scripted";
    config.model.name = "test-model";
    config.seen_path = dir / "seen.jsonl";
    config.unseen_path = dir / "unseen.jsonl";
    config.settings = {SettingKind::ZeroShot};
    config.seed = 11;
    config.x_mcqs = 20;
    config.workers = 4;
    config.cache_dir = dir / "cache";
    config.output_dir = dir / "out";
    return config;
}

}  // namespace

TEST_CASE("parse_ini handles sections, comments and spacing") {
    const IniSections sections = parse_ini(
        "# comment\n"
        "[model]\n"
        "kind = http\n"
        "base_url = http://localhost:8000\n"
        "; another comment\n"
        "[run]\n"
        "seed=7\n"
        "name = spaced out value\n");
    CHECK(sections.at("model").at("kind") == "http");
    CHECK(sections.at("model").at("base_url") == "http://localhost:8000");
    CHECK(sections.at("run").at("seed") == "7");
    CHECK(sections.at("run").at("name") == "spaced out value");
    CHECK_THROWS_AS(parse_ini("[model\nkind = x\n"), ConfigError);
    CHECK_THROWS_AS(parse_ini("stray line\n"), ConfigError);
}

TEST_CASE("RunConfig::load resolves paths against the config directory") {
    const auto dir = fresh_dir("config");
    save_dataset(dir / "seen.jsonl", make_seen(2));
    save_dataset(dir / "unseen.jsonl", make_unseen(2));
    std::ofstream(dir / "run.ini")
        << "[model]\nkind = scripted\nname = m\ndefault = unsure\n"
        << "[judge]\nkind = scripted\nname = j\ndefault = no\n"
        << "[embedder]\nkind = scripted\ndim = 16\n"
        << "[datasets]\nseen = seen.jsonl\nunseen = unseen.jsonl\n"
        << "[settings]\nkinds = zero-shot, four-shot\n"
        << "[run]\nseed = 9\nx_mcqs = 5\ncache_dir = cache\noutput_dir = out\n";
    const RunConfig config = RunConfig::load(dir / "run.ini");
    CHECK(config.model.name == "m");
    CHECK(config.judge.default_reply == "no");
    CHECK(config.embedder.dim == 16);
    CHECK(config.seen_path == dir / "seen.jsonl");
    CHECK(config.settings.size() == 2);
    CHECK(config.settings[1] == SettingKind::FourShot);
    CHECK(config.seed == 9);
    CHECK(config.x_mcqs == 5);
    CHECK(config.cache_dir == dir / "cache");
    std::filesystem::remove_all(dir);
}

TEST_CASE("load_backend_config prefers the named section and falls back") {
    const auto dir = fresh_dir("backend_config");
    std::ofstream(dir / "judge.ini")
        << "[judge]\nkind = scripted\nname = j\ndefault = no\n";
    const BackendConfig sectioned = load_backend_config(dir / "judge.ini", "judge");
    CHECK(sectioned.name == "j");
    CHECK(sectioned.default_reply == "no");

    std::ofstream(dir / "flat.ini") << "kind = http\nbase_url = http://x\nmodel = m\n";
    const BackendConfig flat = load_backend_config(dir / "flat.ini", "judge");
    CHECK(flat.kind == "http");
    CHECK(flat.model == "m");

    std::ofstream(dir / "bad.ini") << "[model]\nkind = telepathy\n";
    CHECK_THROWS_AS(load_backend_config(dir / "bad.ini", "model"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("make_responder wires scripted tables and rules from files") {
    const auto dir = fresh_dir("factory");
    std::ofstream(dir / "table.jsonl")
        << R"({"prompt": "P", "completion": "exact hit"})" << '\n';
    std::ofstream(dir / "rules.jsonl")
        << R"({"contains": "needle", "completion": "rule hit"})" << '\n';
    BackendConfig config;
    config.kind = "scripted";
    config.name = "factory-test";
    config.table = dir / "table.jsonl";
    config.rules = dir / "rules.jsonl";
    config.default_reply = "fallback";

    const auto backend = make_responder(config);
    CHECK(backend->respond("P", {}) == "exact hit");
    CHECK(backend->respond("hay needle stack", {}) == "rule hit");
    CHECK(backend->respond("nothing", {}) == "fallback");
    CHECK(backend->id() == "factory-test");
    CHECK(backend->mode() == "scripted");

    BackendConfig emb;
    emb.kind = "scripted";
    emb.dim = 8;
    const auto embedder = make_embedder(emb);
    CHECK(embedder->embed("hello").size() == 8);
    std::filesystem::remove_all(dir);
}

TEST_CASE("round_half_away and format_scaled") {
    CHECK(round_half_away(0.125, 2) == doctest::Approx(0.13));
    CHECK(round_half_away(-0.125, 2) == doctest::Approx(-0.13));
    CHECK(round_half_away(35.454875, 2) == doctest::Approx(35.45));
    CHECK(format_scaled(0.5) == "50.00");
    CHECK(format_scaled(-0.713) == "-71.30");
    CHECK(format_scaled(0.0005) == "0.05");
    CHECK(format_scaled(std::nullopt) == "-");
}

TEST_CASE("run_eval: uniform refusal pushes UR and IUR to one") {
    const auto dir = fresh_dir("refusal");
    const Dataset seen = make_seen(6);
    const Dataset unseen = make_unseen(6);
    const RunConfig config = base_config(dir, seen, unseen);

    CallbackResponder model([](const std::string&) { return std::string("unsure"); });
    CallbackResponder judge(scripted_judge());
    const RunResult result = run_eval(config, {&model, &judge, nullptr});

    REQUIRE(result.reports.size() == 1);
    const MetricsReport& report = result.reports[0];
    CHECK(report.factuality.ur == 1.0);
    CHECK(report.reliability.iur == 1.0);
    CHECK(report.factuality.cr == 0.0);
    CHECK(report.counts.n_uninformative == 6);
    CHECK(report.counts.l_uninformative == 6);
    // Nothing is probed when every response is uninformative.
    CHECK(result.stages.at("zero-shot").consistency == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_eval: a perfect model maxes the seen metrics") {
    const auto dir = fresh_dir("perfect");
    const Dataset seen = make_seen(5);
    const Dataset unseen = make_unseen(5);
    const RunConfig config = base_config(dir, seen, unseen);

    std::map<std::string, std::string> gold;
    for (const QuestionRecord& q : seen.records) gold[q.text] = q.gold_answers[0];
    CallbackResponder model(perfect_model(gold));
    CallbackResponder judge(scripted_judge());
    const RunResult result = run_eval(config, {&model, &judge, nullptr});

    const MetricsReport& report = result.reports[0];
    CHECK(report.factuality.cr == 1.0);
    CHECK(report.factuality.wr == 0.0);
    CHECK(*report.consistency.c_correct == 1.0);
    CHECK(report.reliability.nccr == 1.0);
    CHECK(report.factuality.ur == 1.0);
    CHECK(report.reliability.iur == 1.0);
    // counts conservation: responses = |seen| + |unseen| and consistency
    // records cover exactly the correct/wrong items.
    const StageCounts& counts = result.stages.at("zero-shot");
    CHECK(counts.responses == 10);
    CHECK(counts.labels == 10);
    CHECK(counts.consistency ==
          report.counts.n_correct + report.counts.n_wrong + report.counts.l_wrong);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_eval is deterministic and replays from cache") {
    const auto dir = fresh_dir("determinism");
    const Dataset seen = make_seen(8);
    const Dataset unseen = make_unseen(8);

    std::map<std::string, std::string> gold;
    int i = 0;
    for (const QuestionRecord& q : seen.records) {
        // Half the seen answers are wrong to exercise the judge path.
        gold[q.text] = (i++ % 2 == 0) ? q.gold_answers[0] : "not it";
    }
    CallbackResponder model(perfect_model(gold));
    CallbackResponder judge(scripted_judge());

    RunConfig config = base_config(dir, seen, unseen);
    config.output_dir = dir / "out1";
    const RunResult first = run_eval(config, {&model, &judge, nullptr});
    CHECK(first.backend_calls > 0);

    config.output_dir = dir / "out2";
    const RunResult second = run_eval(config, {&model, &judge, nullptr});
    // Warm cache: no backend traffic at all.
    CHECK(second.backend_calls == 0);

    for (const char* name : {"reports/report-zero-shot.json", "labels-zero-shot.jsonl",
                             "consistency-zero-shot.jsonl", "manifest.json"}) {
        CAPTURE(name);
        CHECK(read_file(dir / "out1" / name) == read_file(dir / "out2" / name));
    }

    // Wrong seen answers were judged "no" -> Wrong, and probed.
    const MetricsReport& report = first.reports[0];
    CHECK(report.counts.n_wrong == 4);
    CHECK(report.counts.n_correct == 4);
    CHECK(report.factuality.ncr == doctest::Approx(0.0));
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_eval resumes from completed stage files") {
    const auto dir = fresh_dir("resume");
    const Dataset seen = make_seen(4);
    const Dataset unseen = make_unseen(4);
    std::map<std::string, std::string> gold;
    for (const QuestionRecord& q : seen.records) gold[q.text] = q.gold_answers[0];

    CallbackResponder model(perfect_model(gold));
    CallbackResponder judge(scripted_judge());
    RunConfig config = base_config(dir, seen, unseen);
    const RunResult first = run_eval(config, {&model, &judge, nullptr});

    // Remove the cache but keep stage files: a re-run must load them and
    // never touch a backend.
    std::filesystem::remove_all(config.cache_dir);
    const RunResult resumed = run_eval(config, {&model, &judge, nullptr});
    CHECK(resumed.backend_calls == 0);
    CHECK(report_to_json(resumed.reports[0]) == report_to_json(first.reports[0]));
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_eval refuses stage files that belong to another dataset") {
    const auto dir = fresh_dir("stale");
    const Dataset seen = make_seen(3);
    const Dataset unseen = make_unseen(3);
    std::map<std::string, std::string> gold;
    for (const QuestionRecord& q : seen.records) gold[q.text] = q.gold_answers[0];
    CallbackResponder model(perfect_model(gold));
    CallbackResponder judge(scripted_judge());
    const RunConfig config = base_config(dir, seen, unseen);
    run_eval(config, {&model, &judge, nullptr});

    // Rewrite one label row with a foreign question id.
    const auto labels_path = dir / "out" / "labels-zero-shot.jsonl";
    auto rows = read_jsonl(labels_path);
    rows[1]["question_id"] = "someone-else";
    write_jsonl(labels_path, rows);
    CHECK_THROWS_AS(run_eval(config, {&model, &judge, nullptr}), PartialRun);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_eval with few-shot settings uses the repositories") {
    const auto dir = fresh_dir("fewshot");
    const Dataset seen = make_seen(3);
    const Dataset unseen = make_unseen(3);
    std::map<std::string, std::string> gold;
    for (const QuestionRecord& q : seen.records) gold[q.text] = q.gold_answers[0];

    RunConfig config = base_config(dir, seen, unseen);
    config.settings = {SettingKind::FourShot, SettingKind::FourTwo};

    ScriptedEmbedder embedder(16);
    ShotRepository r_seen;
    r_seen.name = "r_seen";
    for (int i = 0; i < 6; ++i) {
        ShotEntry entry;
        entry.question = "Repo seen question " + std::to_string(i) + "?";
        entry.answer = "repo answer " + std::to_string(i);
        entry.embedding = embedder.embed(entry.question);
        r_seen.entries.push_back(entry);
    }
    ShotRepository r_unseen = r_seen;
    r_unseen.name = "r_unseen";
    r_seen.save(dir / "r_seen.jsonl");
    r_unseen.save(dir / "r_unseen.jsonl");
    config.r_seen_path = dir / "r_seen.jsonl";
    config.r_unseen_path = dir / "r_unseen.jsonl";

    CallbackResponder model(perfect_model(gold));
    CallbackResponder judge(scripted_judge());
    const RunResult result = run_eval(config, {&model, &judge, &embedder});
    CHECK(result.reports.size() == 2);

    // Few-shot prompts reached the model: its cache now holds prompts with
    // repository shots.
    bool saw_shots = false;
    for (const json& row : read_jsonl(dir / "out" / "responses-four-shot.jsonl")) {
        (void)row;
        saw_shots = true;
    }
    CHECK(saw_shots);

    // Without an embedder the few-shot run must fail loudly.
    RunConfig broken = config;
    broken.output_dir = dir / "broken";
    broken.cache_dir = dir / "cache2";
    CHECK_THROWS_AS(run_eval(broken, {&model, &judge, nullptr}), EmbedderUnavailable);
    std::filesystem::remove_all(dir);
}

TEST_CASE("emit_report renders the fixture bundle leaderboards and CSVs") {
    const auto dir = fresh_dir("emit");
    std::filesystem::create_directories(dir / "reports");
    for (const MetricsReport& report : kbrel::testing::published_reports()) {
        atomic_write(dir / "reports" /
                         ("report-" + report.model_id + "-" + report.setting + ".json"),
                     report_to_json(report).dump(1));
    }
    emit_report(dir);

    const std::string leaderboard = read_file(dir / "leaderboard-four-shot.md");
    const std::size_t nccr_pos = leaderboard.find("## nccr");
    REQUIRE(nccr_pos != std::string::npos);
    CHECK(leaderboard.find("| 1 | gpt-3.5-turbo | 35.45 |", nccr_pos) != std::string::npos);

    const std::string csv = read_file(dir / "metrics-four-shot.csv");
    CHECK(csv.find("model_id,cr,wr,ncr,ur,") == 0);
    CHECK(csv.find("gpt-3.5-turbo,61.17,28.97,32.20,94.70,85.16,57.43,19.62,38.53,"
                   "52.09,16.64,35.45,98.96") != std::string::npos);
    // Absent cells render as "-".
    CHECK(csv.find("llama2chat-70b") != std::string::npos);
    const std::string zs_csv = read_file(dir / "metrics-zero-shot.csv");
    CHECK(zs_csv.find("flan-t5-0.78b,2.13,3.70,-1.57,100.00,85.23,45.68,-,45.68,"
                      "1.82,1.69,0.13,100.00") != std::string::npos);

    const std::string correlations = read_file(dir / "correlations.csv");
    CHECK(correlations.find("ncr:ur,four-shot-2,0.6160") != std::string::npos);

    CHECK(std::filesystem::exists(dir / "bundle.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("emit_report without reports raises MissingReports") {
    const auto dir = fresh_dir("emit_empty");
    CHECK_THROWS_AS(emit_report(dir), MissingReports);
    std::filesystem::remove_all(dir);
}

TEST_CASE("probe_consistency marks distractor shortfalls as unprobed") {
    QuestionRecord q;
    q.id = "q1";
    q.text = "Q?";
    q.knowledge_class = KnowledgeClass::Seen;
    q.gold_answers = {"g"};

    CallbackResponder model([](const std::string&) { return std::string("A"); });
    CallbackResponder starved(
        [](const std::string&) { return std::string("only [SEP] two"); });
    JudgeClient judge(starved);
    const auto records = probe_consistency({{&q, "r"}}, model, judge, 5, 1, 2);
    REQUIRE(records.size() == 1);
    CHECK(records[0].unprobed);
}
