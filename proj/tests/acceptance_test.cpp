// Acceptance suite: one line per criterion, nonzero exit when any fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "fixture_helpers.hpp"
#include "helpers.hpp"
#include "kbrel/analysis.hpp"
#include "kbrel/classify.hpp"
#include "kbrel/consistency.hpp"
#include "kbrel/corpus.hpp"
#include "kbrel/harness.hpp"
#include "kbrel/jsonl.hpp"
#include "kbrel/prompting.hpp"
#include "kbrel/prompts.hpp"
#include "kbrel/rng.hpp"

using namespace kbrel;
using kbrel::testing::CallbackResponder;
using kbrel::testing::last_question;
using kbrel::testing::load_published_rows;
using kbrel::testing::mcq_options;
using kbrel::testing::PublishedRow;

namespace {

const std::filesystem::path kSource = KBREL_SOURCE_DIR;

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw Failure(message);
}

std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("kbrel_acceptance_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------- criterion 1
std::string criterion_metric_identities() {
    const std::vector<PublishedRow> rows = load_published_rows();
    require(rows.size() == 78, "fixture must hold 26 models x 3 settings");
    const double tol = 0.01 + 1e-9;
    std::vector<std::string> violations;
    auto check = [&](const PublishedRow& row, const char* metric, double recomputed,
                     double tabulated) {
        if (std::fabs(recomputed - tabulated) > tol) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%s %s %s: recomputed %.4f vs table %.2f",
                          row.model_id.c_str(), row.setting.c_str(), metric, recomputed,
                          tabulated);
            violations.emplace_back(buf);
        }
    };
    for (const PublishedRow& row : rows) {
        check(row, "ncr", row.cr - row.wr, row.ncr);
        const double c_wrong =
            row.c_wrong_u ? (row.c_wrong_s + *row.c_wrong_u) / 2 : row.c_wrong_s;
        check(row, "c_wrong", c_wrong, row.c_wrong);
        check(row, "ccr", row.cr * row.c_correct / 100, row.ccr);
        check(row, "cwr", row.wr * row.c_wrong_s / 100, row.cwr);
        check(row, "nccr", (row.cr * row.c_correct - row.wr * row.c_wrong_s) / 100,
              row.nccr);
        const double iur =
            row.c_wrong_u ? 100 - (100 - row.ur) * *row.c_wrong_u / 100 : 100.0;
        check(row, "iur", iur, row.iur);
    }

    // Spot anchors.
    for (const PublishedRow& row : rows) {
        if (row.model_id == "gpt-3.5-turbo" && row.setting == "four-shot") {
            require(row.ncr == 32.20 && row.c_wrong == 38.53 && row.ccr == 52.09 &&
                        row.cwr == 16.64 && row.nccr == 35.45 && row.iur == 98.96,
                    "gpt-3.5 four-shot anchors drifted in the fixture");
        }
        if (row.model_id == "flan-t5-0.78b" && row.setting == "zero-shot") {
            require(row.iur == 100.00 && !row.c_wrong_u.has_value(),
                    "flan-t5-0.78b zero-shot anchor drifted in the fixture");
        }
    }

    if (!violations.empty()) {
        std::ostringstream out;
        out << violations.size()
            << " of 468 recomputed values exceed the 0.01 tolerance (inconsistent cells in the "
               "published tables themselves; see README):";
        for (const std::string& v : violations) out << "\n           - " << v;
        throw Failure(out.str());
    }
    return "all 468 recomputed values within 0.01 on the x100 scale";
}

// ---------------------------------------------------------------- criterion 2
std::string criterion_correlations() {
    const auto reports = kbrel::testing::published_reports();
    const json table = json::parse(
        read_file(kSource / "data" / "fixtures" / "published_correlations.json"));
    require(table.size() == 21, "correlation fixture must hold 7 pairs x 3 settings");
    double max_dev = 0;
    for (const json& cell : table) {
        const std::string pair = cell.at("pair").get<std::string>();
        const std::string setting = cell.at("setting").get<std::string>();
        std::vector<MetricsReport> group;
        for (const MetricsReport& r : reports) {
            if (r.setting == setting) group.push_back(r);
        }
        const auto rows = correlate_reports(group, {pair});
        const double dev = std::fabs(rows[0].result.rho - cell.at("rho").get<double>());
        max_dev = std::max(max_dev, dev);
        require(dev <= 0.03, pair + " " + setting + " deviates by " + std::to_string(dev));
        if (pair == "ncr:ur" && setting == "four-shot-2") {
            require(std::fabs(rows[0].result.rho - 0.62) <= 0.03,
                    "ncr:ur four-shot-2 is not 0.62 +- 0.03");
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "all 21 cells within 0.03 (max deviation %.4f)",
                  max_dev);
    return buf;
}

// ---------------------------------------------------------------- criterion 3
std::string criterion_dataset_generation() {
    const auto dir = fresh_dir("gen");
    const std::string binary = KBREL_BINARY;
    const std::string pools = (kSource / "data" / "pools").string();
    auto generate = [&](const std::string& out) {
        const std::string cmd = binary + " gen-unseen --pools \"" + pools +
                                "\" --per-template 150 --seed 7 --out \"" + out +
                                "\" > /dev/null";
        require(std::system(cmd.c_str()) == 0, "gen-unseen failed: " + cmd);
    };
    generate((dir / "a.jsonl").string());
    generate((dir / "b.jsonl").string());
    require(read_file(dir / "a.jsonl") == read_file(dir / "b.jsonl"),
            "same seed must produce byte-identical datasets");

    const Dataset dataset = load_dataset(dir / "a.jsonl");
    require(dataset.size() == 3000, "expected 3000 questions");
    std::map<std::string, int> per_template;
    std::map<AnswerType, int> per_type;
    std::set<std::string> texts;
    for (const QuestionRecord& q : dataset.records) {
        ++per_template[q.template_id.value_or("?")];
        ++per_type[q.answer_type];
        require(q.text.find('[') == std::string::npos &&
                    q.text.find(']') == std::string::npos,
                "residual bracket in: " + q.text);
        require(texts.insert(q.text).second, "duplicate text: " + q.text);
    }
    require(per_template.size() == 20, "expected 20 templates");
    for (const auto& [tpl, count] : per_template) {
        require(count == 150, tpl + " has " + std::to_string(count) + " questions");
    }
    for (const auto& [type, count] : per_type) {
        require(count == 600, to_string(type) + " group has " + std::to_string(count));
    }
    std::filesystem::remove_all(dir);
    return "3000 questions, 150 per template, 600 per answer type, unique, "
           "byte-identical reruns";
}

// ---------------------------------------------------------------- criterion 4
std::string criterion_consistency_oracle() {
    Rng rng(20240413);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::string qid = "case-" + std::to_string(trial);
        const std::string response = "answer-" + std::to_string(rng.next_below(100));
        const int pool_size = 3 + static_cast<int>(rng.next_below(20));
        std::vector<std::string> pool;
        for (int i = 0; i < pool_size; ++i) pool.push_back("d" + std::to_string(i));
        const std::uint64_t seed = rng.next();
        const int x_mcqs = 20;

        const auto mcqs = build_mcqs(qid, response, pool, x_mcqs, seed);
        // Scripted selections: uniform over the five positions or Unparsed.
        std::vector<std::optional<int>> selections;
        for (int i = 0; i < x_mcqs; ++i) {
            const std::uint64_t pick = rng.next_below(6);
            selections.push_back(pick == 5 ? std::nullopt
                                           : std::optional<int>(static_cast<int>(pick)));
        }
        const ConsistencyRecord record = cons_score(selections, mcqs);

        // Independent brute-force recount.
        int matches = 0;
        for (int i = 0; i < x_mcqs; ++i) {
            if (selections[i].has_value() &&
                mcqs[i].options[*selections[i]] == response &&
                *selections[i] == mcqs[i].original_index) {
                ++matches;
            }
        }
        require(record.match_count == matches, "match_count mismatch at " + qid);
        require(record.cons == static_cast<double>(matches) / x_mcqs,
                "cons is not match_count / X_MCQs at " + qid);
        require(record.cons * x_mcqs == matches, "cons drifts at X_MCQs = 20");
    }
    return "1000 randomized cases equal the brute-force recount exactly";
}

// ---------------------------------------------------------------- criterion 5
std::string criterion_classification_fixtures() {
    struct Example {
        const char* question;
        const char* response;
        UninformativeKind expected;
    };
    const Example examples[] = {
        {"What is the occupation of Hugo Pike Stanton?",
         "1. (a) (b) (c) (d) (e) (f) (g) (h) (i) (j) (k) (l) (m) (n) (o) (p) (q) (r) "
         "(s) (t) (u) (v) (w) (x) (y) (z) (aa) (ab) (ac) (ad) (ae) (af) (",
         UninformativeKind::Repetition},
        {"How many children does Ivy Gale Mercer have?",
         "1. 2. 3. 4. 5. 6. 7. 8. 9. 10. 11. 12. 13. 14. 15. 16. 17. 18. 19. 20. 21. "
         "22. 23. 24. 25. 26. 27.",
         UninformativeKind::Repetition},
        {"What was the cause of Felix Moss Darby's death?",
         "a swollen swollen swollen swollen swollen swollen swollen swollen swollen "
         "swollen swollen swollen swollen swollen swollen swollen swollen swollen",
         UninformativeKind::Repetition},
        {"Who is Noah Catherine Cooper's mom?",
         "noah catherine cooper's mom is ________.", UninformativeKind::NoneContent},
        {"Where was Clara Finch Oakley born?", "`'", UninformativeKind::NoneContent},
        {"In what year did Jasper Roan Hale die?",
         "<a href=\"https://i.stack.imgur.com/88888.png\" rel=\"nofollow "
         "noreferrer\"><image></a>",
         UninformativeKind::NoneContent},
        {"Who won the bronze medal of Women's 100m Freestyle at the XXXIII Summer "
         "Olympic Games?",
         "unsure", UninformativeKind::Unsure},
        {"On which date was Milo Thorne Vance born?", "i do not know.",
         UninformativeKind::Unsure},
        {"Who is the supreme leader of Atlantis in 2040?",
         "i'm just an ai, i don't have access to real-time information or the ability "
         "to predict the future",
         UninformativeKind::Unsure},
    };
    int kind_counts[3] = {0, 0, 0};
    for (const Example& example : examples) {
        QuestionRecord q;
        q.id = "u";
        q.text = example.question;
        q.knowledge_class = KnowledgeClass::Unseen;
        q.template_id = "T1";
        ResponseRecord r;
        r.question_id = "u";
        r.answer_text = example.response;
        const Label label = classify_response(q, r, nullptr);
        require(label.kind == LabelKind::Uninformative,
                std::string("not uninformative: ") + example.response);
        require(label.uninformative_kind == example.expected,
                std::string("wrong uninformative kind for: ") + example.response);
        ++kind_counts[static_cast<int>(example.expected)];
    }
    require(kind_counts[0] == 3 && kind_counts[1] == 3 && kind_counts[2] == 3,
            "expected 3 repetition + 3 none + 3 unsure");

    // Correctness-prompt examples through a scripted judge replaying the
    // published completions.
    struct CorrectnessExample {
        const char* question;
        std::vector<std::string> gold;
        const char* prediction;
        const char* verdict;
        bool correct;
    };
    const CorrectnessExample correctness[] = {
        {"Who authored The Taming of the Shrew (published in 2002)?",
         {"William Shakespeare", "Roma Gill"}, "W Shakespeare", "yes", true},
        {"What country is Maharashtra Metro Rail Corporation Limited located in?",
         {"India"}, "Maharashtra", "no", false},
        {"Edward Tise (known for Full Metal Jacket (1987)) is in what department?",
         {"sound department"}, "2nd Infantry Division, United States Army", "no", false},
        {"Which era did Michael Oakeshott belong to?", {"20th-century philosophy"},
         "20th century.", "yes", true},
    };
    ScriptedResponder backend("?");
    for (const CorrectnessExample& example : correctness) {
        backend.add_exact(render_correctness_prompt(example.question, example.gold,
                                                    example.prediction),
                          example.verdict);
    }
    JudgeClient judge(backend);
    for (const CorrectnessExample& example : correctness) {
        QuestionRecord q;
        q.id = "s";
        q.text = example.question;
        q.gold_answers = example.gold;
        q.knowledge_class = KnowledgeClass::Seen;
        ResponseRecord r;
        r.question_id = "s";
        r.answer_text = example.prediction;
        const Label label = classify_response(q, r, &judge);
        require((label.kind == LabelKind::Correct) == example.correct,
                std::string("judge path mislabeled: ") + example.prediction);
    }
    return "9/9 uninformative kinds and 4/4 correctness verdicts reproduced";
}

// ---------------------------------------------------------------- criterion 6
std::string criterion_prompt_goldens() {
    struct FixedEmbedder : Embedder {
        std::vector<double> embed(const std::string&) override { return {1, 0, 0, 0}; }
        std::string id() const override { return "fixed"; }
        long invocations() const override { return 0; }
    };
    ShotRepository r_seen;
    r_seen.name = "r_seen";
    r_seen.entries = {
        {"What is the capital of France?", "Paris", {1, 0, 0, 0}},
        {"Who wrote Hamlet?", "William Shakespeare", {1, 1, 0, 0}},
        {"What is the largest planet?", "Jupiter", {1, 2, 0, 0}},
        {"Who painted the Mona Lisa?", "Leonardo da Vinci", {1, 3, 0, 0}},
        {"When did WW2 end?", "1945", {0, 1, 0, 0}},
    };
    ShotRepository r_unseen;
    r_unseen.name = "r_unseen";
    r_unseen.entries = {
        {"Who is Aurora Vale Winslow's mom?", "unsure", {1, 0, 0, 0}},
        {"How old was Magnus Reed Colfax in 2015?", "unsure", {1, 1, 0, 0}},
        {"Where was Fiona Lark Mercer born?", "unsure", {0, 1, 0, 0}},
    };
    QuestionRecord q;
    q.id = "T8-0";
    q.text = "Who is Noah Catherine Cooper's mom?";
    q.knowledge_class = KnowledgeClass::Unseen;
    q.template_id = "T8";
    FixedEmbedder embedder;
    const ShotRepositories repos{&r_seen, &r_unseen};
    const auto golden_dir = kSource / "tests" / "golden";

    require(build_prompt(q, {SettingKind::ZeroShot, 7}, {}, nullptr).text ==
                read_file(golden_dir / "zero_shot.txt"),
            "zero-shot prompt differs from golden");
    require(build_prompt(q, {SettingKind::FourShot, 7}, repos, &embedder).text ==
                read_file(golden_dir / "four_shot.txt"),
            "four-shot prompt differs from golden");
    require(build_prompt(q, {SettingKind::FourTwo, 7}, repos, &embedder).text ==
                read_file(golden_dir / "four_shot_two.txt"),
            "four-shot-two prompt differs from golden");
    MCQInstance mcq;
    mcq.question_id = "T8-0";
    mcq.options = {"Mary Cooper", "unsure", "Jane Smith", "Emily Stone", "Anna Cooper"};
    require(build_mcq_prompt(mcq, q.text, {SettingKind::ZeroShot, 7}).text ==
                read_file(golden_dir / "mcq.txt"),
            "mcq prompt differs from golden");
    return "zero-shot, four-shot, four-shot-two and MCQ prompts byte-identical";
}

// ---------------------------------------------------------------- criterion 7
std::string criterion_end_to_end() {
    const auto dir = fresh_dir("e2e");

    Dataset seen;
    seen.name = "mini-seen";
    seen.knowledge_class = KnowledgeClass::Seen;
    Dataset unseen;
    unseen.name = "mini-unseen";
    unseen.knowledge_class = KnowledgeClass::Unseen;
    const AnswerType types[] = {AnswerType::Number, AnswerType::Person, AnswerType::Time,
                                AnswerType::Location, AnswerType::Others};
    std::map<std::string, std::string> answers;
    for (int i = 0; i < 50; ++i) {
        QuestionRecord s;
        s.id = "s" + std::to_string(i);
        s.text = "What is seen fact " + std::to_string(i) + "?";
        s.gold_answers = {"gold " + std::to_string(i)};
        s.knowledge_class = KnowledgeClass::Seen;
        s.source = SourceKind::PopQA;
        answers[s.text] = (i % 2 == 0) ? s.gold_answers[0] : "made up " + std::to_string(i);
        seen.records.push_back(std::move(s));

        QuestionRecord u;
        u.id = "u" + std::to_string(i);
        u.text = "What is unseen fact " + std::to_string(i) + "?";
        u.knowledge_class = KnowledgeClass::Unseen;
        u.answer_type = types[i % 5];
        u.template_id = "T" + std::to_string(1 + i % 20);
        if (i % 3 != 0) answers[u.text] = "fabricated " + std::to_string(i);
        unseen.records.push_back(std::move(u));
    }
    save_dataset(dir / "seen.jsonl", seen);
    save_dataset(dir / "unseen.jsonl", unseen);

    // Model: answers its table (or unsure), re-picks its own answer on MCQs
    // for two thirds of the questions and drifts to unsure on the rest.
    auto model_fn = [answers](const std::string& prompt) -> std::string {
        const std::string question = last_question(prompt);
        const auto it = answers.find(question);
        const bool is_mcq =
            prompt.rfind("INSTRUCTION: Please answer knowledge-related multi-choice",
                         0) == 0;
        if (!is_mcq) return it == answers.end() ? "unsure" : it->second;
        std::size_t h = 0;
        for (char c : question) h = h * 131 + static_cast<unsigned char>(c);
        const std::string target =
            (it != answers.end() && h % 3 != 0) ? it->second : "unsure";
        const auto options = mcq_options(prompt);
        for (std::size_t i = 0; i < options.size(); ++i) {
            if (options[i] == target) return std::string(1, static_cast<char>('A' + i));
        }
        return "E";
    };
    auto judge_fn = [](const std::string& prompt) -> std::string {
        if (prompt.find("Distractors:") != std::string::npos) {
            std::string out;
            for (int i = 0; i < 20; ++i) {
                if (i) out += " [SEP] ";
                out += "distractor " + std::to_string(i);
            }
            return out;
        }
        if (prompt.find("Correctness:") != std::string::npos) return "no";
        return "";
    };

    RunConfig config;
    config.model.kind = "scripted";
    config.model.name = "mini-model";
    config.seen_path = dir / "seen.jsonl";
    config.unseen_path = dir / "unseen.jsonl";
    config.settings = {SettingKind::ZeroShot};
    config.seed = 20240413;
    config.x_mcqs = 20;
    config.workers = 8;
    config.cache_dir = dir / "cache";

    const auto run_into = [&](const std::filesystem::path& out) {
        CallbackResponder model(model_fn);
        CallbackResponder judge(judge_fn);
        RunConfig c = config;
        c.output_dir = out;
        const RunResult result = run_eval(c, {&model, &judge, nullptr});
        emit_report(out);
        return result.backend_calls;
    };

    const long first_calls = run_into(dir / "out1");
    require(first_calls > 0, "first run must reach the backends");
    run_into(dir / "out2");

    const char* files[] = {"manifest.json",
                           "reports/report-zero-shot.json",
                           "responses-zero-shot.jsonl",
                           "labels-zero-shot.jsonl",
                           "consistency-zero-shot.jsonl",
                           "metrics-zero-shot.csv",
                           "leaderboard-zero-shot.md",
                           "answer_type_ur-zero-shot.csv",
                           "bundle.json"};
    for (const char* file : files) {
        require(read_file(dir / "out1" / file) == read_file(dir / "out2" / file),
                std::string("runs differ in ") + file);
    }

    // Delete the outputs, keep the cache: byte-identical reproduction with
    // zero backend invocations.
    std::filesystem::remove_all(dir / "out2");
    const long warm_calls = run_into(dir / "out2");
    require(warm_calls == 0, "warm-cache rerun made " + std::to_string(warm_calls) +
                                 " backend calls");
    for (const char* file : files) {
        require(read_file(dir / "out1" / file) == read_file(dir / "out2" / file),
                std::string("cache replay differs in ") + file);
    }
    std::filesystem::remove_all(dir);
    return "two 50+50-question runs byte-identical; cache replay made zero "
           "backend calls";
}

// ---------------------------------------------------------------- criterion 8
std::string criterion_property_suites() {
    Rng rng(88);

    // Metric bounds and identities over randomized counts and aggregates.
    for (int trial = 0; trial < 1000; ++trial) {
        LabelSummary summary;
        summary.n = 1 + static_cast<std::int64_t>(rng.next_below(500));
        summary.n_correct = static_cast<std::int64_t>(rng.next_below(summary.n + 1));
        summary.n_wrong =
            static_cast<std::int64_t>(rng.next_below(summary.n - summary.n_correct + 1));
        summary.n_uninformative = summary.n - summary.n_correct - summary.n_wrong;
        summary.l = 1 + static_cast<std::int64_t>(rng.next_below(500));
        summary.l_uninformative = static_cast<std::int64_t>(rng.next_below(summary.l + 1));
        summary.l_wrong = summary.l - summary.l_uninformative;

        ConsistencyAggregates agg;
        auto ratio = [&] { return static_cast<double>(rng.next_below(1001)) / 1000.0; };
        if (summary.n_correct > 0) agg.c_correct = ratio();
        if (summary.n_wrong > 0) agg.c_wrong_s = ratio();
        if (summary.l_wrong > 0) agg.c_wrong_u = ratio();
        if (agg.c_wrong_s && agg.c_wrong_u) {
            agg.c_wrong = (*agg.c_wrong_s + *agg.c_wrong_u) / 2;
        } else if (agg.c_wrong_s || agg.c_wrong_u) {
            agg.c_wrong = agg.c_wrong_s ? agg.c_wrong_s : agg.c_wrong_u;
        }

        const MetricsReport report = build_report("m", "zero-shot", summary, agg);
        const FactualityRates& f = report.factuality;
        const ReliabilityRates& r = report.reliability;
        require(f.ncr == f.cr - f.wr, "NCR != CR - WR");
        require(f.cr + f.wr <= 1.0 + 1e-12, "CR + WR > 1");
        require(r.ccr <= f.cr + 1e-12, "CCR > CR");
        require(r.cwr <= f.wr + 1e-12, "CWR > WR");
        require(r.iur >= f.ur - 1e-12, "IUR < UR");
        require(r.nccr >= -1.0 - 1e-12 && r.nccr <= 1.0 + 1e-12, "NCCR out of range");
        require(f.ncr >= -1.0 && f.ncr <= 1.0, "NCR out of range");
        require(r.iur >= 0.0 && r.iur <= 1.0 + 1e-12, "IUR out of range");
        if (agg.c_wrong_u) {
            require(std::fabs(r.iur - (1.0 - (1.0 - f.ur) * *agg.c_wrong_u)) < 1e-12,
                    "IUR identity broken");
        }
    }

    // Cosine-retrieval scale invariance of the selected index set.
    for (int trial = 0; trial < 1000; ++trial) {
        const int dim = 3 + static_cast<int>(rng.next_below(5));
        ShotRepository repo;
        repo.name = "r";
        const int entries = 5 + static_cast<int>(rng.next_below(10));
        for (int i = 0; i < entries; ++i) {
            ShotEntry entry;
            entry.question = "q";
            entry.answer = "a";
            for (int d = 0; d < dim; ++d) {
                entry.embedding.push_back(
                    static_cast<double>(rng.next_below(2001)) / 1000.0 - 1.0);
            }
            if (std::all_of(entry.embedding.begin(), entry.embedding.end(),
                            [](double x) { return x == 0.0; })) {
                entry.embedding[0] = 0.25;
            }
            repo.entries.push_back(std::move(entry));
        }
        std::vector<double> query;
        for (int d = 0; d < dim; ++d) {
            query.push_back(static_cast<double>(rng.next_below(2001)) / 1000.0 - 1.0);
        }
        if (std::all_of(query.begin(), query.end(), [](double x) { return x == 0.0; })) {
            query[0] = 1.0;
        }
        const std::size_t k = 1 + rng.next_below(4);
        const auto base = retrieve_shots(query, repo, k);

        const double scale = 0.5 + static_cast<double>(rng.next_below(100)) / 10.0;
        ShotRepository scaled = repo;
        for (ShotEntry& entry : scaled.entries) {
            for (double& x : entry.embedding) x *= scale;
        }
        const auto rescaled = retrieve_shots(query, scaled, k);
        require(std::set<std::size_t>(base.begin(), base.end()) ==
                    std::set<std::size_t>(rescaled.begin(), rescaled.end()),
                "scaling embeddings changed the selected index set");
    }

    // Label-count conservation under random labels.
    for (int trial = 0; trial < 1000; ++trial) {
        Dataset dataset;
        dataset.name = "d";
        dataset.knowledge_class = KnowledgeClass::Seen;
        std::vector<ResponseRecord> responses;
        const int n = 1 + static_cast<int>(rng.next_below(60));
        for (int i = 0; i < n; ++i) {
            QuestionRecord q;
            q.id = "q" + std::to_string(i);
            q.text = "t";
            q.gold_answers = {"g"};
            q.knowledge_class = KnowledgeClass::Seen;
            dataset.records.push_back(q);
            ResponseRecord r;
            r.question_id = q.id;
            r.answer_text = "a";
            const std::uint64_t coin = rng.next_below(3);
            r.label = coin == 0   ? Label::correct()
                      : coin == 1 ? Label::wrong()
                                  : Label::uninformative(UninformativeKind::Unsure);
            responses.push_back(r);
        }
        const LabelSummary summary = summarize_labels(dataset, responses);
        require(summary.n_correct + summary.n_wrong + summary.n_uninformative ==
                    summary.n,
                "seen label counts do not conserve");
        require(summary.n == n, "summary misses records");
    }

    // Unseen responses never classify as Correct.
    const char* snippets[] = {"unsure", "42",    "Paris", "i do not know",
                              "",       "maybe", "gold",  "________",
                              "yes yes yes yes yes yes yes yes yes yes"};
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        QuestionRecord q;
        q.id = "u";
        q.text = "Who is person " + std::to_string(trial) + "?";
        q.knowledge_class = KnowledgeClass::Unseen;
        q.template_id = "T8";
        ResponseRecord r;
        r.question_id = "u";
        r.answer_text = snippets[rng.next_below(9)];
        if (rng.next_below(2) == 0) {
            r.answer_text += " token" + std::to_string(rng.next_below(50));
        }
        const Label label = classify_response(q, r, nullptr);
        require(label.kind != LabelKind::Correct, "unseen response labeled Correct");
        ++checked;
    }
    require(checked == 1000, "short-circuited property loop");

    return "4 property suites x 1000 randomized cases hold";
}

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<std::string()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "metric-identity reproduction", 1.0, criterion_metric_identities},
        {2, "correlation reproduction", 1.0, criterion_correlations},
        {3, "dataset generation", 5.0, criterion_dataset_generation},
        {4, "consistency oracle", 30.0, criterion_consistency_oracle},
        {5, "classification fixtures", 30.0, criterion_classification_fixtures},
        {6, "prompt golden files", 30.0, criterion_prompt_goldens},
        {7, "end-to-end determinism", 10.0, criterion_end_to_end},
        {8, "property suites", 60.0, criterion_property_suites},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string verdict;
        bool ok = true;
        try {
            verdict = criterion.run();
        } catch (const std::exception& e) {
            ok = false;
            verdict = e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (ok && elapsed > criterion.budget_seconds) {
            ok = false;
            verdict = "exceeded the " + std::to_string(criterion.budget_seconds) +
                      "s budget (" + std::to_string(elapsed) + "s)";
        }
        std::printf("[%s] criterion %d (%s, %.2fs): %s\n", ok ? "PASS" : "FAIL",
                    criterion.id, criterion.name.c_str(), elapsed, verdict.c_str());
        if (!ok) ++failures;
    }
    if (failures) {
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
