#include "kbrel/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "kbrel/errors.hpp"
#include "kbrel/rng.hpp"
#include "kbrel/text.hpp"

namespace kbrel {

const std::vector<QuestionTemplate>& question_templates() {
    static const std::vector<QuestionTemplate> kTemplates = {
        {"T1", "How many gold medals did [country/region] win at the XXXIV Summer Olympic Games?",
         "[country/region]", PoolBinding::Countries, AnswerType::Number},
        {"T2", "In the 25th FIFA World Cup, what was the final ranking of [country/region]?",
         "[country/region]", PoolBinding::Countries, AnswerType::Number},
        {"T3", "How many children does [person] have?",
         "[person]", PoolBinding::Persons, AnswerType::Number},
        {"T4", "How old was [person] in 2015?",
         "[person]", PoolBinding::Persons, AnswerType::Number},
        {"T5", "Who won the bronze medal of [medal event] at the XXXIII Summer Olympic Games?",
         "[medal event]", PoolBinding::MedalEvents, AnswerType::Person},
        {"T6", "Who is the supreme leader of [country/region] in 2040?",
         "[country/region]", PoolBinding::Countries, AnswerType::Person},
        {"T7", "In 2028, who served as the head coach of [country/region] national football team?",
         "[country/region]", PoolBinding::Countries, AnswerType::Person},
        {"T8", "Who is [person]'s mom?",
         "[person]", PoolBinding::Persons, AnswerType::Person},
        {"T9", "On which date was [person] born?",
         "[person]", PoolBinding::Persons, AnswerType::Time},
        {"T10", "In what year did [person] die?",
         "[person]", PoolBinding::Persons, AnswerType::Time},
        {"T11", "In what year did [person] graduate with the bachelor's degree?",
         "[person]", PoolBinding::Persons, AnswerType::Time},
        {"T12", "When was the wedding date for [person]?",
         "[person]", PoolBinding::Persons, AnswerType::Time},
        {"T13", "Where was [person] born?",
         "[person]", PoolBinding::Persons, AnswerType::Location},
        {"T14", "Where did [person] pass away?",
         "[person]", PoolBinding::Persons, AnswerType::Location},
        {"T15", "Which university did [person] attend for the undergraduate studies?",
         "[person]", PoolBinding::Persons, AnswerType::Location},
        {"T16", "Where was [person]'s wedding held?",
         "[person]", PoolBinding::Persons, AnswerType::Location},
        {"T17", "What was the cause of [person]'s death?",
         "[person]", PoolBinding::Persons, AnswerType::Others},
        // T18-T20 as published; T19 carries no question mark in the source table.
        {"T18", "What is the title of the debut album released by [person]?",
         "[person]", PoolBinding::Persons, AnswerType::Others},
        {"T19", "What is the name of the first film directed by [person]",
         "[person]", PoolBinding::Persons, AnswerType::Others},
        {"T20", "What is the occupation of [person]?",
         "[person]", PoolBinding::Persons, AnswerType::Others},
    };
    return kTemplates;
}

const QuestionTemplate& find_template(const std::string& template_id) {
    for (const QuestionTemplate& t : question_templates()) {
        if (t.id == template_id) return t;
    }
    throw UnknownTemplate("no such template: " + template_id);
}

std::string instantiate_template(const std::string& template_id, const std::string& value) {
    const QuestionTemplate& tpl = find_template(template_id);
    if (trim(value).empty()) {
        throw EmptyPlaceholder("empty placeholder value for " + template_id);
    }
    const std::size_t pos = tpl.text.find(tpl.placeholder);
    std::string out = tpl.text;
    out.replace(pos, tpl.placeholder.size(), value);
    return out;
}

std::vector<std::string> load_pool_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open pool file " + path.string());
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string entry = trim(line);
        if (!entry.empty()) entries.push_back(entry);
    }
    return entries;
}

namespace {
void require_distinct(const std::vector<std::string>& pool, const std::string& name) {
    std::unordered_set<std::string> seen;
    for (const std::string& entry : pool) {
        if (!seen.insert(entry).second) {
            throw DuplicatePoolEntries("pool " + name + " repeats entry: " + entry);
        }
    }
}

void require_size(const std::vector<std::string>& pool, std::size_t expected,
                  const std::string& name) {
    if (pool.size() != expected) {
        throw PoolTooSmall("pool " + name + " has " + std::to_string(pool.size()) +
                           " entries, expected " + std::to_string(expected));
    }
}
}  // namespace

PlaceholderPools PlaceholderPools::load(const std::filesystem::path& dir, std::uint64_t seed) {
    PlaceholderPools pools;
    pools.countries = load_pool_file(dir / "countries.txt");
    pools.medal_events = load_pool_file(dir / "medal_events.txt");
    pools.first_names = load_pool_file(dir / "first_names.txt");
    pools.middle_names = load_pool_file(dir / "middle_names.txt");
    pools.last_names = load_pool_file(dir / "last_names.txt");

    require_size(pools.countries, 150, "countries");
    require_size(pools.medal_events, 150, "medal_events");
    require_size(pools.first_names, 100, "first_names");
    require_size(pools.middle_names, 100, "middle_names");
    require_size(pools.last_names, 100, "last_names");
    require_distinct(pools.countries, "countries");
    require_distinct(pools.medal_events, "medal_events");

    pools.persons = generate_person_names(pools.first_names, pools.middle_names,
                                          pools.last_names, 150,
                                          derive_seed(seed, "persons"));
    return pools;
}

const std::vector<std::string>& PlaceholderPools::pool_for(PoolBinding binding) const {
    switch (binding) {
        case PoolBinding::Countries: return countries;
        case PoolBinding::MedalEvents: return medal_events;
        case PoolBinding::Persons: return persons;
    }
    return persons;
}

std::vector<std::string> generate_person_names(const std::vector<std::string>& first_pool,
                                               const std::vector<std::string>& middle_pool,
                                               const std::vector<std::string>& last_pool,
                                               std::int64_t count, std::uint64_t seed) {
    require_distinct(first_pool, "first_names");
    require_distinct(middle_pool, "middle_names");
    require_distinct(last_pool, "last_names");
    const std::uint64_t space = static_cast<std::uint64_t>(first_pool.size()) *
                                middle_pool.size() * last_pool.size();
    if (count < 0 || static_cast<std::uint64_t>(count) > space) {
        throw CountExceedsSpace("cannot draw " + std::to_string(count) + " names from " +
                                std::to_string(space) + " combinations");
    }
    Rng rng(derive_seed(seed, "person-names"));
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t idx :
         rng.sample_indices(space, static_cast<std::uint64_t>(count))) {
        const std::size_t f = idx % first_pool.size();
        const std::size_t m = (idx / first_pool.size()) % middle_pool.size();
        const std::size_t l = idx / (first_pool.size() * middle_pool.size());
        names.push_back(first_pool[f] + " " + middle_pool[m] + " " + last_pool[l]);
    }
    return names;
}

Dataset generate_unseen_dataset(const PlaceholderPools& pools, std::int64_t per_template,
                                std::uint64_t seed) {
    Dataset dataset;
    dataset.name = "UnseenQA";
    dataset.knowledge_class = KnowledgeClass::Unseen;

    std::unordered_set<std::string> texts;  // case-insensitive collision guard
    for (const QuestionTemplate& tpl : question_templates()) {
        const std::vector<std::string>& pool = pools.pool_for(tpl.pool);
        if (per_template < 0 || static_cast<std::size_t>(per_template) > pool.size()) {
            throw PoolTooSmall("template " + tpl.id + ": pool of " +
                               std::to_string(pool.size()) + " cannot yield " +
                               std::to_string(per_template) + " distinct values");
        }
        Rng rng(derive_seed(seed, "template", tpl.id));
        const auto indices =
            rng.sample_indices(pool.size(), static_cast<std::uint64_t>(per_template));
        std::int64_t ordinal = 0;
        for (std::uint64_t idx : indices) {
            QuestionRecord q;
            q.id = tpl.id + "-" + std::to_string(ordinal++);
            q.text = instantiate_template(tpl.id, pool[idx]);
            q.knowledge_class = KnowledgeClass::Unseen;
            q.answer_type = tpl.answer_type;
            q.source = SourceKind::Template;
            q.template_id = tpl.id;
            if (!texts.insert(to_lower(q.text)).second) {
                throw DuplicateQuestionText("duplicate question text: " + q.text);
            }
            dataset.records.push_back(std::move(q));
        }
    }
    return dataset;
}

std::string to_string(FilterReason reason) {
    switch (reason) {
        case FilterReason::Keep: return "keep";
        case FilterReason::WhyQuestion: return "why-question";
        case FilterReason::MultiAnswer: return "multi-answer";
        case FilterReason::AnswerTooLong: return "answer-too-long";
    }
    return "keep";
}

FilterDecision filter_factoid(const std::string& question,
                              const std::vector<std::string>& gold_answers,
                              bool source_marks_multi_answer) {
    if (starts_with_token(question, "why")) {
        return {false, FilterReason::WhyQuestion};
    }
    if (source_marks_multi_answer) {
        std::unordered_set<std::string> normalized;
        for (const std::string& g : gold_answers) normalized.insert(normalize_answer(g));
        if (normalized.size() > 1) return {false, FilterReason::MultiAnswer};
    }
    for (const std::string& g : gold_answers) {
        if (token_count(g) > 5) return {false, FilterReason::AnswerTooLong};
    }
    return {true, FilterReason::Keep};
}

namespace {
// "1, 4" -> {1, 4}. Empty replies flag nothing; replies with non-numeric
// pieces are treated as unparseable (flag nothing, warn).
std::optional<std::set<std::size_t>> parse_index_reply(const std::string& reply,
                                                       std::size_t batch_size) {
    std::set<std::size_t> flagged;
    const std::string body = trim(reply);
    if (body.empty()) return flagged;
    std::size_t start = 0;
    while (start <= body.size()) {
        std::size_t comma = body.find(',', start);
        std::string piece = trim(body.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        // Tolerate a trailing period on the final index.
        while (!piece.empty() && piece.back() == '.') piece.pop_back();
        if (piece.empty() ||
            !std::all_of(piece.begin(), piece.end(),
                         [](unsigned char c) { return std::isdigit(c); })) {
            return std::nullopt;
        }
        const unsigned long value = std::stoul(piece);
        if (value >= 1 && value <= batch_size) flagged.insert(value);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return flagged;
}
}  // namespace

std::set<std::size_t> detect_time_sensitive(const std::vector<std::string>& questions,
                                            JudgeClient& judge) {
    if (questions.empty()) throw Error("detect_time_sensitive: empty batch");
    const std::string reply = judge.flag_time_sensitive(questions);
    if (auto flagged = parse_index_reply(reply, questions.size())) {
        return *flagged;
    }
    std::cerr << "warning: unparseable time-sensitivity reply, flagging nothing: "
              << reply.substr(0, 120) << '\n';
    return {};
}

SeenSource load_seen_source(const std::filesystem::path& path, SourceKind kind) {
    SeenSource source;
    source.name = path.stem().string();
    source.kind = kind;
    std::ifstream in(path);
    if (!in) throw Error("cannot open source " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const json row = json::parse(line);
        IngestedRecord rec;
        rec.id = row.at("id").get<std::string>();
        rec.question = row.at("question").get<std::string>();
        rec.answers = row.at("answers").get<std::vector<std::string>>();
        rec.distinct_answers = row.value("distinct_answers", false);
        source.records.push_back(std::move(rec));
    }
    return source;
}

Dataset build_seen_dataset(const std::vector<SeenSource>& sources, JudgeClient& judge,
                           std::int64_t per_source, std::uint64_t seed,
                           std::size_t judge_batch) {
    Dataset dataset;
    dataset.name = "SeenQA";
    dataset.knowledge_class = KnowledgeClass::Seen;
    if (judge_batch == 0) judge_batch = 20;

    for (const SeenSource& source : sources) {
        std::vector<const IngestedRecord*> survivors;
        for (const IngestedRecord& rec : source.records) {
            if (filter_factoid(rec.question, rec.answers, rec.distinct_answers).keep) {
                survivors.push_back(&rec);
            }
        }

        // Time-sensitive removal over judge-sized batches.
        std::vector<const IngestedRecord*> stable;
        for (std::size_t offset = 0; offset < survivors.size(); offset += judge_batch) {
            const std::size_t end = std::min(offset + judge_batch, survivors.size());
            std::vector<std::string> questions;
            questions.reserve(end - offset);
            for (std::size_t i = offset; i < end; ++i) {
                questions.push_back(survivors[i]->question);
            }
            const std::set<std::size_t> flagged = detect_time_sensitive(questions, judge);
            for (std::size_t i = offset; i < end; ++i) {
                if (!flagged.count(i - offset + 1)) stable.push_back(survivors[i]);
            }
        }

        if (per_source < 0 || stable.size() < static_cast<std::size_t>(per_source)) {
            throw InsufficientSurvivors(
                source.name + ": " + std::to_string(stable.size()) +
                " records survive filtering, need " + std::to_string(per_source));
        }
        Rng rng(derive_seed(seed, "seen-sample", source.name));
        auto picks = rng.sample_indices(stable.size(), static_cast<std::uint64_t>(per_source));
        std::sort(picks.begin(), picks.end());  // keep source order
        for (std::uint64_t idx : picks) {
            const IngestedRecord& rec = *stable[idx];
            QuestionRecord q;
            q.id = source.name + "-" + rec.id;
            q.text = rec.question;
            q.gold_answers = rec.answers;
            q.knowledge_class = KnowledgeClass::Seen;
            q.answer_type = AnswerType::Others;
            q.source = source.kind;
            dataset.records.push_back(std::move(q));
        }
    }
    return dataset;
}

}  // namespace kbrel
