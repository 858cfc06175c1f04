#include "kbrel/types.hpp"

#include <unordered_set>

#include <nlohmann/json.hpp>

#include "kbrel/errors.hpp"
#include "kbrel/text.hpp"

namespace kbrel {

std::string to_string(KnowledgeClass v) {
    return v == KnowledgeClass::Seen ? "seen" : "unseen";
}

std::string to_string(AnswerType v) {
    switch (v) {
        case AnswerType::Number: return "number";
        case AnswerType::Person: return "person";
        case AnswerType::Time: return "time";
        case AnswerType::Location: return "location";
        case AnswerType::Others: return "others";
    }
    return "others";
}

std::string to_string(SourceKind v) {
    switch (v) {
        case SourceKind::NaturalQuestions: return "natural_questions";
        case SourceKind::TriviaQA: return "trivia_qa";
        case SourceKind::PopQA: return "pop_qa";
        case SourceKind::Template: return "template";
    }
    return "template";
}

KnowledgeClass knowledge_class_from_string(const std::string& s) {
    if (s == "seen") return KnowledgeClass::Seen;
    if (s == "unseen") return KnowledgeClass::Unseen;
    throw Error("unknown knowledge class: " + s);
}

AnswerType answer_type_from_string(const std::string& s) {
    if (s == "number") return AnswerType::Number;
    if (s == "person") return AnswerType::Person;
    if (s == "time") return AnswerType::Time;
    if (s == "location") return AnswerType::Location;
    if (s == "others") return AnswerType::Others;
    throw Error("unknown answer type: " + s);
}

SourceKind source_kind_from_string(const std::string& s) {
    if (s == "natural_questions") return SourceKind::NaturalQuestions;
    if (s == "trivia_qa") return SourceKind::TriviaQA;
    if (s == "pop_qa") return SourceKind::PopQA;
    if (s == "template") return SourceKind::Template;
    throw Error("unknown source kind: " + s);
}

std::string to_string(LabelKind v) {
    switch (v) {
        case LabelKind::Correct: return "correct";
        case LabelKind::Wrong: return "wrong";
        case LabelKind::Uninformative: return "uninformative";
    }
    return "wrong";
}

std::string to_string(UninformativeKind v) {
    switch (v) {
        case UninformativeKind::Repetition: return "repetition";
        case UninformativeKind::NoneContent: return "none";
        case UninformativeKind::Unsure: return "unsure";
    }
    return "none";
}

LabelKind label_kind_from_string(const std::string& s) {
    if (s == "correct") return LabelKind::Correct;
    if (s == "wrong") return LabelKind::Wrong;
    if (s == "uninformative") return LabelKind::Uninformative;
    throw Error("unknown label kind: " + s);
}

UninformativeKind uninformative_kind_from_string(const std::string& s) {
    if (s == "repetition") return UninformativeKind::Repetition;
    if (s == "none") return UninformativeKind::NoneContent;
    if (s == "unsure") return UninformativeKind::Unsure;
    throw Error("unknown uninformative kind: " + s);
}

void validate_dataset(const Dataset& dataset) {
    std::unordered_set<std::string> ids;
    for (const QuestionRecord& q : dataset.records) {
        if (q.knowledge_class != dataset.knowledge_class) {
            throw Error("dataset " + dataset.name + ": record " + q.id +
                        " has mismatched knowledge class");
        }
        if (!ids.insert(q.id).second) {
            throw Error("dataset " + dataset.name + ": duplicate id " + q.id);
        }
        if (q.knowledge_class == KnowledgeClass::Unseen) {
            if (!q.gold_answers.empty()) {
                throw Error("unseen record " + q.id + " has gold answers");
            }
            if (!q.template_id) {
                throw Error("unseen record " + q.id + " lacks a template id");
            }
        } else {
            if (q.gold_answers.empty()) {
                throw Error("seen record " + q.id + " has no gold answer");
            }
            for (const std::string& g : q.gold_answers) {
                if (token_count(g) > 5) {
                    throw Error("seen record " + q.id +
                                " has a gold answer over 5 tokens: " + g);
                }
            }
        }
    }
}

json question_to_json(const QuestionRecord& q) {
    json j;
    j["id"] = q.id;
    j["text"] = q.text;
    j["gold_answers"] = q.gold_answers;
    j["knowledge_class"] = to_string(q.knowledge_class);
    j["answer_type"] = to_string(q.answer_type);
    j["source"] = to_string(q.source);
    if (q.template_id) {
        j["template_id"] = *q.template_id;
    } else {
        j["template_id"] = nullptr;
    }
    return j;
}

QuestionRecord question_from_json(const json& j) {
    QuestionRecord q;
    q.id = j.at("id").get<std::string>();
    q.text = j.at("text").get<std::string>();
    q.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
    q.knowledge_class =
        knowledge_class_from_string(j.at("knowledge_class").get<std::string>());
    q.answer_type = answer_type_from_string(j.at("answer_type").get<std::string>());
    q.source = source_kind_from_string(j.at("source").get<std::string>());
    if (j.contains("template_id") && !j.at("template_id").is_null()) {
        q.template_id = j.at("template_id").get<std::string>();
    }
    return q;
}

json response_to_json(const ResponseRecord& r) {
    json j;
    j["question_id"] = r.question_id;
    j["raw_text"] = r.raw_text;
    j["answer_text"] = r.answer_text;
    if (r.label) {
        j["label"] = to_string(r.label->kind);
        if (r.label->uninformative_kind) {
            j["uninformative_kind"] = to_string(*r.label->uninformative_kind);
        }
    }
    return j;
}

ResponseRecord response_from_json(const json& j) {
    ResponseRecord r;
    r.question_id = j.at("question_id").get<std::string>();
    r.raw_text = j.value("raw_text", std::string());
    r.answer_text = j.at("answer_text").get<std::string>();
    if (j.contains("label")) {
        Label label;
        label.kind = label_kind_from_string(j.at("label").get<std::string>());
        if (j.contains("uninformative_kind")) {
            label.uninformative_kind = uninformative_kind_from_string(
                j.at("uninformative_kind").get<std::string>());
        }
        r.label = label;
    }
    return r;
}

json consistency_to_json(const ConsistencyRecord& r) {
    json j;
    j["question_id"] = r.question_id;
    j["x_mcqs"] = r.x_mcqs;
    j["match_count"] = r.match_count;
    j["cons"] = r.cons;
    j["unprobed"] = r.unprobed;
    return j;
}

ConsistencyRecord consistency_from_json(const json& j) {
    ConsistencyRecord r;
    r.question_id = j.at("question_id").get<std::string>();
    r.x_mcqs = j.at("x_mcqs").get<int>();
    r.match_count = j.at("match_count").get<int>();
    r.cons = j.at("cons").get<double>();
    r.unprobed = j.value("unprobed", false);
    return r;
}

}  // namespace kbrel
