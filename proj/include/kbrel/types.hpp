#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace kbrel {

using json = nlohmann::ordered_json;

enum class KnowledgeClass { Seen, Unseen };
enum class AnswerType { Number, Person, Time, Location, Others };
enum class SourceKind { NaturalQuestions, TriviaQA, PopQA, Template };

std::string to_string(KnowledgeClass v);
std::string to_string(AnswerType v);
std::string to_string(SourceKind v);
KnowledgeClass knowledge_class_from_string(const std::string& s);
AnswerType answer_type_from_string(const std::string& s);
SourceKind source_kind_from_string(const std::string& s);

// One factoid question. Unseen records carry no gold answers and remember
// the template they were instantiated from.
struct QuestionRecord {
    std::string id;
    std::string text;
    std::vector<std::string> gold_answers;
    KnowledgeClass knowledge_class = KnowledgeClass::Seen;
    AnswerType answer_type = AnswerType::Others;
    SourceKind source = SourceKind::Template;
    std::optional<std::string> template_id;
};

struct Dataset {
    std::string name;
    KnowledgeClass knowledge_class = KnowledgeClass::Seen;
    std::vector<QuestionRecord> records;

    std::size_t size() const { return records.size(); }
};

// Validates the dataset invariants (uniform knowledge class, unique ids,
// unseen records have a template and no gold answers, seen records have
// short gold answers). Throws Error on violation.
void validate_dataset(const Dataset& dataset);

enum class LabelKind { Correct, Wrong, Uninformative };
enum class UninformativeKind { Repetition, NoneContent, Unsure };

std::string to_string(LabelKind v);
std::string to_string(UninformativeKind v);
LabelKind label_kind_from_string(const std::string& s);
UninformativeKind uninformative_kind_from_string(const std::string& s);

struct Label {
    LabelKind kind = LabelKind::Wrong;
    std::optional<UninformativeKind> uninformative_kind;

    static Label correct() { return {LabelKind::Correct, std::nullopt}; }
    static Label wrong() { return {LabelKind::Wrong, std::nullopt}; }
    static Label uninformative(UninformativeKind k) {
        return {LabelKind::Uninformative, k};
    }

    bool operator==(const Label&) const = default;
};

struct ResponseRecord {
    std::string question_id;
    std::string raw_text;
    std::string answer_text;  // raw_text after completion truncation
    std::optional<Label> label;
};

// Per-dataset label counts. N_* refer to the seen dataset, L_* to unseen.
struct LabelSummary {
    std::int64_t n = 0;
    std::int64_t n_correct = 0;
    std::int64_t n_wrong = 0;
    std::int64_t n_uninformative = 0;
    std::int64_t l = 0;
    std::int64_t l_uninformative = 0;
    std::int64_t l_wrong = 0;
};

// One multiple-choice probe: the original response, three distractors and
// the literal "unsure" option, shuffled and labeled A-E by position.
struct MCQInstance {
    std::string question_id;
    std::vector<std::string> options;  // exactly 5
    int original_index = -1;           // position of the original response
    int unsure_index = -1;             // position of the "unsure" option
    std::vector<int> distractor_ids;   // pool indices of the 3 distractors
    int probe_index = 0;               // 1..X_MCQs

    static constexpr const char* kLabels = "ABCDE";
};

struct ConsistencyRecord {
    std::string question_id;
    int x_mcqs = 0;
    int match_count = 0;
    double cons = 0.0;
    bool unprobed = false;
};

// JSON (de)serialization; field layout matches the file formats described
// in the README.
json question_to_json(const QuestionRecord& q);
QuestionRecord question_from_json(const json& j);
json response_to_json(const ResponseRecord& r);
ResponseRecord response_from_json(const json& j);
json consistency_to_json(const ConsistencyRecord& r);
ConsistencyRecord consistency_from_json(const json& j);

}  // namespace kbrel
