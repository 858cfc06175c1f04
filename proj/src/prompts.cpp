#include "kbrel/prompts.hpp"

#include <sstream>

#include "kbrel/errors.hpp"
#include "kbrel/types.hpp"

namespace kbrel {

const std::string kQaInstruction =
    "INSTRUCTION: Please answer knowledge-related questions directly. "
    "Note: Please do not give anything other than the answer; "
    "Say \"unsure\" if you do not know.";

const std::string kMcqInstruction =
    "INSTRUCTION: Please answer knowledge-related multi-choice questions "
    "directly. Note: Please do not give anything other than the appropriate "
    "option (A, B, C, D or E); choose the option indicating \"unsure\" if "
    "you do not know.";

std::string render_qa_prompt(const std::string& question,
                             const std::vector<ShotPair>& shots) {
    std::ostringstream out;
    out << kQaInstruction << "\n\n";
    for (const ShotPair& shot : shots) {
        out << "QUESTION: " << shot.question << "\nANSWER: " << shot.answer << "\n\n";
    }
    out << "QUESTION: " << question << "\nANSWER:";
    return out.str();
}

std::string render_mcq_prompt(const std::string& question,
                              const std::vector<std::string>& options) {
    if (options.size() != 5) {
        throw WrongOptionCount("MCQ prompt needs exactly 5 options, got " +
                               std::to_string(options.size()));
    }
    std::ostringstream out;
    out << kMcqInstruction << "\n\n";
    out << "QUESTION: " << question << '\n';
    for (std::size_t i = 0; i < options.size(); ++i) {
        out << MCQInstance::kLabels[i] << ". " << options[i] << '\n';
    }
    out << "ANSWER:";
    return out.str();
}

std::string render_time_sensitivity_prompt(const std::vector<std::string>& questions) {
    std::ostringstream out;
    out << "INSTRUCTION: Please provide the index of questions whose answers "
           "change yearly. Just return the index without explanations.\n"
        << "\n"
        << "Here is the list of questions:\n"
        << "1. Who is the most paid player in EPL?\n"
        << "2. What is the capital of Louisiana?\n"
        << "3. Who won the Nobel Peace Prize in 2009?\n"
        << "4. What is the latest model of the iPhone currently available?\n"
        << "Index:\n"
        << "1, 4\n"
        << "\n"
        << "Here is the list of questions:\n";
    for (std::size_t i = 0; i < questions.size(); ++i) {
        out << (i + 1) << ". " << questions[i] << '\n';
    }
    out << "Index:";
    return out.str();
}

namespace {
std::string render_gold_list(const std::vector<std::string>& gold_answers) {
    std::string out = "[";
    for (std::size_t i = 0; i < gold_answers.size(); ++i) {
        if (i > 0) out += ", ";
        out += '"';
        for (char c : gold_answers[i]) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        out += '"';
    }
    out += "]";
    return out;
}
}  // namespace

std::string render_correctness_prompt(const std::string& question,
                                      const std::vector<std::string>& gold_answers,
                                      const std::string& prediction) {
    // Worked examples reproduced verbatim, including the capitalized
    // "Prediction:" in the third one.
    std::ostringstream out;
    out << "INSTRUCTION: You need to check whether the prediction of a "
           "question-answering system to a question is correct. You should "
           "make the judgment based on a list of ground truth answers "
           "provided to you. Your response should be \"yes\" if the "
           "prediction is correct or \"no\" if the prediction is wrong.\n"
        << "\n"
        << "Question: Who authored The Taming of the Shrew (published in 2002)?\n"
        << "Ground truth: [\"William Shakespeare\", \"Roma Gill\"]\n"
        << "prediction: W Shakespeare\n"
        << "Correctness: yes\n"
        << "\n"
        << "Question: What country is Maharashtra Metro Rail Corporation "
           "Limited located in?\n"
        << "Ground truth: [\"India\"]\n"
        << "prediction: Maharashtra\n"
        << "Correctness: no\n"
        << "\n"
        << "Question: Edward Tise (known for Full Metal Jacket (1987)) is in "
           "what department?\n"
        << "Ground truth: [\"sound department\"]\n"
        << "Prediction: 2nd Infantry Division, United States Army\n"
        << "Correctness: no\n"
        << "\n"
        << "Question: Which era did Michael Oakeshott belong to?\n"
        << "Ground truth: [\"20th-century philosophy\"]\n"
        << "prediction: 20th century.\n"
        << "Correctness: yes\n"
        << "\n"
        << "Question: " << question << '\n'
        << "Ground truth: " << render_gold_list(gold_answers) << '\n'
        << "prediction: " << prediction << '\n'
        << "Correctness:";
    return out.str();
}

std::string render_distractor_prompt(const std::string& question,
                                     const std::string& response) {
    std::ostringstream out;
    out << "INSTRUCTION: For the given question-answer pair, provide 20 "
           "different distractors that are similar yet distinct from the "
           "given answer. Note: Seperate the 20 distractors with a special "
           "token \"[SEP]\".\n"
        << "\n"
        << "Q: Who was the President of the United States in 2010?\n"
        << "A: Barack Obama\n"
        << "Distractors: George W. Bush [SEP] Bill Clinton [SEP] Ronald "
           "Reagan [SEP] Donald Trump [SEP] Jimmy Carter [SEP] George H.W. "
           "Bush [SEP] Richard Nixon [SEP] Gerald Ford [SEP] Lyndon B. "
           "Johnson [SEP] John F. Kennedy [SEP] Dwight D. Eisenhower [SEP] "
           "Harry S. Truman [SEP] Franklin D. Roosevelt [SEP] Herbert Hoover "
           "[SEP] Calvin Coolidge [SEP] Woodrow Wilson [SEP] William Howard "
           "Taft [SEP] Theodore Roosevelt [SEP] William McKinley [SEP] "
           "Grover Cleveland\n"
        << "\n"
        << "Q: What is the name of the first cloned sheep?\n"
        << "A: the first cloned sheep is dolly.\n"
        << "Distractors: the first cloned sheep is Polly [SEP] the first "
           "cloned sheep is Molly [SEP] the first cloned sheep is Holly "
           "[SEP] the first cloned sheep is Bella [SEP] the first cloned "
           "sheep is Daisy [SEP] the first cloned sheep is Lily [SEP] the "
           "first cloned sheep is Rosie [SEP] the first cloned sheep is "
           "Millie [SEP] the first cloned sheep is Ellie [SEP] the first "
           "cloned sheep is Sally [SEP] the first cloned sheep is Tilly "
           "[SEP] the first cloned sheep is Nelly [SEP] the first cloned "
           "sheep is Jolly [SEP] the first cloned sheep is Betty [SEP] the "
           "first cloned sheep is Annie [SEP] the first cloned sheep is "
           "Lucy [SEP] the first cloned sheep is Maggie [SEP] the first "
           "cloned sheep is Cindy [SEP] the first cloned sheep is Penny "
           "[SEP] the first cloned sheep is Ginny\n"
        << "\n"
        << "Q: " << question << '\n'
        << "A: " << response << '\n'
        << "Distractors:";
    return out.str();
}

}  // namespace kbrel
