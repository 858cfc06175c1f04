#include "kbrel/prompting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "kbrel/errors.hpp"
#include "kbrel/jsonl.hpp"
#include "kbrel/prompts.hpp"
#include "kbrel/rng.hpp"

namespace kbrel {

std::string to_string(SettingKind kind) {
    switch (kind) {
        case SettingKind::ZeroShot: return "zero-shot";
        case SettingKind::FourShot: return "four-shot";
        case SettingKind::FourTwo: return "four-shot-2";
    }
    return "zero-shot";
}

SettingKind setting_kind_from_string(const std::string& s) {
    if (s == "zero-shot") return SettingKind::ZeroShot;
    if (s == "four-shot") return SettingKind::FourShot;
    if (s == "four-shot-2") return SettingKind::FourTwo;
    throw Error("unknown prompt setting: " + s);
}

void ShotRepository::validate() const {
    if (entries.empty()) throw Error("shot repository " + name + " is empty");
    const std::size_t dim = entries.front().embedding.size();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const ShotEntry& entry = entries[i];
        if (entry.embedding.size() != dim) {
            throw DimensionMismatch(name + "#" + std::to_string(i) +
                                    ": embedding dimension differs");
        }
        const bool all_zero = std::all_of(entry.embedding.begin(), entry.embedding.end(),
                                          [](double x) { return x == 0.0; });
        if (entry.embedding.empty() || all_zero) {
            throw Error(name + "#" + std::to_string(i) + ": zero embedding vector");
        }
    }
}

ShotRepository ShotRepository::load(const std::filesystem::path& path, std::string name) {
    ShotRepository repo;
    repo.name = std::move(name);
    for (const json& row : read_jsonl(path)) {
        ShotEntry entry;
        entry.question = row.at("question").get<std::string>();
        entry.answer = row.at("answer").get<std::string>();
        entry.embedding = row.at("embedding").get<std::vector<double>>();
        repo.entries.push_back(std::move(entry));
    }
    repo.validate();
    return repo;
}

void ShotRepository::save(const std::filesystem::path& path) const {
    std::vector<json> rows;
    rows.reserve(entries.size());
    for (const ShotEntry& entry : entries) {
        json row;
        row["question"] = entry.question;
        row["answer"] = entry.answer;
        row["embedding"] = entry.embedding;
        rows.push_back(std::move(row));
    }
    write_jsonl(path, rows);
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("cosine: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::size_t> retrieve_shots(const std::vector<double>& query,
                                        const ShotRepository& repo, std::size_t k) {
    if (k > repo.size()) {
        throw KTooLarge("k=" + std::to_string(k) + " exceeds repository " + repo.name +
                        " of size " + std::to_string(repo.size()));
    }
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(repo.size());
    for (std::size_t i = 0; i < repo.entries.size(); ++i) {
        scored.emplace_back(cosine_similarity(query, repo.entries[i].embedding), i);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
    return out;
}

namespace {
struct PickedShot {
    ShotPair pair;
    std::string provenance;
};

std::vector<PickedShot> pick_shots(const std::vector<double>& query,
                                   const ShotRepository& repo, std::size_t k,
                                   bool unsure_answers) {
    std::vector<PickedShot> picked;
    for (std::size_t idx : retrieve_shots(query, repo, k)) {
        const ShotEntry& entry = repo.entries[idx];
        PickedShot shot;
        shot.pair.question = entry.question;
        shot.pair.answer = unsure_answers ? "unsure" : entry.answer;
        shot.provenance = repo.name + "#" + std::to_string(idx);
        picked.push_back(std::move(shot));
    }
    return picked;
}
}  // namespace

PromptText build_prompt(const QuestionRecord& question, const PromptSetting& setting,
                        const ShotRepositories& repos, Embedder* embedder) {
    PromptText out;
    if (setting.kind == SettingKind::ZeroShot) {
        out.text = render_qa_prompt(question.text);
        return out;
    }

    if (embedder == nullptr) {
        throw EmbedderUnavailable("few-shot prompts need an embedder");
    }
    if (repos.r_seen == nullptr) {
        throw MissingRepository("few-shot prompts need R_seen");
    }
    const std::vector<double> query = embedder->embed(question.text);

    std::vector<PickedShot> shots;
    if (setting.kind == SettingKind::FourShot) {
        shots = pick_shots(query, *repos.r_seen, 4, false);
    } else {
        if (repos.r_unseen == nullptr) {
            throw MissingRepository("the four-shot-2 setting needs R_unseen");
        }
        shots = pick_shots(query, *repos.r_seen, 2, false);
        for (PickedShot& shot : pick_shots(query, *repos.r_unseen, 2, true)) {
            shots.push_back(std::move(shot));
        }
    }

    Rng rng(derive_seed(setting.seed, "shot-order", question.id));
    rng.shuffle(shots);

    std::vector<ShotPair> pairs;
    pairs.reserve(shots.size());
    for (const PickedShot& shot : shots) {
        pairs.push_back(shot.pair);
        out.shot_ids.push_back(shot.provenance);
    }
    out.text = render_qa_prompt(question.text, pairs);
    return out;
}

PromptText build_mcq_prompt(const MCQInstance& mcq, const std::string& question_text,
                            const PromptSetting&) {
    PromptText out;
    out.text = render_mcq_prompt(question_text, mcq.options);
    return out;
}

}  // namespace kbrel
