#include "kbrel/jsonl.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kbrel/errors.hpp"

namespace kbrel {

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<json> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        rows.push_back(json::parse(line));
    }
    return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
    std::ostringstream out;
    for (const json& row : rows) {
        out << row.dump() << '\n';
    }
    atomic_write(path, out.str());
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    static std::atomic<unsigned> counter{0};
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw CacheWriteFailed("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw CacheWriteFailed("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw CacheWriteFailed("rename to " + path.string() + " failed: " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Dataset load_dataset(const std::filesystem::path& path, const std::string& name) {
    Dataset d;
    d.name = name.empty() ? path.stem().string() : name;
    bool first = true;
    for (const json& row : read_jsonl(path)) {
        d.records.push_back(question_from_json(row));
        if (first) {
            d.knowledge_class = d.records.back().knowledge_class;
            first = false;
        }
    }
    validate_dataset(d);
    return d;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::vector<json> rows;
    rows.reserve(dataset.records.size());
    for (const QuestionRecord& q : dataset.records) {
        rows.push_back(question_to_json(q));
    }
    write_jsonl(path, rows);
}

}  // namespace kbrel
