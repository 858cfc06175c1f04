#include "kbrel/text.hpp"

#include <cctype>

namespace kbrel {

namespace {
bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }
}  // namespace

// Hedge-phrase matching must not depend on the model's quote style.
std::string canonicalize_apostrophes(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
            static_cast<unsigned char>(s[i + 1]) == 0x80 &&
            (static_cast<unsigned char>(s[i + 2]) == 0x98 ||
             static_cast<unsigned char>(s[i + 2]) == 0x99)) {
            out.push_back('\'');
            i += 3;
        } else {
            out.push_back(s[i]);
            ++i;
        }
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) tokens.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return tokens;
}

std::size_t token_count(std::string_view s) { return tokenize(s).size(); }

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = true;  // swallow leading whitespace
    for (char c : s) {
        if (is_space(static_cast<unsigned char>(c))) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            out.push_back(c);
            in_space = false;
        }
    }
    return out;
}

std::string normalize_answer(std::string_view s) {
    std::string t = to_lower(canonicalize_apostrophes(s));
    std::size_t b = 0;
    std::size_t e = t.size();
    while (b < e && (is_space(static_cast<unsigned char>(t[b])) ||
                     is_punct(static_cast<unsigned char>(t[b]))))
        ++b;
    while (e > b && (is_space(static_cast<unsigned char>(t[e - 1])) ||
                     is_punct(static_cast<unsigned char>(t[e - 1]))))
        --e;
    std::string core = collapse_whitespace(t.substr(b, e - b));
    // Drop leading articles.
    for (;;) {
        if (core.rfind("a ", 0) == 0) {
            core.erase(0, 2);
        } else if (core.rfind("an ", 0) == 0) {
            core.erase(0, 3);
        } else if (core.rfind("the ", 0) == 0) {
            core.erase(0, 4);
        } else {
            break;
        }
    }
    return core;
}

bool starts_with_token(std::string_view s, std::string_view token) {
    const std::vector<std::string> tokens = tokenize(s);
    if (tokens.empty()) return false;
    std::string first = to_lower(tokens.front());
    // Tolerate trailing punctuation on the first word ("Why," / "why?").
    while (!first.empty() && is_punct(static_cast<unsigned char>(first.back()))) {
        first.pop_back();
    }
    return first == to_lower(token);
}

}  // namespace kbrel
