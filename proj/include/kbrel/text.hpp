#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kbrel {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Whitespace-delimited tokens.
std::vector<std::string> tokenize(std::string_view s);
std::size_t token_count(std::string_view s);

// Collapses runs of whitespace to single spaces (no leading/trailing space).
std::string collapse_whitespace(std::string_view s);

// Maps typographic single quotes (U+2018/U+2019) to ASCII apostrophes.
std::string canonicalize_apostrophes(std::string_view s);

// Answer normalization used by exact-match scoring and the uninformative
// detectors: lowercase, map curly apostrophes to "'", strip leading/trailing
// punctuation, collapse whitespace, drop leading articles (a / an / the).
std::string normalize_answer(std::string_view s);

bool starts_with_token(std::string_view s, std::string_view token);

}  // namespace kbrel
