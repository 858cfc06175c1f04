#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "kbrel/types.hpp"

namespace kbrel {

// Line-delimited JSON helpers. Blank lines are skipped on read.
std::vector<json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);

// Writes content to a temporary file in the same directory and renames it
// into place, so concurrent readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path, const std::string& name = "");
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace kbrel
