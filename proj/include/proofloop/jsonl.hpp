#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace proofloop::jsonl {

using json = nlohmann::json;

// One JSON object per line, UTF-8. Blank lines are skipped; a malformed line
// raises IoError with the line number.
std::vector<json> read_file(const std::filesystem::path& path);

// Truncate-and-write. Each record is dumped on one line.
void write_file(const std::filesystem::path& path, const std::vector<json>& records);

// Append records to an existing (or new) file.
void append_file(const std::filesystem::path& path, const std::vector<json>& records);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace proofloop::jsonl
