#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace cohort {

// Calls fn(line_number, parsed) for every non-blank line of a JSON-lines
// file. Line numbers are 1-based. Throws IoError if the file cannot be read
// and ValidationError (naming the line) if a line is not valid JSON.
void for_each_jsonl(
    const std::filesystem::path& path,
    const std::function<void(std::size_t, const nlohmann::json&)>& fn);

// Whole-file helpers.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

// Parses a whole JSON file; errors name the path.
nlohmann::json read_json_file(const std::filesystem::path& path);

// Serializes with sorted keys and a trailing newline. Sorted keys plus
// nlohmann's shortest-round-trip number printing make the bytes reproducible,
// which run outputs rely on.
void write_json_file(const std::filesystem::path& path,
                     const nlohmann::json& value);
std::string to_json_string(const nlohmann::json& value, int indent = 2);

// One JSONL record: single line, no indentation, trailing newline appended by
// the caller's stream.
std::string to_jsonl_record(const nlohmann::json& value);

}  // namespace cohort
