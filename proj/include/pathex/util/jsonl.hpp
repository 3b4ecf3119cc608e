#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace pathex {

using Json = nlohmann::ordered_json;

// Calls `fn(line_number, record)` for every non-blank line. Parse failures
// raise MALFORMED_RECORD naming the file and line; open failures IO_ERROR.
void read_jsonl(const std::filesystem::path& path,
                const std::function<void(std::size_t, const Json&)>& fn);

// Writes one compact JSON value per line, creating parent directories.
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// Typed field access that reports the field name on failure.
template <typename T>
T require_field(const Json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) {
    throw std::out_of_range(std::string("missing field '") + key + "'");
  }
  return it->template get<T>();
}

}  // namespace pathex
