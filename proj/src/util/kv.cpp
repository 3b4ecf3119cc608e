#include "pathex/util/kv.hpp"

#include <sstream>

#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"
#include "pathex/util/text.hpp"

namespace pathex {

std::map<std::string, std::string> parse_kv(const std::string& content, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::istringstream in(content);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::kConfigInvalid, where + ": bad section header");
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfigInvalid, where + ": expected 'key = value'");
    }
    std::string key(text::trim(line.substr(0, eq)));
    if (key.empty()) throw Error(ErrorCode::kConfigInvalid, where + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (!out.emplace(key, std::string(text::trim(line.substr(eq + 1)))).second) {
      throw Error(ErrorCode::kConfigInvalid, where + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

std::map<std::string, std::string> load_kv(const std::filesystem::path& path) {
  return parse_kv(read_text_file(path), path.string());
}

}  // namespace pathex
