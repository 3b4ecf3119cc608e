#include "pathex/util/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "pathex/util/error.hpp"
#include "pathex/util/text.hpp"

namespace pathex {

void read_jsonl(const std::filesystem::path& path,
                const std::function<void(std::size_t, const Json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      fn(line_no, record);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::out_of_range& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::ostringstream out;
  for (const auto& r : records) out << r.dump() << '\n';
  write_text_file(path, out.str());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pathex
