#include "pathex/ingest/io.hpp"

#include "pathex/util/error.hpp"

namespace pathex::ingest {

std::vector<std::vector<WordBox>> read_word_boxes(const std::filesystem::path& path) {
  std::vector<std::vector<WordBox>> pages;
  read_jsonl(path, [&](std::size_t line_no, const Json& r) {
    WordBox w;
    w.text = require_field<std::string>(r, "text");
    w.page = require_field<int>(r, "page");
    w.bbox = {require_field<double>(r, "x0"), require_field<double>(r, "y0"),
              require_field<double>(r, "x1"), require_field<double>(r, "y1")};
    w.confidence = r.value("confidence", 1.0);
    if (w.page < 1) {
      throw Error(ErrorCode::kMalformedBox,
                  path.string() + ":" + std::to_string(line_no) + ": page must be >= 1");
    }
    if (static_cast<std::size_t>(w.page) > pages.size()) pages.resize(w.page);
    pages[w.page - 1].push_back(std::move(w));
  });
  return pages;
}

Json chunk_to_json(const Chunk& chunk) {
  Json j;
  j["id"] = chunk.id;
  j["text"] = chunk.text;
  j["page_first"] = chunk.page_first;
  j["page_last"] = chunk.page_last;
  return j;
}

Chunk chunk_from_json(const Json& r) {
  Chunk c;
  c.id = require_field<std::string>(r, "id");
  c.text = require_field<std::string>(r, "text");
  c.page_first = r.value("page_first", 1);
  c.page_last = r.value("page_last", c.page_first);
  return c;
}

std::vector<Chunk> read_chunks(const std::filesystem::path& path) {
  std::vector<Chunk> chunks;
  read_jsonl(path, [&](std::size_t, const Json& r) { chunks.push_back(chunk_from_json(r)); });
  return chunks;
}

void write_chunks(const std::filesystem::path& path, const std::vector<Chunk>& chunks) {
  std::vector<Json> records;
  records.reserve(chunks.size());
  for (const auto& c : chunks) records.push_back(chunk_to_json(c));
  write_jsonl(path, records);
}

}  // namespace pathex::ingest
