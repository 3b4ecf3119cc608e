#pragma once

#include <filesystem>
#include <vector>

#include "pathex/ingest/layout.hpp"
#include "pathex/util/jsonl.hpp"

namespace pathex::ingest {

// Reads {text, page, x0, y0, x1, y1, confidence} records and groups them by
// page; the result has max(page) entries. Records with page < 1 raise
// MALFORMED_BOX.
std::vector<std::vector<WordBox>> read_word_boxes(const std::filesystem::path& path);

Json chunk_to_json(const Chunk& chunk);
Chunk chunk_from_json(const Json& record);

std::vector<Chunk> read_chunks(const std::filesystem::path& path);
void write_chunks(const std::filesystem::path& path, const std::vector<Chunk>& chunks);

}  // namespace pathex::ingest
