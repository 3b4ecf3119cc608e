#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pathex/ingest/spell.hpp"

namespace pathex::ingest {

// Axis-aligned box in fractional page coordinates; y grows downward.
struct BBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double height() const { return y1 - y0; }
  BBox united(const BBox& o) const;
};

struct WordBox {
  std::string text;
  int page = 1;
  BBox bbox;
  double confidence = 1.0;
};

struct Line {
  std::vector<WordBox> words;
  BBox bbox;
  int page = 1;

  std::string text() const;
};

enum class BlockKind { kBody, kHeader, kFooter };
const char* block_kind_name(BlockKind kind);

struct Block {
  std::vector<Line> lines;
  BBox bbox;
  int page = 1;
  BlockKind kind = BlockKind::kBody;

  std::string text() const;
};

struct Chunk {
  std::string id;
  std::string text;
  // (page, index of the block within its page's reading order)
  std::vector<std::pair<int, int>> source_blocks;
  int page_first = 1;
  int page_last = 1;
};

struct LayoutConfig {
  double overlap_ratio = 0.5;
  double gap_factor = 1.5;
  double top_band = 0.08;
  double bottom_band = 0.92;
  int max_edit_distance = 2;
};

// Throws MALFORMED_BOX naming `page` and `index` when the box breaks the
// WordBox invariants.
void validate_word(const WordBox& word, int page, std::size_t index);

// Words whose vertical intervals overlap by at least `overlap_ratio` of the
// shorter interval share a line (transitively). Lines come back sorted by
// (y0, x0); words inside a line by x0.
std::vector<Line> group_lines(const std::vector<WordBox>& words, double overlap_ratio = 0.5);

// Lines must be sorted by y0 and come from one page. A line continues an open
// block when it overlaps the block's last line horizontally and the vertical
// gap is at most gap_factor times the page's median line height. Blocks are
// returned in reading order: (y0, x0).
std::vector<Block> segment_blocks(const std::vector<Line>& lines, double gap_factor = 1.5);

// Normalized form used to detect recurring boilerplate: lower-case, collapsed
// whitespace, digit runs replaced by '#'.
std::string boilerplate_key(const std::string& text);

// Assigns header/footer kinds. A block is a header when its bbox lies inside
// the top band and its key recurs on at least min(2, page_count) distinct
// pages among top-band blocks; footers are symmetric.
std::vector<Block> classify_boilerplate(std::vector<Block> blocks, int page_count,
                                        const LayoutConfig& config = {});

// pages[i] holds the words of page i + 1. Chunk ids are "<doc_id>#<n>".
std::vector<Chunk> chunk_document(const std::vector<std::vector<WordBox>>& pages,
                                  const Lexicon& lexicon, const LayoutConfig& config = {},
                                  const std::string& doc_id = "doc");

}  // namespace pathex::ingest
