#include "pathex/ingest/layout.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "pathex/util/error.hpp"
#include "pathex/util/text.hpp"

namespace pathex::ingest {

BBox BBox::united(const BBox& o) const {
  return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
}

std::string Line::text() const {
  std::vector<std::string> parts;
  parts.reserve(words.size());
  for (const auto& w : words) parts.emplace_back(text::trim(w.text));
  return text::join(parts, " ");
}

std::string Block::text() const {
  std::vector<std::string> parts;
  parts.reserve(lines.size());
  for (const auto& l : lines) parts.push_back(l.text());
  return text::join(parts, " ");
}

const char* block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::kBody: return "body";
    case BlockKind::kHeader: return "header";
    case BlockKind::kFooter: return "footer";
  }
  return "body";
}

void validate_word(const WordBox& word, int page, std::size_t index) {
  const auto& b = word.bbox;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kMalformedBox,
                "page " + std::to_string(page) + " word " + std::to_string(index) + ": " + why);
  };
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(b.x0 < b.x1) || !(b.y0 < b.y1)) fail("degenerate bbox");
  if (!in_unit(b.x0) || !in_unit(b.x1) || !in_unit(b.y0) || !in_unit(b.y1)) {
    fail("bbox outside [0,1]");
  }
  if (text::trim(word.text).empty()) fail("empty text");
  if (!(word.confidence >= 0.0 && word.confidence <= 1.0)) fail("confidence outside [0,1]");
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

bool reading_order_less(const BBox& a, const BBox& b) {
  if (a.y0 != b.y0) return a.y0 < b.y0;
  return a.x0 < b.x0;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

std::vector<Line> group_lines(const std::vector<WordBox>& words, double overlap_ratio) {
  const std::size_t n = words.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = words[i].bbox;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b = words[j].bbox;
      const double overlap = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
      const double shorter = std::min(a.height(), b.height());
      if (overlap > 0.0 && overlap >= overlap_ratio * shorter) {
        parent[find_root(parent, i)] = find_root(parent, j);
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find_root(parent, i)].push_back(i);

  std::vector<Line> lines;
  lines.reserve(groups.size());
  for (auto& [root, members] : groups) {
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return words[a].bbox.x0 < words[b].bbox.x0;
    });
    Line line;
    line.page = words[members.front()].page;
    line.bbox = words[members.front()].bbox;
    for (std::size_t idx : members) {
      line.words.push_back(words[idx]);
      line.bbox = line.bbox.united(words[idx].bbox);
    }
    lines.push_back(std::move(line));
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line& a, const Line& b) { return reading_order_less(a.bbox, b.bbox); });
  return lines;
}

std::vector<Block> segment_blocks(const std::vector<Line>& input, double gap_factor) {
  if (input.empty()) return {};
  std::vector<Line> lines = input;
  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line& a, const Line& b) { return reading_order_less(a.bbox, b.bbox); });

  std::vector<double> heights;
  heights.reserve(lines.size());
  for (const auto& l : lines) heights.push_back(l.bbox.height());
  const double max_gap = gap_factor * median(heights);

  std::vector<Block> blocks;
  for (const auto& line : lines) {
    Block* target = nullptr;
    double target_gap = 0.0;
    for (auto& block : blocks) {
      const BBox& last = block.lines.back().bbox;
      const bool x_overlap = std::min(last.x1, line.bbox.x1) > std::max(last.x0, line.bbox.x0);
      const double gap = line.bbox.y0 - last.y1;
      if (!x_overlap || gap > max_gap) continue;
      if (!target || gap < target_gap) {
        target = &block;
        target_gap = gap;
      }
    }
    if (target) {
      target->lines.push_back(line);
      target->bbox = target->bbox.united(line.bbox);
    } else {
      Block block;
      block.page = line.page;
      block.bbox = line.bbox;
      block.lines.push_back(line);
      blocks.push_back(std::move(block));
    }
  }
  std::stable_sort(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) {
    return reading_order_less(a.bbox, b.bbox);
  });
  return blocks;
}

std::string boilerplate_key(const std::string& raw) {
  const std::string collapsed = text::to_lower(text::collapse_whitespace(raw));
  std::string out;
  out.reserve(collapsed.size());
  for (std::size_t i = 0; i < collapsed.size(); ++i) {
    if (text::is_digit(collapsed[i])) {
      if (out.empty() || out.back() != '#') out.push_back('#');
    } else {
      out.push_back(collapsed[i]);
    }
  }
  return out;
}

std::vector<Block> classify_boilerplate(std::vector<Block> blocks, int page_count,
                                        const LayoutConfig& config) {
  const int min_pages = std::min(2, std::max(page_count, 1));
  auto in_top = [&](const Block& b) { return b.bbox.y1 <= config.top_band; };
  auto in_bottom = [&](const Block& b) { return b.bbox.y0 >= config.bottom_band; };

  std::map<std::string, std::set<int>> top_pages, bottom_pages;
  std::vector<std::string> keys;
  keys.reserve(blocks.size());
  for (const auto& b : blocks) {
    keys.push_back(boilerplate_key(b.text()));
    if (in_top(b)) top_pages[keys.back()].insert(b.page);
    if (in_bottom(b)) bottom_pages[keys.back()].insert(b.page);
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto& b = blocks[i];
    b.kind = BlockKind::kBody;
    if (in_top(b) && static_cast<int>(top_pages[keys[i]].size()) >= min_pages) {
      b.kind = BlockKind::kHeader;
    } else if (in_bottom(b) && static_cast<int>(bottom_pages[keys[i]].size()) >= min_pages) {
      b.kind = BlockKind::kFooter;
    }
  }
  return blocks;
}

std::vector<Chunk> chunk_document(const std::vector<std::vector<WordBox>>& pages,
                                  const Lexicon& lexicon, const LayoutConfig& config,
                                  const std::string& doc_id) {
  std::vector<Block> all_blocks;
  std::vector<int> index_in_page;
  for (std::size_t p = 0; p < pages.size(); ++p) {
    const int page_no = static_cast<int>(p) + 1;
    std::vector<WordBox> words = pages[p];
    for (std::size_t w = 0; w < words.size(); ++w) {
      validate_word(words[w], page_no, w);
      words[w].page = page_no;
    }
    auto lines = group_lines(words, config.overlap_ratio);
    auto blocks = segment_blocks(lines, config.gap_factor);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      blocks[b].page = page_no;
      all_blocks.push_back(std::move(blocks[b]));
      index_in_page.push_back(static_cast<int>(b));
    }
  }
  all_blocks = classify_boilerplate(std::move(all_blocks), static_cast<int>(pages.size()), config);

  std::vector<Chunk> chunks;
  for (std::size_t i = 0; i < all_blocks.size(); ++i) {
    const auto& block = all_blocks[i];
    if (block.kind != BlockKind::kBody) continue;
    Chunk chunk;
    chunk.id = doc_id + "#" + std::to_string(chunks.size());
    const std::string normalized = text::collapse_whitespace(block.text());
    chunk.text = lexicon.empty() ? normalized
                                 : spell_correct(normalized, lexicon, config.max_edit_distance);
    chunk.source_blocks.emplace_back(block.page, index_in_page[i]);
    chunk.page_first = chunk.page_last = block.page;
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

}  // namespace pathex::ingest
