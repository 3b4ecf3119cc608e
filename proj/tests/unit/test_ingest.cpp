#include <functional>

#include "doctest.h"
#include "pathex/ingest/io.hpp"
#include "pathex/ingest/layout.hpp"
#include "pathex/ingest/spell.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/text.hpp"
#include "support.hpp"

using namespace pathex;
using namespace pathex::ingest;

namespace {

WordBox word(std::string text, double x0, double y0, double x1, double y1, int page = 1) {
  WordBox w;
  w.text = std::move(text);
  w.page = page;
  w.bbox = {x0, y0, x1, y1};
  return w;
}

// One line of words starting at x, each 0.08 wide with 0.01 gaps.
std::vector<WordBox> line_of(const std::string& text, double x, double y, int page = 1) {
  std::vector<WordBox> out;
  for (const auto& t : pathex::text::split_whitespace(text)) {
    out.push_back(word(t, x, y, x + 0.08, y + 0.02, page));
    x += 0.09;
  }
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("word boxes are validated") {
  CHECK(code_of([] { validate_word(word("x", 0.5, 0.1, 0.4, 0.2), 1, 0); }) == ErrorCode::kMalformedBox);
  CHECK(code_of([] { validate_word(word("x", 0.1, 0.1, 1.2, 0.2), 1, 0); }) == ErrorCode::kMalformedBox);
  CHECK(code_of([] { validate_word(word("  ", 0.1, 0.1, 0.2, 0.2), 1, 0); }) == ErrorCode::kMalformedBox);
  auto w = word("x", 0.1, 0.1, 0.2, 0.2);
  w.confidence = 1.5;
  CHECK(code_of([&] { validate_word(w, 3, 7); }) == ErrorCode::kMalformedBox);
  validate_word(word("ok", 0.0, 0.0, 1.0, 1.0), 1, 0);
}

TEST_CASE("words with overlapping vertical extent share a line") {
  std::vector<WordBox> words = {word("world", 0.3, 0.101, 0.4, 0.121), word("hello", 0.1, 0.1, 0.2, 0.12),
                                word("below", 0.1, 0.2, 0.2, 0.22)};
  const auto lines = group_lines(words);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].text() == "hello world");
  CHECK(lines[1].text() == "below");
  // Barely touching boxes do not merge.
  const auto apart = group_lines({word("a", 0.1, 0.10, 0.2, 0.12), word("b", 0.3, 0.115, 0.4, 0.135)});
  CHECK(apart.size() == 2);
}

TEST_CASE("blocks split on large gaps") {
  // Line height 0.02; gaps 0.5h and 3h with gap_factor 1.5 give blocks of 2 and 1.
  std::vector<WordBox> words;
  for (auto& w : line_of("line one", 0.05, 0.10)) words.push_back(w);
  for (auto& w : line_of("line two", 0.05, 0.13)) words.push_back(w);
  for (auto& w : line_of("line three", 0.05, 0.21)) words.push_back(w);
  const auto blocks = segment_blocks(group_lines(words), 1.5);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].lines.size() == 2);
  CHECK(blocks[1].text() == "line three");
  CHECK(segment_blocks({}, 1.5).empty());
}

TEST_CASE("column lines at equal height order left before right") {
  // Lines already split per column (interleaved by y), as a column-aware
  // OCR engine would emit them.
  std::vector<Line> lines;
  for (double y : {0.10, 0.125}) {
    for (double x : {0.60, 0.05}) {
      Line l;
      l.words = line_of(x < 0.5 ? "left" : "right", x, y);
      l.bbox = l.words.front().bbox;
      lines.push_back(l);
    }
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line& a, const Line& b) { return a.bbox.y0 < b.bbox.y0; });
  const auto blocks = segment_blocks(lines, 1.5);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].text() == "left left");
  CHECK(blocks[1].text() == "right right");
}

TEST_CASE("boilerplate keys ignore case, spacing and digits") {
  CHECK(boilerplate_key("Page  12 of 3") == "page # of #");
  CHECK(boilerplate_key("PAGE 1 OF 3") == boilerplate_key("page 2 of 3"));
}

TEST_CASE("recurring top and bottom band blocks are boilerplate") {
  std::vector<Block> blocks;
  auto make = [](const std::string& t, int page, double y0, double y1) {
    Block b;
    b.page = page;
    b.bbox = {0.1, y0, 0.9, y1};
    Line l;
    l.words = {word(t, 0.1, y0, 0.9, y1, page)};
    l.bbox = b.bbox;
    b.lines = {l};
    return b;
  };
  blocks.push_back(make("Report 1", 1, 0.02, 0.05));
  blocks.push_back(make("body one", 1, 0.30, 0.35));
  blocks.push_back(make("page 1", 1, 0.95, 0.97));
  blocks.push_back(make("Report 2", 2, 0.02, 0.05));
  blocks.push_back(make("body two", 2, 0.30, 0.35));
  blocks.push_back(make("page 2", 2, 0.95, 0.97));
  blocks.push_back(make("only once", 2, 0.01, 0.04));
  const auto out = classify_boilerplate(blocks, 2);
  CHECK(out[0].kind == BlockKind::kHeader);
  CHECK(out[1].kind == BlockKind::kBody);
  CHECK(out[2].kind == BlockKind::kFooter);
  CHECK(out[3].kind == BlockKind::kHeader);
  CHECK(out[5].kind == BlockKind::kFooter);
  CHECK(out[6].kind == BlockKind::kBody);
  // A block sticking out of the band is never boilerplate.
  blocks[0].bbox.y1 = 0.2;
  CHECK(classify_boilerplate(blocks, 2)[0].kind == BlockKind::kBody);
  // Recurring text in the middle of the page stays body.
  CHECK(classify_boilerplate({make("same", 1, 0.5, 0.52), make("same", 2, 0.5, 0.52)}, 2)[0].kind ==
        BlockKind::kBody);
  // Single page: the band alone decides.
  const auto single = classify_boilerplate({make("footnote", 1, 0.97, 0.99)}, 1);
  CHECK(single[0].kind == BlockKind::kFooter);
}

TEST_CASE("one body block of two lines becomes one space-joined chunk") {
  std::vector<std::vector<WordBox>> pages(1);
  for (auto& w : line_of("tumor is", 0.1, 0.40)) pages[0].push_back(w);
  for (auto& w : line_of("present here", 0.1, 0.425)) pages[0].push_back(w);
  const auto chunks = chunk_document(pages, Lexicon{});
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].text == "tumor is present here");
  CHECK(chunk_document({}, Lexicon{}).empty());
}

TEST_CASE("three page fixture chunks in reading order without boilerplate") {
  const auto pages = read_word_boxes(testing::data_path("layout/three_pages.jsonl"));
  REQUIRE(pages.size() == 3);
  const auto chunks = chunk_document(pages, Lexicon{}, LayoutConfig{}, "fx");
  std::vector<std::string> texts;
  for (const auto& c : chunks) texts.push_back(c.text);
  CHECK(texts == std::vector<std::string>{
                     "Clinical history: elevated PSA and an abnormal digital rectal exam.",
                     "Final diagnosis: prostate adenocarcinoma, Gleason score 4+3=7.",
                     "Core 1 shows tumor in 40% of the tissue sampled from the left apex.",
                     "Core 2 is benign prostatic tissue.",
                     "Comment: perineural invasion is present."});
  CHECK(chunks[0].id == "fx#0");
  CHECK(chunks[4].id == "fx#4");
  CHECK(chunks[2].page_first == 2);
  CHECK(chunks[4].source_blocks == std::vector<std::pair<int, int>>{{3, 1}});
}

TEST_CASE("edit distance and single token correction") {
  CHECK(edit_distance("kitten", "sitting", 5) == 3);
  CHECK(edit_distance("kitten", "sitting", 2) == 3);
  CHECK(edit_distance("", "abc", 3) == 3);
  const Lexicon lex({"carcinoma", "margins", "negative", "cat", "car"});
  CHECK(correct_token("carcinorna", lex, 2) == "carcinoma");
  CHECK(correct_token("Marglns", lex, 2) == "Margins");
  CHECK(correct_token("NEGATLVE", lex, 2) == "NEGATIVE");
  // "cay" is one edit from both "cat" and "car": left alone.
  CHECK(correct_token("cay", lex, 2) == "cay");
  CHECK(correct_token("zzzzzz", lex, 2) == "zzzzzz");
  CHECK(correct_token("carcinorna", lex, 0) == "carcinorna");
}

TEST_CASE("text correction keeps punctuation, numbers and spacing") {
  Lexicon lex({"margins", "are", "negative"});
  lex.add_tokens("colon adenocarcinoma");
  CHECK(lex.contains("adenocarcinoma"));
  CHECK(spell_correct("(Marglns are negatlve.) 4+3=7  pT2N0", lex) ==
        "(Margins are negative.) 4+3=7  pT2N0");
  CHECK(spell_correct("adenocarclnoma", lex) == "adenocarcinoma");
}

TEST_CASE("lexicon file loading") {
  testing::TempDir dir;
  write_text_file(dir / "lex.txt", "# words\nAlpha\n\n beta \n");
  const auto lex = Lexicon::load(dir / "lex.txt");
  CHECK(lex.size() == 2);
  CHECK(lex.contains("alpha"));
  CHECK(lex.contains("beta"));
  CHECK_THROWS_AS(Lexicon::load(dir / "none.txt"), Error);
}

TEST_CASE("word box files and chunk files") {
  testing::TempDir dir;
  write_text_file(dir / "doc.jsonl",
                  R"({"text": "b", "page": 2, "x0": 0.1, "y0": 0.1, "x1": 0.2, "y1": 0.12})"
                  "\n"
                  R"({"text": "a", "page": 1, "x0": 0.1, "y0": 0.1, "x1": 0.2, "y1": 0.12, "confidence": 0.5})"
                  "\n");
  const auto pages = read_word_boxes(dir / "doc.jsonl");
  REQUIRE(pages.size() == 2);
  CHECK(pages[0][0].text == "a");
  CHECK(pages[0][0].confidence == 0.5);
  CHECK(pages[1][0].confidence == 1.0);

  write_text_file(dir / "bad.jsonl", R"({"text": "b", "page": 0, "x0": 0.1, "y0": 0.1, "x1": 0.2, "y1": 0.12})");
  CHECK(code_of([&] { read_word_boxes(dir / "bad.jsonl"); }) == ErrorCode::kMalformedBox);

  Chunk c;
  c.id = "d#0";
  c.text = "some text";
  c.page_first = 1;
  c.page_last = 2;
  write_chunks(dir / "chunks.jsonl", {c});
  const auto back = read_chunks(dir / "chunks.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].id == "d#0");
  CHECK(back[0].text == "some text");
  CHECK(back[0].page_last == 2);
}

TEST_CASE("malformed boxes inside a document name the page and word") {
  std::vector<std::vector<WordBox>> pages(1);
  pages[0] = {word("ok", 0.1, 0.1, 0.2, 0.12), word("bad", 0.3, 0.2, 0.2, 0.22)};
  try {
    chunk_document(pages, Lexicon{});
    FAIL("expected MALFORMED_BOX");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedBox);
    CHECK(e.detail().find("page 1 word 1") != std::string::npos);
  }
}
