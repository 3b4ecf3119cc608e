#include <random>

#include "doctest.h"
#include "pathex/corpus/corpus.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/text.hpp"
#include "support.hpp"

using namespace pathex;
using namespace pathex::corpus;

namespace {

std::string norm(std::string_view s) { return text::to_lower(text::collapse_whitespace(s)); }

// Brute force: smallest start, then smallest end, whose slice normalizes to
// the normalized label. Slices must start and end on non-space bytes.
std::optional<CharSpan> localize_oracle(const std::string& context, const std::string& label) {
  const std::string needle = norm(label);
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (text::is_space(context[i])) continue;
    for (std::size_t j = i + 1; j <= context.size(); ++j) {
      if (text::is_space(context[j - 1])) continue;
      if (norm(context.substr(i, j - i)) == needle) return CharSpan{i, j};
    }
  }
  return std::nullopt;
}

ingest::Chunk chunk(std::string id, std::string text) {
  ingest::Chunk c;
  c.id = std::move(id);
  c.text = std::move(text);
  return c;
}

}  // namespace

TEST_CASE("labels are found case-insensitively across whitespace runs") {
  const std::string ctx = "Bone biopsy consistent with Metastatic  Prostate\tCancer involving bone.";
  const auto s = localize_label(ctx, "metastatic prostate cancer");
  REQUIRE(s);
  CHECK(ctx.substr(s->start, s->length()) == "Metastatic  Prostate\tCancer");
  CHECK_FALSE(localize_label("only met prostatic adenocarcinoma here", "metastatic prostate cancer"));
  const std::string twice = "sarcoma; recurrent sarcoma";
  CHECK(localize_label(twice, "Sarcoma") == CharSpan{0, 7});
  CHECK_FALSE(localize_label("abc", "   "));
}

TEST_CASE("localize_label agrees with a brute-force search") {
  std::mt19937_64 rng(99);
  const std::string alphabet = "abAB  \t";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string ctx, label;
    const auto n = rng() % 24;
    for (std::size_t k = 0; k < n; ++k) ctx.push_back(alphabet[rng() % alphabet.size()]);
    const auto m = 1 + rng() % 4;
    for (std::size_t k = 0; k < m; ++k) label.push_back(alphabet[rng() % alphabet.size()]);
    if (norm(label).empty()) continue;
    CAPTURE(ctx);
    CAPTURE(label);
    const auto got = localize_label(ctx, label);
    CHECK(got == localize_oracle(ctx, label));
    if (got) CHECK(norm(ctx.substr(got->start, got->length())) == norm(label));
  }
}

TEST_CASE("build_corpus localizes labels and flags paraphrases as manual") {
  const std::vector<ingest::Chunk> chunks = {
      chunk("d#0", "Sections show colon adenocarcinoma, consistent with colorectal cancer."),
      chunk("d#1", "Findings of met prostatic adenocarcinoma in bone."),
  };
  const std::vector<GoldEntry> gold = {
      {"d#0", "colorectal cancer", "colon adenocarcinoma", IcdOTriplet{"C18", "C18.9", "8140/3"}},
      {"d#1", "prostate cancer", "metastatic prostate cancer", std::nullopt},
  };
  auto records = build_corpus(chunks, gold);
  REQUIRE(records.size() == 2);
  CHECK(records[0].label_source == LabelSource::kExactMatch);
  CHECK(records[0].broad_span == localize_label(chunks[0].text, "colorectal cancer"));
  CHECK(records[0].icdo->morphology_code == "8140/3");
  CHECK(records[1].label_source == LabelSource::kManual);
  CHECK_FALSE(records[1].broad_span);
  CHECK_FALSE(records[1].subtype_span);

  // Manual spans come from the sidecar.
  apply_annotations(records, {{"d#1", QuestionKind::kSubtype, {12, 40}}});
  CHECK(records[1].subtype_span == CharSpan{12, 40});
  CHECK(records[1].gold_answers(QuestionKind::kSubtype) ==
        std::vector<std::string>{"metastatic prostate cancer", "met prostatic adenocarcinoma"});
  CHECK(records[0].gold_answers(QuestionKind::kBroad) == std::vector<std::string>{"colorectal cancer"});

  try {
    build_corpus({chunk("d#9", "x")}, gold);
    FAIL("expected MISSING_GOLD");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingGold);
  }
  CHECK_THROWS_AS(apply_annotations(records, {{"zz", QuestionKind::kBroad, {0, 1}}}), Error);
  CHECK_THROWS_AS(apply_annotations(records, {{"d#1", QuestionKind::kBroad, {5, 500}}}), Error);
}

TEST_CASE("record invariants") {
  CorpusRecord r;
  r.id = "x";
  r.context = "colon adenocarcinoma";
  r.broad_label = "colorectal cancer";
  r.subtype_label = "colon adenocarcinoma";
  r.label_source = LabelSource::kManual;
  validate_record(r);
  r.label_source = LabelSource::kExactMatch;
  CHECK_THROWS_AS(validate_record(r), Error);
  r.label_source = LabelSource::kManual;
  r.broad_span = CharSpan{3, 2};
  CHECK_THROWS_AS(validate_record(r), Error);
  r.broad_span.reset();
  r.context.clear();
  CHECK_THROWS_AS(validate_record(r), Error);
}

TEST_CASE("corpus, gold and annotation files round trip") {
  testing::TempDir dir;
  const auto records = build_corpus(
      {chunk("a#0", "café tumor: colon adenocarcinoma of colorectal cancer type")},
      {{"a#0", "colorectal cancer", "colon adenocarcinoma", IcdOTriplet{"C18", "C18.7", "8140/3"}}});
  write_corpus(dir / "c.jsonl", records);
  const auto back = read_corpus(dir / "c.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].context == records[0].context);
  CHECK(back[0].broad_span == records[0].broad_span);
  CHECK(back[0].subtype_span == records[0].subtype_span);
  CHECK(back[0].icdo == records[0].icdo);
  CHECK(back[0].label_source == LabelSource::kExactMatch);

  write_text_file(dir / "g.jsonl", R"({"chunk_id": "a#0", "broad_label": "b", "subtype_label": "s"})");
  const auto gold = read_gold(dir / "g.jsonl");
  REQUIRE(gold.size() == 1);
  CHECK_FALSE(gold[0].icdo);
  write_text_file(dir / "a.jsonl",
                  R"({"record_id": "a#0", "question_kind": "subtype", "char_start": 1, "char_end": 4})");
  const auto ann = read_annotations(dir / "a.jsonl");
  CHECK(ann[0].kind == QuestionKind::kSubtype);
  CHECK(ann[0].span == CharSpan{1, 4});
  write_text_file(dir / "bad.jsonl",
                  R"({"record_id": "a#0", "question_kind": "other", "char_start": 1, "char_end": 4})");
  CHECK_THROWS(read_annotations(dir / "bad.jsonl"));
}
