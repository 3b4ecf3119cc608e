#include "doctest.h"
#include "pathex/qa/encode.hpp"
#include "pathex/qa/tokenizer.hpp"
#include "pathex/util/error.hpp"
#include "support.hpp"

using namespace pathex;
using namespace pathex::qa;

namespace {

const BpeTokenizer& tiny() {
  static const BpeTokenizer tok = BpeTokenizer::load(testing::data_path("tokenizer.json"));
  return tok;
}

}  // namespace

TEST_CASE("encodings match the reference tokenizer") {
  const auto parity = testing::load_json("tokenizer_parity.json");
  REQUIRE(parity["single"].size() >= 20);
  for (const auto& c : parity["single"]) {
    const auto text = c["text"].get<std::string>();
    CAPTURE(text);
    const auto enc = tiny().encode(text);
    CHECK(enc.ids == c["ids"].get<std::vector<TokenId>>());
    CHECK(enc.tokens == c["tokens"].get<std::vector<std::string>>());
    std::vector<Offsets> expected;
    for (const auto& o : c["offsets"]) expected.emplace_back(o[0].get<std::size_t>(), o[1].get<std::size_t>());
    CHECK(enc.offsets == expected);
  }
}

TEST_CASE("pair windows match the reference pair layout") {
  const auto parity = testing::load_json("tokenizer_parity.json");
  for (const auto& p : parity["pair"]) {
    const auto windows = encode(tiny(), p["question"].get<std::string>(),
                                p["context"].get<std::string>(), 256, 64);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].token_ids == p["ids"].get<std::vector<TokenId>>());
  }
}

TEST_CASE("decode inverts encode") {
  for (const std::string s : {"prostate adenocarcinoma", "café 🙂 μ-opioid", "  a\tb\n"}) {
    CHECK(tiny().decode(tiny().encode(s).ids) == s);
  }
}

TEST_CASE("offsets point at the text each token covers") {
  const std::string text = "Gleason score 4+3=7 in the prostate.";
  const auto enc = tiny().encode(text);
  for (std::size_t k = 0; k < enc.size(); ++k) {
    const auto [b, e] = enc.offsets[k];
    REQUIRE(b <= e);
    REQUIRE(e <= text.size());
    const auto surface = tiny().decode({enc.ids[k]});
    // Token surface minus the absorbed leading space equals the covered text.
    const auto trimmed = surface.front() == ' ' ? surface.substr(1) : surface;
    CHECK(text.substr(b, e - b) == trimmed);
  }
}

TEST_CASE("pretokenizer follows the byte-level split rules") {
  const std::string s = "it's  12abc!! x";
  std::vector<std::string> pieces;
  for (const auto& [b, e] : pretokenize(s)) pieces.push_back(s.substr(b, e - b));
  CHECK(pieces == std::vector<std::string>{"it", "'s", " ", " 12", "abc", "!!", " x"});
}

TEST_CASE("special tokens and layout come from the post-processor") {
  CHECK(tiny().layout() == PairLayout::kRoberta);
  CHECK(tiny().cls_id() == 0);
  CHECK(tiny().sep_id() == 2);
  CHECK(tiny().pair_special_count() == 4);
  CHECK(tiny().is_special(0));
  CHECK_FALSE(tiny().is_special(tiny().encode("prostate").ids.front()));
}

TEST_CASE("merges accept the pair-array form and ignore_merges") {
  const Json spec = Json::parse(R"({
    "model": {"type": "BPE", "vocab": {"<s>": 0, "</s>": 1, "a": 2, "b": 3, "ab": 4, "Ġ": 5},
              "merges": [["a", "b"]]},
    "pre_tokenizer": {"type": "ByteLevel", "add_prefix_space": false}
  })");
  const auto tok = BpeTokenizer::from_json(spec);
  CHECK(tok.encode("ab").ids == std::vector<TokenId>{4});
  CHECK(tok.encode("ba").ids == std::vector<TokenId>{3, 2});
  CHECK_THROWS_AS(tok.encode("c"), Error);
}

TEST_CASE("unusable tokenizer specs are rejected") {
  CHECK_THROWS_AS(BpeTokenizer::from_json(Json::parse(R"({"model": {"type": "WordPiece", "vocab": {}}})")),
                  Error);
  CHECK_THROWS_AS(BpeTokenizer::load(testing::data_path("no_such_tokenizer.json")), Error);
}
