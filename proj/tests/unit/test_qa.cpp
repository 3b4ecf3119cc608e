#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "pathex/qa/backend.hpp"
#include "pathex/qa/bundle.hpp"
#include "pathex/qa/decode.hpp"
#include "pathex/qa/encode.hpp"
#include "pathex/qa/extract.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/kv.hpp"
#include "support.hpp"

using namespace pathex;
using namespace pathex::qa;
using corpus::CharSpan;
using corpus::QuestionKind;

namespace {

std::shared_ptr<const BpeTokenizer> tiny() {
  static const auto tok =
      std::make_shared<const BpeTokenizer>(BpeTokenizer::load(testing::data_path("tokenizer.json")));
  return tok;
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

// Window of n tokens: `specials` leading non-context tokens, then context
// tokens covering 3 bytes each of a synthetic context.
TokenizedWindow fake_window(std::size_t n, std::size_t specials) {
  TokenizedWindow w;
  for (std::size_t k = 0; k < n; ++k) {
    w.token_ids.push_back(static_cast<TokenId>(k));
    const bool ctx = k >= specials;
    w.context_mask.push_back(ctx);
    w.char_offsets.push_back(ctx ? Offsets{3 * (k - specials), 3 * (k - specials) + 2} : kNoOffsets);
  }
  return w;
}

class FixedBackend final : public EncoderBackend {
 public:
  explicit FixedBackend(std::function<SpanLogits(const TokenizedWindow&)> fn) : fn_(std::move(fn)) {}
  SpanLogits run(const TokenizedWindow& w) override { return fn_(w); }

 private:
  std::function<SpanLogits(const TokenizedWindow&)> fn_;
};

corpus::CorpusRecord record(std::string id, std::string context, std::string broad, std::string sub) {
  corpus::CorpusRecord r;
  r.id = std::move(id);
  r.context = std::move(context);
  r.broad_label = std::move(broad);
  r.subtype_label = std::move(sub);
  r.broad_span = corpus::localize_label(r.context, r.broad_label);
  r.subtype_span = corpus::localize_label(r.context, r.subtype_label);
  r.label_source = corpus::LabelSource::kExactMatch;
  return r;
}

}  // namespace

TEST_CASE("decode_span equals exhaustive enumeration") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> logit(0.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 63;
    const std::size_t specials = 1 + rng() % std::min<std::size_t>(n - 1, 8);
    const std::size_t max_tokens = 1 + rng() % 10;
    auto w = fake_window(n, specials);
    w.context_mask.back() = false;  // trailing separator
    if (n - 1 == specials) continue;
    SpanLogits l;
    for (std::size_t k = 0; k < n; ++k) {
      l.start.push_back(logit(rng));
      l.end.push_back(logit(rng));
    }
    const std::string context(3 * n, 'x');

    struct P {
      double s;
      std::size_t i, j;
    };
    std::vector<P> all;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        if (w.context_mask[i] && w.context_mask[j] && j - i + 1 <= max_tokens) {
          all.push_back({l.start[i] + l.end[j], i, j});
        }
      }
    }
    std::sort(all.begin(), all.end(), [](const P& a, const P& b) {
      if (a.s != b.s) return a.s > b.s;
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    const auto got = decode_span(l, w, context, max_tokens, 5);
    REQUIRE(got.size() == std::min<std::size_t>(5, all.size()));
    for (std::size_t k = 0; k < got.size(); ++k) {
      CHECK(got[k].score == all[k].s);
      CHECK(got[k].char_span.start == w.char_offsets[all[k].i].first);
      CHECK(got[k].char_span.end == w.char_offsets[all[k].j].second);
    }
  }
}

TEST_CASE("decode_span edge cases") {
  auto w = fake_window(4, 4);
  SpanLogits l{{0, 0, 0, 0}, {0, 0, 0, 0}};
  CHECK(code_of([&] { decode_span(l, w, "", 5, 1); }) == ErrorCode::kNoValidSpan);
  w = fake_window(4, 1);
  CHECK(code_of([&] { decode_span(l, w, std::string(12, 'x'), 0, 1); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { decode_span({{0}, {0}}, w, std::string(12, 'x'), 3, 1); }) ==
        ErrorCode::kInvalidArgument);
  // Ties resolve to the earliest start, then the earliest end.
  const auto top = decode_span(l, w, "abcdefghijkl", 3, 2);
  CHECK(top[0].char_span == CharSpan{0, 2});
  CHECK(top[1].char_span == CharSpan{0, 5});
  CHECK(top[0].text == "ab");
}

TEST_CASE("merge keeps the best score per span") {
  std::vector<AnswerCandidate> c = {{"a", {0, 1}, 1.0, 0}, {"a", {0, 1}, 3.0, 1}, {"b", {2, 4}, 2.0, 0},
                                    {"c", {5, 6}, 2.0, 1}};
  const auto m = merge_windows(c, 2);
  REQUIRE(m.size() == 2);
  CHECK(m[0].score == 3.0);
  CHECK(m[0].window_index == 1);
  CHECK(m[1].char_span == CharSpan{2, 4});
}

TEST_CASE("windows cover the context with the configured advance") {
  const std::string ctx =
      "Sections reveal prostate adenocarcinoma, Gleason score 4+3=7, involving both lobes. "
      "Margins are negative. Lymph nodes 0/12. Perineural invasion is present in several cores.";
  const auto c = tiny()->encode(ctx);
  const auto q = tiny()->encode("Which cancer is mentioned?");
  const std::size_t max_len = 48, stride = 5;
  const auto windows = encode(*tiny(), "Which cancer is mentioned?", ctx, max_len, stride);
  const std::size_t cap = window_capacity(*tiny(), q.size(), max_len);
  REQUIRE(windows.size() > 1);
  std::vector<int> covered(c.size(), 0);
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto& w = windows[k];
    CHECK(w.size() <= max_len);
    CHECK(w.context_token_start == k * stride);
    CHECK(w.token_ids.front() == tiny()->cls_id());
    CHECK(w.token_ids.back() == tiny()->sep_id());
    std::size_t in_ctx = 0;
    for (std::size_t t = 0; t < w.size(); ++t) {
      if (!w.context_mask[t]) {
        CHECK(w.char_offsets[t] == kNoOffsets);
        continue;
      }
      const std::size_t idx = w.context_token_start + in_ctx++;
      CHECK(w.token_ids[t] == c.ids[idx]);
      CHECK(w.char_offsets[t] == c.offsets[idx]);
      ++covered[idx];
    }
    CHECK(in_ctx <= cap);
  }
  for (int v : covered) CHECK(v >= 1);
  CHECK(windows.back().context_token_start + cap >= c.size());

  CHECK(code_of([&] { encode(*tiny(), "q", "", 64, 8); }) == ErrorCode::kEmptyContext);
  CHECK(code_of([&] { encode(*tiny(), std::string(200, 'q'), "ctx", 16, 1); }) == ErrorCode::kContextTooLong);
  CHECK(code_of([&] { encode(*tiny(), "q", ctx, 48, window_capacity(*tiny(), tiny()->encode("q").size(), 48)); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { encode(*tiny(), "q", ctx, 48, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("infer rejects unusable backend output") {
  const auto w = fake_window(4, 1);
  FixedBackend short_out([](const TokenizedWindow&) { return SpanLogits{{0}, {0}}; });
  CHECK(code_of([&] { infer(short_out, w); }) == ErrorCode::kBackendFailure);
  FixedBackend nan_out([](const TokenizedWindow&) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return SpanLogits{{0, nan, 0, 0}, {0, 0, 0, 0}};
  });
  CHECK(code_of([&] { infer(nan_out, w); }) == ErrorCode::kBackendFailure);
  FixedBackend throws([](const TokenizedWindow&) -> SpanLogits { throw std::runtime_error("device lost"); });
  CHECK(code_of([&] { infer(throws, w); }) == ErrorCode::kBackendFailure);
}

TEST_CASE("oracle backend answers gold spans across windows") {
  const auto r = record("d#3",
                        "Margins are negative. Lymph nodes 0/12 are negative. Ki-67 index is 15%. "
                        "Sections reveal colon adenocarcinoma consistent with colorectal cancer.",
                        "colorectal cancer", "colon adenocarcinoma");
  std::vector<OracleSpan> spans;
  for (auto kind : {QuestionKind::kBroad, QuestionKind::kSubtype}) {
    spans.push_back({std::string(build_query(kind)), r.context, *r.span(kind)});
  }
  OracleBackend oracle(tiny(), spans);
  for (std::size_t stride : {4, 9}) {
    QaConfig cfg;
    cfg.max_seq_len = 56;
    cfg.stride = stride;
    cfg.max_answer_tokens = 10;
    const auto ex = extract(r, oracle, *tiny(), cfg);
    CHECK(ex.broad.text == "colorectal cancer");
    CHECK(ex.subtype.text == "colon adenocarcinoma");
    CHECK(ex.broad.char_span == *r.broad_span);
    CHECK(ex.broad.score == doctest::Approx(20.0));
  }
  auto other = r;
  other.id = "d#4";
  other.context = "Unrelated text.";
  try {
    extract(other, oracle, *tiny(), QaConfig{});
    FAIL("expected BACKEND_FAILURE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBackendFailure);
    CHECK(e.detail().find("d#4") != std::string::npos);
  }
}

TEST_CASE("predictions files sort and round trip") {
  testing::TempDir dir;
  std::vector<Prediction> p = {{"b", QuestionKind::kSubtype, "y", CharSpan{1, 2}, 0.5},
                               {"b", QuestionKind::kBroad, "x", std::nullopt, std::nullopt},
                               {"a", QuestionKind::kSubtype, "z", CharSpan{0, 1}, -1.0}};
  write_predictions(dir / "p.jsonl", p);
  const auto back = read_predictions(dir / "p.jsonl");
  REQUIRE(back.size() == 3);
  CHECK(back[0] == p[2]);
  CHECK(back[1] == p[1]);
  CHECK(back[2] == p[0]);
}

TEST_CASE("bundles are verified before use") {
  testing::TempDir dir;
  const auto r = record("d#0", "Sections reveal colon adenocarcinoma of colorectal cancer.", "colorectal cancer",
                        "colon adenocarcinoma");
  const auto bundle = write_oracle_bundle(dir / "b", {r}, testing::data_path("tokenizer.json"), 64);
  CHECK(bundle.backend == "oracle");
  CHECK(bundle.kind == BundleKind::kQa);
  CHECK(bundle.max_seq_len == 64);
  auto backend = make_backend(bundle, tiny());
  QaConfig cfg;
  cfg.max_seq_len = 64;
  cfg.stride = 16;
  CHECK(extract(r, *backend, *tiny(), cfg).subtype.text == "colon adenocarcinoma");

  const auto manifest = read_text_file(dir / "b" / kManifestName);
  auto rewrite = [&](const std::string& from, const std::string& to) {
    auto m = manifest;
    m.replace(m.find(from), from.size(), to);
    write_text_file(dir / "b" / kManifestName, m);
  };
  rewrite("max_seq_len = 64", "max_seq_len = 8");
  CHECK(code_of([&] { load_bundle(dir / "b"); }) == ErrorCode::kBundleInvalid);
  rewrite("backend = oracle", "backend = tensorrt");
  CHECK(code_of([&] { load_bundle(dir / "b"); }) == ErrorCode::kBundleInvalid);
  rewrite("kind = qa", "kind = embedder");
  CHECK(code_of([&] { make_backend(load_bundle(dir / "b"), tiny()); }) == ErrorCode::kBundleInvalid);
  write_text_file(dir / "b" / kManifestName, manifest);
  load_bundle(dir / "b");

  // Any byte change in a referenced file breaks its recorded hash.
  auto tok = read_text_file(dir / "b" / "tokenizer.json");
  tok.back() = tok.back() == '\n' ? ' ' : '\n';
  write_text_file(dir / "b" / "tokenizer.json", tok);
  CHECK(code_of([&] { load_bundle(dir / "b"); }) == ErrorCode::kBundleInvalid);
  std::filesystem::remove(dir / "b" / "tokenizer.json");
  CHECK(code_of([&] { load_bundle(dir / "b"); }) == ErrorCode::kBundleInvalid);
  CHECK(code_of([&] { load_bundle(dir / "nowhere"); }) == ErrorCode::kBundleInvalid);
}

TEST_CASE("oracle span tables round trip") {
  testing::TempDir dir;
  const std::vector<OracleSpan> spans = {{"q?", "ctx one", {0, 3}}, {"q2", "two", {1, 2}}};
  write_oracle_spans(dir / "s.jsonl", spans);
  const auto back = read_oracle_spans(dir / "s.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[1].context == "two");
  CHECK(back[1].span == CharSpan{1, 2});
  CHECK(build_query(QuestionKind::kBroad) != build_query(QuestionKind::kSubtype));
}
