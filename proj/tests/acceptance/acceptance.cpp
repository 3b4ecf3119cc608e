// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pathex/app/commands.hpp"
#include "pathex/corpus/split.hpp"
#include "pathex/ingest/io.hpp"
#include "pathex/ingest/layout.hpp"
#include "pathex/metrics/answer.hpp"
#include "pathex/metrics/bertscore.hpp"
#include "pathex/metrics/report.hpp"
#include "pathex/qa/backend.hpp"
#include "pathex/qa/decode.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/log.hpp"
#include "stub_service.hpp"
#include "support.hpp"

using namespace pathex;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

app::PipelineConfig test_config() {
  app::PipelineConfig c;
  c.jobs = 4;
  return c;
}

// Span decoder top-1 against exhaustive enumeration.
Outcome span_decoder() {
  Outcome o;
  std::mt19937_64 rng(500);
  std::normal_distribution<double> logit(0.0, 4.0);
  for (int trial = 0; trial < 500; ++trial) {
    // <s> question </s></s> context </s>
    const std::size_t n = 5 + rng() % 60;
    const std::size_t q = rng() % (n - 4);
    const std::size_t max_tokens = 1 + rng() % 10;
    qa::TokenizedWindow w;
    std::size_t ctx = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool in_ctx = k >= q + 3 && k + 1 < n;
      w.token_ids.push_back(static_cast<qa::TokenId>(k));
      w.context_mask.push_back(in_ctx);
      w.char_offsets.push_back(in_ctx ? qa::Offsets{2 * ctx, 2 * ctx + 1} : qa::kNoOffsets);
      if (in_ctx) ++ctx;
    }
    qa::SpanLogits l;
    for (std::size_t k = 0; k < n; ++k) {
      // Occasional exact ties exercise the ordering rule.
      l.start.push_back(rng() % 8 == 0 ? 1.0 : logit(rng));
      l.end.push_back(rng() % 8 == 0 ? 1.0 : logit(rng));
    }
    const std::string context(2 * ctx, 'x');
    const auto want = oracle::enumerate_spans(l.start, l.end, w.context_mask, max_tokens);
    const auto got = qa::decode_span(l, w, context, max_tokens, 1);
    const std::string where = "case " + std::to_string(trial);
    o.require(!got.empty() && !want.empty(), where + ": no candidate");
    if (!o.pass) return o;
    o.require(got[0].score == want[0].score, where + ": score differs");
    o.require(got[0].char_span.start == w.char_offsets[want[0].i].first &&
                  got[0].char_span.end == w.char_offsets[want[0].j].second,
              where + ": span differs");
  }
  o.detail = "500 cases";
  return o;
}

Outcome bertscore_oracle() {
  Outcome o;
  std::mt19937_64 rng(200);
  std::normal_distribution<double> g(0.0, 1.0);
  auto vectors = [&](std::size_t n, std::size_t dim) {
    std::vector<metrics::Vector> out(n, metrics::Vector(dim));
    for (auto& v : out) {
      for (auto& x : v) x = g(rng);
    }
    return out;
  };
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + rng() % 16;
    const auto p = vectors(1 + rng() % 8, dim);
    const auto r = vectors(1 + rng() % 8, dim);
    const auto got = metrics::bertscore(p, r);
    const auto want = oracle::bertscore(p, r);
    worst = std::max({worst, std::abs(got.precision - want.p), std::abs(got.recall - want.r),
                      std::abs(got.f1 - want.f)});
    o.require(metrics::bertscore(p, p).f1 == 1.0, "identical sequence F != 1");
  }
  o.require(worst <= 1e-9, "max difference " + std::to_string(worst));
  char buf[64];
  std::snprintf(buf, sizeof buf, "200 cases, max |diff| %.2e", worst);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome metric_hand_checks() {
  Outcome o;
  o.require(metrics::token_f1("prostate adenocarcinoma", {"prostate cancer"}) == 0.5, "F1 of partial overlap");
  o.require(metrics::exact_match("met prostatic adenocarcinoma", {"metastatic prostate cancer"}) == 0,
            "paraphrase EM");
  o.require(metrics::token_f1("met prostatic adenocarcinoma", {"metastatic prostate cancer"}) == 0.0,
            "paraphrase F1");

  // Pairs built to match after normalization about half the time.
  std::mt19937_64 rng(1000);
  const std::vector<std::string> words = {"prostate", "cancer", "Lung", "carcinoma", "the", "a", "B-cell", "of"};
  int matches = 0;
  for (int k = 0; k < 1000; ++k) {
    std::string p;
    for (std::size_t n = 1 + rng() % 5; n > 0; --n) p += words[rng() % words.size()] + " ";
    std::string gold;
    if (rng() % 2) {
      for (char c : p) gold += rng() % 2 ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
      gold = "The  " + gold + "!";
    } else {
      for (std::size_t n = 1 + rng() % 5; n > 0; --n) gold += words[rng() % words.size()] + " ";
    }
    if (metrics::exact_match(p, {gold}) == 1) {
      ++matches;
      o.require(metrics::token_f1(p, {gold}) == 1.0, "EM without F1 = 1 for '" + p + "'");
    }
    o.require(metrics::token_f1(p, {gold}) == oracle::token_f1(p, gold), "F1 differs from oracle");
  }
  o.require(matches > 300, "too few matching pairs generated");
  if (o.pass) o.detail = "1000 pairs, " + std::to_string(matches) + " exact";
  return o;
}

Outcome split_law() {
  Outcome o;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < 5000; ++i) ids.push_back("r" + std::to_string(i));
  std::vector<std::string> prefix;
  for (std::size_t n = 1; n <= 5000; ++n) {
    prefix.push_back(ids[n - 1]);
    const corpus::SplitSizes want{7 * n / 10, n / 10, n - 7 * n / 10 - n / 10};
    o.require(corpus::split_sizes(n, {}) == want, "sizes for n=" + std::to_string(n));
    o.require(corpus::count_splits(corpus::split_dataset(prefix, 42)) == want,
              "assignment counts for n=" + std::to_string(n));
    if (!o.pass) return o;
  }
  o.require(corpus::split_sizes(3634, {}) == corpus::SplitSizes{2543, 363, 728}, "n=3634");

  testing::TempDir dir;
  corpus::write_corpus(dir / "c.jsonl", fixtures::synthetic_records(3634));
  std::ostringstream out;
  app::cmd_split(test_config(), dir / "c.jsonl", dir / "a.jsonl", out);
  app::cmd_split(test_config(), dir / "c.jsonl", dir / "b.jsonl", out);
  o.require(read_text_file(dir / "a.jsonl") == read_text_file(dir / "b.jsonl"), "split files differ");
  o.require(out.str().rfind("train 2543, validation 363, test 728\n", 0) == 0, "command summary");
  if (o.pass) o.detail = "n = 1..5000";
  return o;
}

Outcome end_to_end() {
  Outcome o;
  testing::TempDir dir;
  const auto records = fixtures::synthetic_records(50);
  corpus::write_corpus(dir / "corpus.jsonl", records);
  std::vector<corpus::SplitAssignment> splits;
  for (const auto& r : records) splits.push_back({r.id, corpus::Split::kTest});
  corpus::write_splits(dir / "splits.jsonl", splits);
  qa::write_oracle_bundle(dir / "bundle", records, testing::data_path("tokenizer.json"), 64);

  const auto cfg = test_config();
  std::ostringstream out;
  const int rc = app::cmd_extract(cfg, dir / "corpus.jsonl", dir / "splits.jsonl", "test", dir / "bundle",
                                  dir / "pred.jsonl", out);
  o.require(rc == app::kExitOk, "extract exit " + std::to_string(rc));
  app::EvaluateRun run{dir / "pred.jsonl", dir / "corpus.jsonl", {}, true, dir / "clean", "oracle"};
  app::cmd_evaluate(cfg, run, out);
  const auto clean = metrics::read_report(dir / "clean.json");
  o.require(clean.n_examples == 100, "expected 100 predictions");
  o.require(clean.exact_match_pct == 100.0 && clean.macro_f1 == 1.0 && clean.f1_bert == 1.0,
            "clean run not 100 / 1 / 1");

  // Corrupt the predicted spans of 10 records (both questions each).
  auto preds = qa::read_predictions(dir / "pred.jsonl");
  std::set<std::string> hit;
  for (auto& p : preds) {
    if (hit.size() == 10 && !hit.count(p.record_id)) continue;
    hit.insert(p.record_id);
    p.text = "Margins are negative";
    p.span = corpus::CharSpan{0, 0};
  }
  qa::write_predictions(dir / "corrupt.jsonl", preds);
  run.predictions_file = dir / "corrupt.jsonl";
  run.report_prefix = dir / "corrupt";
  app::cmd_evaluate(cfg, run, out);
  const double by_record = metrics::read_report(dir / "corrupt.json").exact_match_pct;
  o.require(by_record == 80.0, "10 corrupted records gave " + std::to_string(by_record));

  // Corrupting 10 single predictions instead.
  preds = qa::read_predictions(dir / "pred.jsonl");
  for (std::size_t k = 0; k < 10; ++k) preds[2 * k].text = "Margins are negative";
  qa::write_predictions(dir / "single.jsonl", preds);
  run.predictions_file = dir / "single.jsonl";
  run.report_prefix = dir / "single";
  app::cmd_evaluate(cfg, run, out);
  const double by_prediction = metrics::read_report(dir / "single.json").exact_match_pct;
  o.require(by_prediction == 90.0, "10 corrupted predictions gave " + std::to_string(by_prediction));

  if (o.pass) {
    o.detail = "clean 100.0 / 1.0 / 1.0; 10 records corrupted -> 80.0; 10 single predictions -> 90.0";
  }
  return o;
}

Outcome layout_fixture() {
  Outcome o;
  testing::TempDir dir;
  fs::create_directories(dir / "in");
  fs::copy_file(testing::data_path("layout/three_pages.jsonl"), dir / "in" / "fx.jsonl");
  std::ostringstream out;
  app::cmd_ingest(test_config(), dir / "in", dir / "a.jsonl", out);
  app::cmd_ingest(test_config(), dir / "in", dir / "b.jsonl", out);
  const auto chunks = ingest::read_chunks(dir / "a.jsonl");
  const std::vector<std::string> expected = {
      "Clinical history: elevated PSA and an abnormal digital rectal exam.",
      "Final diagnosis: prostate adenocarcinoma, Gleason score 4+3=7.",
      "Core 1 shows tumor in 40% of the tissue sampled from the left apex.",
      "Core 2 is benign prostatic tissue.",
      "Comment: perineural invasion is present."};
  o.require(chunks.size() == expected.size(), std::to_string(chunks.size()) + " chunks");
  for (std::size_t i = 0; o.pass && i < chunks.size(); ++i) {
    o.require(chunks[i].text == expected[i], "chunk " + std::to_string(i) + " out of order");
    for (const char* boiler : {"ACME", "SURGICAL PATHOLOGY", "Page", "printed"}) {
      o.require(chunks[i].text.find(boiler) == std::string::npos, "chunk contains '" + std::string(boiler) + "'");
    }
  }
  o.require(read_text_file(dir / "a.jsonl") == read_text_file(dir / "b.jsonl"), "rerun differs");
  if (o.pass) o.detail = "3 pages, 5 chunks";
  return o;
}

Outcome genbench_stub() {
  Outcome o;
  testing::TempDir dir;
  const auto records = fixtures::synthetic_records(4);
  corpus::write_corpus(dir / "corpus.jsonl", records);
  std::vector<corpus::SplitAssignment> splits;
  for (const auto& r : records) splits.push_back({r.id, corpus::Split::kTest});
  corpus::write_splits(dir / "splits.jsonl", splits);

  // syn-001 answers twice with the broad type; syn-002 fails twice first.
  std::mutex mu;
  std::map<std::string, int> seen;
  stub::Service svc([&](int, const Json& req) {
    const auto prompt = req["prompt"].get<std::string>();
    for (const auto& r : records) {
      if (prompt.find(r.context) == std::string::npos) continue;
      int n;
      {
        std::lock_guard<std::mutex> lock(mu);
        n = seen[r.id]++;
      }
      if (r.id == "syn-002" && n < 2) return stub::Reply{503, "overloaded", std::chrono::milliseconds(0)};
      const std::string sub = r.id == "syn-001" ? r.broad_label : r.subtype_label;
      return stub::text_reply("Cancer type: " + r.broad_label + "\nSubtype: " + sub);
    }
    return stub::Reply{404, "", std::chrono::milliseconds(0)};
  });

  auto cfg = test_config();
  cfg.genbench.template_path = testing::repo_data("genbench_template.json");
  cfg.genbench.retry = {3, std::chrono::milliseconds(5), 2.0};
  cfg.genbench.timeout_ms = 5000;
  app::GenbenchRun run{dir / "corpus.jsonl", dir / "splits.jsonl", "test", svc.endpoint(), dir / "results.jsonl",
                       dir / "pred.jsonl"};
  std::ostringstream out;
  o.require(app::cmd_genbench(cfg, run, out) == app::kExitOk, "genbench reported failures");
  const auto results = genbench::read_results(dir / "results.jsonl");
  o.require(results.size() == 4, "result count");
  if (!o.pass) return o;
  o.require(results[1].duplicate_answer_flag, "duplicate not flagged");
  o.require(!results[0].duplicate_answer_flag && !results[2].duplicate_answer_flag, "spurious duplicate flag");
  o.require(!results[2].error && results[2].attempts == 3, "transient failure not recovered in 3 attempts");

  const auto preds = qa::read_predictions(dir / "pred.jsonl");
  o.require(preds == [&] {
    auto p = genbench::to_predictions(results, records);
    std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) {
      return std::tie(a.record_id, a.kind) < std::tie(b.record_id, b.kind);
    });
    return p;
  }(), "predictions file does not match parsed results");
  app::EvaluateRun eval{dir / "pred.jsonl", dir / "corpus.jsonl", {}, true, dir / "report", "stub"};
  app::cmd_evaluate(cfg, eval, out);
  const auto report = metrics::read_report(dir / "report.json");
  // 7 of 8 answers are right; the duplicate misses its subtype.
  o.require(report.n_examples == 8 && report.exact_match_pct == 87.5,
            "evaluate gave " + std::to_string(report.exact_match_pct));
  if (o.pass) o.detail = "duplicate flagged, 3 attempts, EM 87.5 over 8 answers";
  return o;
}

struct Criterion {
  const char* name;
  double limit_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  log::capture(true);
  const std::vector<Criterion> criteria = {
      {"span decoder matches exhaustive enumeration", 10.0, span_decoder},
      {"BERTScore matches brute force", 5.0, bertscore_oracle},
      {"metric hand checks", 0.0, metric_hand_checks},
      {"split law", 5.0, split_law},
      {"end-to-end synthetic run", 30.0, end_to_end},
      {"layout fixture", 0.0, layout_fixture},
      {"generation benchmark stub", 0.0, genbench_stub},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && c.limit_s > 0 && secs >= c.limit_s) {
      o.pass = false;
      o.detail = "over the time limit";
    }
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << " [" << timing
              << (c.limit_s > 0 ? " < " + std::to_string(static_cast<int>(c.limit_s)) + "s" : std::string()) << "] "
              << o.detail << "\n";
    if (!o.pass) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
