#include <atomic>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"
#include "pathex/util/kv.hpp"
#include "pathex/util/log.hpp"
#include "pathex/util/parallel.hpp"
#include "pathex/util/sha256.hpp"
#include "pathex/util/text.hpp"
#include "support.hpp"

using namespace pathex;

TEST_CASE("whitespace and punctuation helpers") {
  CHECK(text::collapse_whitespace("  a \t b\n\nc  ") == "a b c");
  CHECK(text::collapse_whitespace("") == "");
  CHECK(text::trim("\t x y \n") == "x y");
  CHECK(text::trim_punct(" ...colon adenocarcinoma.) ") == "colon adenocarcinoma");
  CHECK(text::trim_punct("!!!") == "");
  CHECK(text::split_whitespace(" a  bb c ") == std::vector<std::string>{"a", "bb", "c"});
  CHECK(text::join({"a", "b"}, ", ") == "a, b");
  CHECK(text::to_lower("ÄbC") == "Äbc");
  CHECK(text::starts_with_icase("Cancer Type: x", "cancer type:"));
  CHECK_FALSE(text::starts_with_icase("Cancer", "cancer type:"));
}

TEST_CASE("utf8 boundaries") {
  const std::string s = "a\xC3\xA9\xF0\x9F\x99\x82";  // a, é, 🙂
  CHECK(text::utf8_floor(s, 2) == 1);
  CHECK(text::utf8_ceil(s, 2) == 3);
  CHECK(text::utf8_truncate(s, 5) == "a\xC3\xA9");
  CHECK(text::utf8_truncate(s, 100) == s);
  char32_t cp = 0;
  CHECK(text::utf8_decode(s, 3, cp) == 4);
  CHECK(cp == U'\U0001F642');
  CHECK(text::utf8_decode("\xFF", 0, cp) == 1);
  CHECK(cp == 0xFFFD);
}

TEST_CASE("jsonl round trip and malformed lines") {
  testing::TempDir dir;
  const auto path = dir / "sub/x.jsonl";
  write_jsonl(path, {Json{{"a", 1}}, Json{{"a", 2}}});
  std::vector<int> seen;
  read_jsonl(path, [&](std::size_t, const Json& r) { seen.push_back(r["a"].get<int>()); });
  CHECK(seen == std::vector<int>{1, 2});

  write_text_file(dir / "bad.jsonl", "{\"a\": 1}\n\n{oops\n");
  try {
    read_jsonl(dir / "bad.jsonl", [](std::size_t, const Json&) {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedRecord);
    CHECK(std::string(e.what()).find("bad.jsonl:3") != std::string::npos);
  }
  CHECK_THROWS_AS(read_jsonl(dir / "missing.jsonl", [](std::size_t, const Json&) {}), Error);
  CHECK_THROWS_AS(require_field<int>(Json{{"b", 1}}, "a"), std::out_of_range);
}

TEST_CASE("kv files") {
  const auto kv = parse_kv("top = 1\n# comment\n[qa]\nstride = 64\n; other\nname = a = b\n");
  CHECK(kv.at("top") == "1");
  CHECK(kv.at("qa.stride") == "64");
  CHECK(kv.at("qa.name") == "a = b");
  CHECK_THROWS_AS(parse_kv("a = 1\na = 2\n"), Error);
  CHECK_THROWS_AS(parse_kv("no equals\n"), Error);
  CHECK_THROWS_AS(parse_kv("[broken\n"), Error);
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  testing::TempDir dir;
  write_text_file(dir / "f", "abc");
  CHECK(sha256_file(dir / "f") == sha256_hex("abc"));
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  std::set<std::size_t> workers;
  std::mutex m;
  parallel_for(hits.size(), 8, [&](std::size_t w, std::size_t i) {
    ++hits[i];
    std::lock_guard lock(m);
    workers.insert(w);
  });
  for (const auto& h : hits) CHECK(h.load() == 1);
  for (auto w : workers) CHECK(w < 8);
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [](std::size_t, std::size_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  parallel_for(0, 4, [](std::size_t, std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("structured log lines") {
  log::capture(true);
  log::set_level(log::Level::kInfo);
  log::debug("hidden");
  log::warn("shown", {{"k", 3}});
  const auto out = log::captured();
  log::capture(false);
  CHECK(out.find("hidden") == std::string::npos);
  const auto line = Json::parse(out.substr(0, out.find('\n')));
  CHECK(line["level"] == "warn");
  CHECK(line["event"] == "shown");
  CHECK(line["k"] == 3);
  CHECK(log::parse_level("error") == log::Level::kError);
  CHECK_THROWS_AS(log::parse_level("loud"), Error);
}

TEST_CASE("error codes render as stable names") {
  const Error e(ErrorCode::kMalformedBox, "page 2");
  CHECK(std::string(e.what()) == "MALFORMED_BOX: page 2");
  CHECK(e.with_context("doc7").detail() == "doc7: page 2");
  CHECK(error_code_name(ErrorCode::kDanglingPrediction) == "DANGLING_PREDICTION");
  CHECK(error_code_name(ErrorCode::kConfigInvalid) == "CONFIG_INVALID");
}
