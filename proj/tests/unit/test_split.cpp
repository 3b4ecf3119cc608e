#include <set>

#include "doctest.h"
#include "pathex/corpus/split.hpp"
#include "pathex/util/error.hpp"
#include "support.hpp"

using namespace pathex;
using namespace pathex::corpus;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("r" + std::to_string(i));
  return out;
}

}  // namespace

TEST_CASE("splitmix64 reference sequence") {
  // Published first outputs for seed 1234567.
  SplitMix64 rng(1234567);
  CHECK(rng.next() == 6457827717110365317ULL);
  CHECK(rng.next() == 3203168211198807973ULL);
  CHECK(rng.next() == 9817491932198370423ULL);
}

TEST_CASE("seeded shuffle matches an independent implementation") {
  // Permutations computed with a separate Python implementation of the
  // same generator and Fisher-Yates loop.
  std::vector<std::size_t> a(10), b(10);
  std::iota(a.begin(), a.end(), std::size_t{0});
  std::iota(b.begin(), b.end(), std::size_t{0});
  seeded_shuffle(a, 42);
  seeded_shuffle(b, 0);
  CHECK(a == std::vector<std::size_t>{0, 9, 5, 8, 6, 4, 7, 2, 1, 3});
  CHECK(b == std::vector<std::size_t>{6, 3, 2, 9, 8, 1, 4, 7, 0, 5});
}

TEST_CASE("bounded draws stay in range") {
  SplitMix64 rng(5);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL, (1ULL << 63) + 1}) {
    for (int k = 0; k < 200; ++k) CHECK(rng.bounded(bound) < bound);
  }
}

TEST_CASE("sizes follow floor, floor, remainder") {
  CHECK(split_sizes(3634, {}) == SplitSizes{2543, 363, 728});
  CHECK(split_sizes(10, {}) == SplitSizes{7, 1, 2});
  CHECK(split_sizes(0, {}) == SplitSizes{0, 0, 0});
  for (std::size_t n = 1; n <= 10000; ++n) {
    const auto s = split_sizes(n, {});
    // Integer arithmetic: floor(7n/10), floor(n/10).
    REQUIRE(s.train == 7 * n / 10);
    REQUIRE(s.validation == n / 10);
    REQUIRE(s.test == n - 7 * n / 10 - n / 10);
  }
  CHECK_THROWS_AS(split_sizes(10, {0.5, 0.5, 0.5}), Error);
}

TEST_CASE("assignments partition the records") {
  const auto records = ids(503);
  const auto a = split_dataset(records, 11);
  REQUIRE(a.size() == records.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].record_id == records[i]);
    seen.insert(a[i].record_id);
  }
  CHECK(seen.size() == records.size());
  CHECK(count_splits(a) == split_sizes(503, {}));
  CHECK(split_dataset(records, 11) == a);
  CHECK(split_dataset(records, 12) != a);
}

TEST_CASE("split files are sorted and byte-identical for a seed") {
  testing::TempDir dir;
  auto records = ids(40);
  write_splits(dir / "a.jsonl", split_dataset(records, 3));
  write_splits(dir / "b.jsonl", split_dataset(records, 3));
  CHECK(read_text_file(dir / "a.jsonl") == read_text_file(dir / "b.jsonl"));
  const auto back = read_splits(dir / "a.jsonl");
  REQUIRE(back.size() == 40);
  for (std::size_t i = 1; i < back.size(); ++i) CHECK(back[i - 1].record_id < back[i].record_id);

  write_text_file(dir / "bad.jsonl", R"({"record_id": "x", "split": "holdout"})");
  // A bad value inside a file is a malformed line; UNKNOWN_SPLIT is for
  // split names given by the caller.
  try {
    read_splits(dir / "bad.jsonl");
    FAIL("expected MALFORMED_RECORD");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedRecord);
  }
  try {
    parse_split("holdout");
    FAIL("expected UNKNOWN_SPLIT");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownSplit);
  }
  CHECK(parse_split("validation") == Split::kValidation);
  CHECK(std::string(split_name(Split::kTest)) == "test");
}
