#include "pathex/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"

namespace pathex::corpus {

std::uint64_t SplitMix64::bounded(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidArgument, "bounded(0)");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kUnknownSplit, "unknown split '" + std::string(name) + "'");
}

namespace {

std::size_t floor_share(double ratio, std::size_t n) {
  // The epsilon absorbs representation error in ratios such as 0.7 so that
  // exact products (0.7 * 30 = 21) are not floored one short.
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

}  // namespace

SplitSizes split_sizes(std::size_t n, const SplitRatios& r) {
  if (r.train < 0 || r.validation < 0 || r.test < 0 ||
      std::abs(r.train + r.validation + r.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split ratios must be non-negative and sum to 1");
  }
  SplitSizes s;
  s.train = std::min(n, floor_share(r.train, n));
  s.validation = std::min(n - s.train, floor_share(r.validation, n));
  s.test = n - s.train - s.validation;
  return s;
}

void seeded_shuffle(std::vector<std::size_t>& order, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(order[i - 1], order[j]);
  }
}

std::vector<SplitAssignment> split_dataset(const std::vector<std::string>& record_ids,
                                           std::uint64_t seed, const SplitRatios& ratios) {
  const std::size_t n = record_ids.size();
  const SplitSizes sizes = split_sizes(n, ratios);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  seeded_shuffle(order, seed);

  std::vector<SplitAssignment> out(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    const std::size_t idx = order[rank];
    Split s = Split::kTest;
    if (rank < sizes.train) {
      s = Split::kTrain;
    } else if (rank < sizes.train + sizes.validation) {
      s = Split::kValidation;
    }
    out[idx] = {record_ids[idx], s};
  }
  return out;
}

std::vector<SplitAssignment> split_dataset(const std::vector<CorpusRecord>& records,
                                           std::uint64_t seed, const SplitRatios& ratios) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.id);
  return split_dataset(ids, seed, ratios);
}

SplitSizes count_splits(const std::vector<SplitAssignment>& assignments) {
  SplitSizes s;
  for (const auto& a : assignments) {
    switch (a.split) {
      case Split::kTrain: ++s.train; break;
      case Split::kValidation: ++s.validation; break;
      case Split::kTest: ++s.test; break;
    }
  }
  return s;
}

void write_splits(const std::filesystem::path& path, std::vector<SplitAssignment> assignments) {
  std::sort(assignments.begin(), assignments.end(),
            [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
  std::vector<Json> records;
  records.reserve(assignments.size());
  for (const auto& a : assignments) {
    Json j;
    j["record_id"] = a.record_id;
    j["split"] = split_name(a.split);
    records.push_back(std::move(j));
  }
  write_jsonl(path, records);
}

std::vector<SplitAssignment> read_splits(const std::filesystem::path& path) {
  std::vector<SplitAssignment> out;
  read_jsonl(path, [&](std::size_t, const Json& r) {
    const auto name = require_field<std::string>(r, "split");
    if (name != "train" && name != "validation" && name != "test") {
      throw std::out_of_range("unknown split '" + name + "'");
    }
    out.push_back({require_field<std::string>(r, "record_id"), parse_split(name)});
  });
  return out;
}

}  // namespace pathex::corpus
