#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pathex/corpus/corpus.hpp"

namespace pathex::corpus {

// SplitMix64 (Steele, Lea & Flood). The exact sequence is part of the split
// file contract, so this is spelled out rather than taken from <random>.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by rejection: draws below (2^64 - bound) % bound
  // are discarded, the rest reduced modulo bound.
  std::uint64_t bounded(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

enum class Split { kTrain, kValidation, kTest };
const char* split_name(Split split);
Split parse_split(std::string_view name);

struct SplitAssignment {
  std::string record_id;
  Split split = Split::kTrain;

  bool operator==(const SplitAssignment&) const = default;
};

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

struct SplitSizes {
  std::size_t train = 0, validation = 0, test = 0;
  bool operator==(const SplitSizes&) const = default;
};

// floor(train * n), floor(validation * n), remainder.
SplitSizes split_sizes(std::size_t n, const SplitRatios& ratios);

// In-place Fisher-Yates: for i = n-1 down to 1, swap(i, bounded(i + 1)).
void seeded_shuffle(std::vector<std::size_t>& order, std::uint64_t seed);

// Shuffles record indices with seeded_shuffle, then assigns the first
// sizes.train to train, the next sizes.validation to validation and the rest
// to test. Assignments are returned in input record order.
std::vector<SplitAssignment> split_dataset(const std::vector<std::string>& record_ids,
                                           std::uint64_t seed, const SplitRatios& ratios = {});
std::vector<SplitAssignment> split_dataset(const std::vector<CorpusRecord>& records,
                                           std::uint64_t seed, const SplitRatios& ratios = {});

SplitSizes count_splits(const std::vector<SplitAssignment>& assignments);

// Written sorted by record_id.
void write_splits(const std::filesystem::path& path, std::vector<SplitAssignment> assignments);
std::vector<SplitAssignment> read_splits(const std::filesystem::path& path);

}  // namespace pathex::corpus
