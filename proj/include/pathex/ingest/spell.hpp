#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace pathex::ingest {

// Lower-cased word list, bucketed by length for bounded candidate scans.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(const std::vector<std::string>& words);

  // One word per line; blank lines and '#' comments skipped.
  static Lexicon load(const std::filesystem::path& path);

  void add(std::string_view word);
  // Adds every alphabetic token of `phrase` (used for ontology names).
  void add_tokens(std::string_view phrase);

  bool contains(std::string_view lower_word) const;
  bool empty() const { return words_.empty(); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& bucket(std::size_t length) const;

 private:
  std::unordered_set<std::string> words_;
  std::vector<std::vector<std::string>> by_length_;
};

// Levenshtein distance; returns limit + 1 as soon as the distance is known to
// exceed `limit`.
std::size_t edit_distance(std::string_view a, std::string_view b, std::size_t limit);

// Corrects one alphabetic token: returns the unique lexicon word at minimum
// distance (<= max_distance), or the token unchanged on a tie / no candidate.
std::string correct_token(std::string_view token, const Lexicon& lexicon, int max_distance);

// Token-wise correction of whitespace-delimited text. Leading and trailing
// punctuation is peeled before the alphabetic check; tokens whose core is not
// purely alphabetic are left alone. The first character's case is kept.
std::string spell_correct(std::string_view text, const Lexicon& lexicon, int max_distance = 2);

}  // namespace pathex::ingest
