#include "pathex/ingest/spell.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "pathex/util/error.hpp"
#include "pathex/util/text.hpp"

namespace pathex::ingest {

Lexicon::Lexicon(const std::vector<std::string>& words) {
  for (const auto& w : words) add(w);
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open lexicon " + path.string());
  Lexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    auto word = text::trim(line);
    if (word.empty() || word.front() == '#') continue;
    lex.add(word);
  }
  return lex;
}

void Lexicon::add(std::string_view word) {
  auto lower = text::to_lower(text::trim(word));
  if (lower.empty()) return;
  const std::size_t len = lower.size();
  if (!words_.insert(lower).second) return;
  if (by_length_.size() <= len) by_length_.resize(len + 1);
  by_length_[len].push_back(std::move(lower));
}

void Lexicon::add_tokens(std::string_view phrase) {
  std::string current;
  for (char c : phrase) {
    if (text::is_alpha(c)) {
      current.push_back(c);
    } else {
      add(current);
      current.clear();
    }
  }
  add(current);
}

bool Lexicon::contains(std::string_view lower_word) const {
  return words_.count(std::string(lower_word)) > 0;
}

const std::vector<std::string>& Lexicon::bucket(std::size_t length) const {
  static const std::vector<std::string> kEmpty;
  return length < by_length_.size() ? by_length_[length] : kEmpty;
}

std::size_t edit_distance(std::string_view a, std::string_view b, std::size_t limit) {
  const std::size_t n = a.size(), m = b.size();
  if ((n > m ? n - m : m - n) > limit) return limit + 1;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > limit) return limit + 1;
    std::swap(prev, cur);
  }
  return std::min(prev[m], limit + 1);
}

std::string correct_token(std::string_view token, const Lexicon& lexicon, int max_distance) {
  const std::string lower = text::to_lower(token);
  if (lexicon.contains(lower) || max_distance <= 0) return std::string(token);

  const auto limit = static_cast<std::size_t>(max_distance);
  std::size_t best = limit + 1;
  const std::string* best_word = nullptr;
  bool tie = false;
  const std::size_t lo = lower.size() > limit ? lower.size() - limit : 1;
  for (std::size_t len = lo; len <= lower.size() + limit; ++len) {
    for (const auto& cand : lexicon.bucket(len)) {
      const std::size_t d = edit_distance(lower, cand, std::min(best, limit));
      if (d < best) {
        best = d;
        best_word = &cand;
        tie = false;
      } else if (d == best && d <= limit && best_word && *best_word != cand) {
        tie = true;
      }
    }
  }
  if (!best_word || tie || best > limit) return std::string(token);

  std::string out = *best_word;
  const bool all_upper =
      token.size() > 1 && std::all_of(token.begin(), token.end(),
                                      [](char c) { return c >= 'A' && c <= 'Z'; });
  if (all_upper) {
    for (auto& c : out) c = text::to_upper(c);
  } else if (!token.empty() && token.front() >= 'A' && token.front() <= 'Z') {
    out.front() = text::to_upper(out.front());
  }
  return out;
}

std::string spell_correct(std::string_view input, const Lexicon& lexicon, int max_distance) {
  std::string out;
  out.reserve(input.size());
  std::size_t i = 0;
  while (i < input.size()) {
    if (text::is_space(input[i])) {
      out.push_back(input[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < input.size() && !text::is_space(input[j])) ++j;
    const std::string_view token = input.substr(i, j - i);
    std::size_t b = 0, e = token.size();
    while (b < e && text::is_punct(token[b])) ++b;
    while (e > b && text::is_punct(token[e - 1])) --e;
    const std::string_view core = token.substr(b, e - b);
    const bool alphabetic =
        !core.empty() && std::all_of(core.begin(), core.end(), text::is_alpha);
    if (alphabetic) {
      out += token.substr(0, b);
      out += correct_token(core, lexicon, max_distance);
      out += token.substr(e);
    } else {
      out += token;
    }
    i = j;
  }
  return out;
}

}  // namespace pathex::ingest
