#pragma once

// Reference implementations used by the unit and acceptance suites. They are
// written directly from the definitions and share no code with the library.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

struct Span {
  double score;
  std::size_t i, j;
};

// Every (i, j) with i <= j, both context tokens, at most max_tokens long;
// best first, ties to smaller i then smaller j.
inline std::vector<Span> enumerate_spans(const std::vector<double>& start, const std::vector<double>& end,
                                         const std::vector<bool>& context, std::size_t max_tokens) {
  std::vector<Span> all;
  for (std::size_t i = 0; i < start.size(); ++i) {
    for (std::size_t j = i; j < end.size(); ++j) {
      if (context[i] && context[j] && j - i + 1 <= max_tokens) all.push_back({start[i] + end[j], i, j});
    }
  }
  std::sort(all.begin(), all.end(), [](const Span& a, const Span& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return all;
}

struct Prf {
  double p, r, f;
};

// Greedy BERTScore from the definition: every pairwise cosine, clamped to
// [0, 1], best partner per token, weighted means.
inline Prf bertscore(const std::vector<std::vector<double>>& pred, const std::vector<std::vector<double>>& ref,
                     const std::vector<double>* wp = nullptr, const std::vector<double>* wr = nullptr) {
  auto cos = [](const std::vector<double>& a, const std::vector<double>& b) {
    long double ab = 0, aa = 0, bb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      ab += static_cast<long double>(a[k]) * b[k];
      aa += static_cast<long double>(a[k]) * a[k];
      bb += static_cast<long double>(b[k]) * b[k];
    }
    if (aa == 0 || bb == 0) return 0.0L;
    const long double c = ab / std::sqrt(aa * bb);
    return c < 0 ? 0.0L : (c > 1 ? 1.0L : c);
  };
  auto side = [&](const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                  const std::vector<double>* w) {
    long double num = 0, den = 0;
    for (std::size_t x = 0; x < a.size(); ++x) {
      long double best = 0;
      for (const auto& v : b) best = std::max(best, cos(a[x], v));
      const long double wx = w ? (*w)[x] : 1.0L;
      num += wx * best;
      den += wx;
    }
    return static_cast<double>(num / den);
  };
  Prf s{side(pred, ref, wp), side(ref, pred, wr), 0.0};
  s.f = s.p + s.r > 0 ? 2 * s.p * s.r / (s.p + s.r) : 0.0;
  return s;
}

inline std::vector<std::string> squad_tokens(const std::string& s) {
  std::string t;
  for (unsigned char c : s) {
    if (std::ispunct(c)) continue;
    t.push_back(static_cast<char>(std::tolower(c)));
  }
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && cur != "a" && cur != "an" && cur != "the") out.push_back(cur);
    cur.clear();
  };
  for (char c : t) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

// Token F1 via sorted multiset intersection.
inline double token_f1(const std::string& pred, const std::string& gold) {
  auto p = squad_tokens(pred), g = squad_tokens(gold);
  if (p.empty() || g.empty()) return p.empty() && g.empty() ? 1.0 : 0.0;
  std::sort(p.begin(), p.end());
  std::sort(g.begin(), g.end());
  std::vector<std::string> common;
  std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(common));
  if (common.empty()) return 0.0;
  const double pr = static_cast<double>(common.size()) / p.size();
  const double rc = static_cast<double>(common.size()) / g.size();
  return 2 * pr * rc / (pr + rc);
}

}  // namespace oracle
