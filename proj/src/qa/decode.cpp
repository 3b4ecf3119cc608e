#include "pathex/qa/decode.hpp"

#include <algorithm>
#include <map>

#include "pathex/util/error.hpp"

namespace pathex::qa {

bool candidate_before(const AnswerCandidate& a, const AnswerCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.char_span < b.char_span;
}

std::vector<AnswerCandidate> decode_span(const SpanLogits& logits, const TokenizedWindow& window,
                                         std::string_view context, std::size_t max_answer_tokens,
                                         std::size_t n_best) {
  if (max_answer_tokens < 1 || n_best < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_answer_tokens and n_best must be >= 1");
  }
  const std::size_t n = window.size();
  if (logits.start.size() != n || logits.end.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "logit length does not match window");
  }

  struct Pair {
    double score;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!window.context_mask[i]) continue;
    const std::size_t last = std::min(n, i + max_answer_tokens);
    for (std::size_t j = i; j < last; ++j) {
      if (!window.context_mask[j]) continue;
      pairs.push_back({logits.start[i] + logits.end[j], i, j});
    }
  }
  if (pairs.empty()) throw Error(ErrorCode::kNoValidSpan, "window has no context tokens");

  const std::size_t keep = std::min(n_best, pairs.size());
  std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(keep), pairs.end(),
                    [](const Pair& a, const Pair& b) {
                      if (a.score != b.score) return a.score > b.score;
                      if (a.i != b.i) return a.i < b.i;
                      return a.j < b.j;
                    });

  std::vector<AnswerCandidate> out;
  out.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) {
    const auto& p = pairs[k];
    const std::size_t begin = window.char_offsets[p.i].first;
    const std::size_t end = std::max(window.char_offsets[p.j].second, begin);
    if (end > context.size()) {
      throw Error(ErrorCode::kInvalidArgument, "token offsets exceed context length");
    }
    AnswerCandidate c;
    c.char_span = {begin, end};
    c.text = std::string(context.substr(begin, end - begin));
    c.score = p.score;
    c.window_index = window.window_index;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<AnswerCandidate> merge_windows(const std::vector<AnswerCandidate>& candidates,
                                           std::size_t n_best) {
  std::map<corpus::CharSpan, AnswerCandidate> best;
  for (const auto& c : candidates) {
    auto [it, inserted] = best.emplace(c.char_span, c);
    if (!inserted && c.score > it->second.score) it->second = c;
  }
  std::vector<AnswerCandidate> out;
  out.reserve(best.size());
  for (auto& [span, c] : best) out.push_back(std::move(c));
  std::sort(out.begin(), out.end(), candidate_before);
  if (out.size() > n_best) out.resize(n_best);
  return out;
}

}  // namespace pathex::qa
