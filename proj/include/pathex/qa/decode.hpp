#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pathex/corpus/corpus.hpp"
#include "pathex/qa/encode.hpp"

namespace pathex::qa {

struct SpanLogits {
  std::vector<double> start;
  std::vector<double> end;
};

struct AnswerCandidate {
  std::string text;
  corpus::CharSpan char_span;
  double score = 0.0;
  int window_index = 0;
};

// Candidate order: score descending, then char_span ascending.
bool candidate_before(const AnswerCandidate& a, const AnswerCandidate& b);

// Best token spans (i, j) with both ends in the context, i <= j <
// i + max_answer_tokens, scored start[i] + end[j]. Returns up to n_best,
// ordered by score descending, then i, then j. Text is read from `context`
// through the window's char_offsets. NO_VALID_SPAN if the window has no
// context token.
std::vector<AnswerCandidate> decode_span(const SpanLogits& logits, const TokenizedWindow& window,
                                         std::string_view context, std::size_t max_answer_tokens,
                                         std::size_t n_best);

// Collapses candidates with identical char_span to the best-scoring one and
// returns the top n_best in candidate_before order.
std::vector<AnswerCandidate> merge_windows(const std::vector<AnswerCandidate>& candidates,
                                           std::size_t n_best);

}  // namespace pathex::qa
