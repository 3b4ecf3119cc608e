#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pathex/qa/tokenizer.hpp"

namespace pathex::qa {

inline constexpr Offsets kNoOffsets{static_cast<std::size_t>(-1), static_cast<std::size_t>(-1)};

// One encoder input: question and a slice of the context in the tokenizer's
// pair layout. char_offsets are byte offsets into the full context, or
// kNoOffsets for question and special tokens.
struct TokenizedWindow {
  std::vector<TokenId> token_ids;
  std::vector<Offsets> char_offsets;
  std::vector<bool> context_mask;
  int window_index = 0;
  int window_stride = 0;
  // Index of the first context token of this window within the whole
  // context tokenization.
  std::size_t context_token_start = 0;

  std::size_t size() const { return token_ids.size(); }
};

// Number of context tokens a window can hold for a question of
// `question_tokens` tokens.
std::size_t window_capacity(const BpeTokenizer& tokenizer, std::size_t question_tokens,
                            std::size_t max_seq_len);

// Tokenizes (question, context) into overlapping windows that advance by
// `stride` context tokens until the context is covered. Errors:
// EMPTY_CONTEXT for a context with no tokens; CONTEXT_TOO_LONG when the
// question leaves no room for a context token; INVALID_ARGUMENT when stride
// is not in [1, capacity).
std::vector<TokenizedWindow> encode(const BpeTokenizer& tokenizer, std::string_view question,
                                    std::string_view context, std::size_t max_seq_len,
                                    std::size_t stride);

}  // namespace pathex::qa
