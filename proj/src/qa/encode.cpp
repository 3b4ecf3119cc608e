#include "pathex/qa/encode.hpp"

#include <algorithm>

#include "pathex/util/error.hpp"

namespace pathex::qa {

std::size_t window_capacity(const BpeTokenizer& tokenizer, std::size_t question_tokens,
                            std::size_t max_seq_len) {
  const std::size_t fixed = question_tokens + tokenizer.pair_special_count();
  return max_seq_len > fixed ? max_seq_len - fixed : 0;
}

std::vector<TokenizedWindow> encode(const BpeTokenizer& tokenizer, std::string_view question,
                                    std::string_view context, std::size_t max_seq_len,
                                    std::size_t stride) {
  const Encoding q = tokenizer.encode(question);
  const Encoding c = tokenizer.encode(context);
  if (c.size() == 0) throw Error(ErrorCode::kEmptyContext, "context has no tokens");

  const std::size_t capacity = window_capacity(tokenizer, q.size(), max_seq_len);
  if (capacity == 0) {
    throw Error(ErrorCode::kContextTooLong,
                "question of " + std::to_string(q.size()) + " tokens leaves no room in " +
                    std::to_string(max_seq_len) + "-token window");
  }
  if (stride == 0 || stride >= capacity) {
    throw Error(ErrorCode::kInvalidArgument, "stride " + std::to_string(stride) +
                                                 " must be in [1, " + std::to_string(capacity) +
                                                 ")");
  }

  std::vector<TokenizedWindow> windows;
  for (std::size_t start = 0;; start += stride) {
    const std::size_t end = std::min(start + capacity, c.size());
    TokenizedWindow w;
    w.window_index = static_cast<int>(windows.size());
    w.window_stride = static_cast<int>(stride);
    w.context_token_start = start;
    auto push_special = [&](TokenId id) {
      w.token_ids.push_back(id);
      w.char_offsets.push_back(kNoOffsets);
      w.context_mask.push_back(false);
    };
    push_special(tokenizer.cls_id());
    for (TokenId id : q.ids) push_special(id);
    push_special(tokenizer.sep_id());
    if (tokenizer.layout() == PairLayout::kRoberta) push_special(tokenizer.sep_id());
    for (std::size_t k = start; k < end; ++k) {
      w.token_ids.push_back(c.ids[k]);
      w.char_offsets.push_back(c.offsets[k]);
      w.context_mask.push_back(true);
    }
    push_special(tokenizer.sep_id());
    windows.push_back(std::move(w));
    if (end == c.size()) break;
  }
  return windows;
}

}  // namespace pathex::qa
