#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pathex::metrics {

// Lower-case, drop ASCII punctuation, drop the articles a/an/the, split on
// whitespace.
std::vector<std::string> normalize_answer(std::string_view text);

// 1 if pred normalizes equal to any gold. INVALID_ARGUMENT for an empty gold
// set.
int exact_match(std::string_view pred, const std::vector<std::string>& golds);

// Token-overlap F1 against one gold. Both empty -> 1, exactly one empty -> 0.
double token_f1_single(const std::vector<std::string>& pred_tokens,
                       const std::vector<std::string>& gold_tokens);

// Max of token_f1_single over golds.
double token_f1(std::string_view pred, const std::vector<std::string>& golds);

}  // namespace pathex::metrics
