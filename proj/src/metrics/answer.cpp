#include "pathex/metrics/answer.hpp"

#include <algorithm>
#include <unordered_map>

#include "pathex/util/error.hpp"
#include "pathex/util/text.hpp"

namespace pathex::metrics {

std::vector<std::string> normalize_answer(std::string_view input) {
  std::string cleaned;
  cleaned.reserve(input.size());
  for (char c : input) {
    if (!text::is_punct(c)) cleaned.push_back(text::to_lower(c));
  }
  std::vector<std::string> tokens;
  for (auto& t : text::split_whitespace(cleaned)) {
    if (t == "a" || t == "an" || t == "the") continue;
    tokens.push_back(std::move(t));
  }
  return tokens;
}

namespace {

void require_golds(const std::vector<std::string>& golds) {
  if (golds.empty()) throw Error(ErrorCode::kInvalidArgument, "gold answer set is empty");
}

}  // namespace

int exact_match(std::string_view pred, const std::vector<std::string>& golds) {
  require_golds(golds);
  const auto p = normalize_answer(pred);
  return std::any_of(golds.begin(), golds.end(),
                     [&](const std::string& g) { return normalize_answer(g) == p; })
             ? 1
             : 0;
}

double token_f1_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return pred.empty() && gold.empty() ? 1.0 : 0.0;
  std::unordered_map<std::string, int> bag;
  for (const auto& t : gold) ++bag[t];
  std::size_t overlap = 0;
  for (const auto& t : pred) {
    auto it = bag.find(t);
    if (it != bag.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

double token_f1(std::string_view pred, const std::vector<std::string>& golds) {
  require_golds(golds);
  const auto p = normalize_answer(pred);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1_single(p, normalize_answer(g)));
  return best;
}

}  // namespace pathex::metrics
