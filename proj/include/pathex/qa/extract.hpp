#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathex/corpus/corpus.hpp"
#include "pathex/qa/backend.hpp"
#include "pathex/qa/decode.hpp"
#include "pathex/qa/tokenizer.hpp"

namespace pathex::qa {

// The two fixed extraction questions.
std::string_view build_query(corpus::QuestionKind kind);

struct QaConfig {
  std::size_t max_seq_len = 384;
  std::size_t stride = 128;
  std::size_t max_answer_tokens = 30;
  std::size_t n_best = 20;
};

// Top-n candidates for one question over all windows of the context.
std::vector<AnswerCandidate> answer_question(std::string_view question, std::string_view context,
                                             EncoderBackend& backend,
                                             const BpeTokenizer& tokenizer,
                                             const QaConfig& config);

struct Extraction {
  AnswerCandidate broad;
  AnswerCandidate subtype;

  const AnswerCandidate& get(corpus::QuestionKind kind) const {
    return kind == corpus::QuestionKind::kBroad ? broad : subtype;
  }
};

// Answers both questions independently. Errors carry the record id.
Extraction extract(const corpus::CorpusRecord& record, EncoderBackend& backend,
                   const BpeTokenizer& tokenizer, const QaConfig& config);

// One line of a predictions file. `span` and `score` are absent for answers
// that did not come from span extraction (e.g. parsed generations).
struct Prediction {
  std::string record_id;
  corpus::QuestionKind kind = corpus::QuestionKind::kBroad;
  std::string text;
  std::optional<corpus::CharSpan> span;
  std::optional<double> score;

  bool operator==(const Prediction&) const = default;
};

Prediction to_prediction(const std::string& record_id, corpus::QuestionKind kind,
                         const AnswerCandidate& candidate);

// Sorted by (record_id, broad before subtype) on write.
void write_predictions(const std::filesystem::path& path, std::vector<Prediction> predictions);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

}  // namespace pathex::qa
