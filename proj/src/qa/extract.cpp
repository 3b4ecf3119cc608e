#include "pathex/qa/extract.hpp"

#include <algorithm>

#include "pathex/qa/encode.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"

namespace pathex::qa {

std::string_view build_query(corpus::QuestionKind kind) {
  return kind == corpus::QuestionKind::kBroad ? "Which cancer is mentioned?"
                                              : "What is the specific cancer type?";
}

std::vector<AnswerCandidate> answer_question(std::string_view question, std::string_view context,
                                             EncoderBackend& backend,
                                             const BpeTokenizer& tokenizer,
                                             const QaConfig& config) {
  const auto windows = encode(tokenizer, question, context, config.max_seq_len, config.stride);
  std::vector<AnswerCandidate> all;
  for (const auto& w : windows) {
    const SpanLogits logits = infer(backend, w);
    auto found = decode_span(logits, w, context, config.max_answer_tokens, config.n_best);
    all.insert(all.end(), std::make_move_iterator(found.begin()),
               std::make_move_iterator(found.end()));
  }
  return merge_windows(all, config.n_best);
}

Extraction extract(const corpus::CorpusRecord& record, EncoderBackend& backend,
                   const BpeTokenizer& tokenizer, const QaConfig& config) {
  try {
    Extraction out;
    for (auto kind : {corpus::QuestionKind::kBroad, corpus::QuestionKind::kSubtype}) {
      auto ranked = answer_question(build_query(kind), record.context, backend, tokenizer, config);
      (kind == corpus::QuestionKind::kBroad ? out.broad : out.subtype) = std::move(ranked.front());
    }
    return out;
  } catch (const Error& e) {
    throw e.with_context("record '" + record.id + "'");
  }
}

Prediction to_prediction(const std::string& record_id, corpus::QuestionKind kind,
                         const AnswerCandidate& c) {
  return {record_id, kind, c.text, c.char_span, c.score};
}

void write_predictions(const std::filesystem::path& path, std::vector<Prediction> predictions) {
  std::stable_sort(predictions.begin(), predictions.end(), [](const auto& a, const auto& b) {
    if (a.record_id != b.record_id) return a.record_id < b.record_id;
    return a.kind < b.kind;
  });
  std::vector<Json> records;
  records.reserve(predictions.size());
  for (const auto& p : predictions) {
    Json j;
    j["record_id"] = p.record_id;
    j["question_kind"] = corpus::question_kind_name(p.kind);
    j["text"] = p.text;
    j["char_start"] = p.span ? Json(p.span->start) : Json(nullptr);
    j["char_end"] = p.span ? Json(p.span->end) : Json(nullptr);
    j["score"] = p.score ? Json(*p.score) : Json(nullptr);
    records.push_back(std::move(j));
  }
  write_jsonl(path, records);
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  read_jsonl(path, [&](std::size_t, const Json& r) {
    Prediction p;
    p.record_id = require_field<std::string>(r, "record_id");
    p.kind = corpus::parse_question_kind(require_field<std::string>(r, "question_kind"));
    p.text = require_field<std::string>(r, "text");
    const auto s = r.find("char_start");
    const auto e = r.find("char_end");
    if (s != r.end() && e != r.end() && !s->is_null() && !e->is_null()) {
      p.span = corpus::CharSpan{s->get<std::size_t>(), e->get<std::size_t>()};
    }
    if (auto sc = r.find("score"); sc != r.end() && !sc->is_null()) p.score = sc->get<double>();
    out.push_back(std::move(p));
  });
  return out;
}

}  // namespace pathex::qa
