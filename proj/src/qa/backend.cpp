#include "pathex/qa/backend.hpp"

#include <algorithm>
#include <cmath>

#include "pathex/qa/extract.hpp"
#include "pathex/qa/graph_backend.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"

namespace pathex::qa {

SpanLogits infer(EncoderBackend& backend, const TokenizedWindow& window) {
  SpanLogits logits;
  try {
    logits = backend.run(window);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBackendFailure) throw;
    throw Error(ErrorCode::kBackendFailure, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kBackendFailure, e.what());
  }
  const std::size_t n = window.size();
  if (logits.start.size() != n || logits.end.size() != n) {
    throw Error(ErrorCode::kBackendFailure,
                "backend returned " + std::to_string(logits.start.size()) + "/" +
                    std::to_string(logits.end.size()) + " logits for " + std::to_string(n) +
                    " tokens");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(logits.start.begin(), logits.start.end(), finite) ||
      !std::all_of(logits.end.begin(), logits.end.end(), finite)) {
    throw Error(ErrorCode::kBackendFailure, "backend returned non-finite logits");
  }
  return logits;
}

OracleBackend::OracleBackend(std::shared_ptr<const BpeTokenizer> tokenizer,
                             std::vector<OracleSpan> spans, double peak)
    : tokenizer_(std::move(tokenizer)), peak_(peak) {
  for (auto& s : spans) {
    Entry e;
    e.question_ids = tokenizer_->encode(s.question).ids;
    e.context = tokenizer_->encode(s.context);
    const auto& offs = e.context.offsets;
    std::size_t first = offs.size(), last = offs.size();
    for (std::size_t k = 0; k < offs.size(); ++k) {
      const bool overlaps = offs[k].second > s.span.start && offs[k].first < s.span.end;
      if (!overlaps) continue;
      if (first == offs.size()) first = k;
      last = k;
    }
    if (first == offs.size()) {
      throw Error(ErrorCode::kBundleInvalid, "oracle span covers no context token");
    }
    e.start_token = first;
    e.end_token = last;
    entries_.push_back(std::move(e));
  }
}

SpanLogits OracleBackend::run(const TokenizedWindow& w) {
  std::vector<TokenId> question;
  std::vector<std::size_t> context_pos;
  bool in_question = true;
  for (std::size_t k = 1; k < w.size(); ++k) {
    if (w.context_mask[k]) {
      context_pos.push_back(k);
    } else if (in_question && w.token_ids[k] == tokenizer_->sep_id()) {
      in_question = false;
    } else if (in_question) {
      question.push_back(w.token_ids[k]);
    }
  }

  const std::size_t base = w.context_token_start;
  for (const auto& e : entries_) {
    if (e.question_ids != question) continue;
    if (base + context_pos.size() > e.context.size()) continue;
    bool match = true;
    for (std::size_t k = 0; k < context_pos.size() && match; ++k) {
      match = e.context.ids[base + k] == w.token_ids[context_pos[k]] &&
              e.context.offsets[base + k] == w.char_offsets[context_pos[k]];
    }
    if (!match) continue;

    SpanLogits out{std::vector<double>(w.size(), 0.0), std::vector<double>(w.size(), 0.0)};
    const bool inside = e.start_token >= base && e.end_token < base + context_pos.size();
    if (inside) {
      out.start[context_pos[e.start_token - base]] = peak_;
      out.end[context_pos[e.end_token - base]] = peak_;
    }
    return out;
  }
  throw Error(ErrorCode::kBackendFailure, "oracle has no entry for this window");
}

std::vector<OracleSpan> read_oracle_spans(const std::filesystem::path& path) {
  std::vector<OracleSpan> out;
  read_jsonl(path, [&](std::size_t, const Json& r) {
    out.push_back({require_field<std::string>(r, "question"),
                   require_field<std::string>(r, "context"),
                   {require_field<std::size_t>(r, "char_start"),
                    require_field<std::size_t>(r, "char_end")}});
  });
  return out;
}

void write_oracle_spans(const std::filesystem::path& path, const std::vector<OracleSpan>& spans) {
  std::vector<Json> records;
  for (const auto& s : spans) {
    Json j;
    j["question"] = s.question;
    j["context"] = s.context;
    j["char_start"] = s.span.start;
    j["char_end"] = s.span.end;
    records.push_back(std::move(j));
  }
  write_jsonl(path, records);
}

ModelBundle write_oracle_bundle(const std::filesystem::path& dir,
                                const std::vector<corpus::CorpusRecord>& records,
                                const std::filesystem::path& tokenizer_file,
                                std::size_t max_seq_len, const std::string& model_name) {
  std::vector<OracleSpan> spans;
  for (const auto& r : records) {
    for (auto kind : {corpus::QuestionKind::kBroad, corpus::QuestionKind::kSubtype}) {
      if (r.span(kind)) spans.push_back({std::string(build_query(kind)), r.context, *r.span(kind)});
    }
  }
  std::filesystem::create_directories(dir);
  write_oracle_spans(dir / "spans.jsonl", spans);
  std::filesystem::copy_file(tokenizer_file, dir / "tokenizer.json",
                             std::filesystem::copy_options::overwrite_existing);
  ModelBundle b;
  b.dir = dir;
  b.backend = "oracle";
  b.kind = BundleKind::kQa;
  b.graph_path = dir / "spans.jsonl";
  b.tokenizer_spec_path = dir / "tokenizer.json";
  b.max_seq_len = max_seq_len;
  b.model_name = model_name;
  b.training_run_id = "none";
  write_manifest(b);
  return load_bundle(dir);
}

std::unique_ptr<EncoderBackend> make_backend(const ModelBundle& bundle,
                                             std::shared_ptr<const BpeTokenizer> tokenizer) {
  if (bundle.kind != BundleKind::kQa) {
    throw Error(ErrorCode::kBundleInvalid, bundle.dir.string() + " is not a QA bundle");
  }
  if (bundle.backend == "oracle") {
    try {
      return std::make_unique<OracleBackend>(std::move(tokenizer),
                                             read_oracle_spans(bundle.graph_path));
    } catch (const Error& e) {
      throw Error(ErrorCode::kBundleInvalid, e.what());
    }
  }
  return std::make_unique<GraphQaBackend>(bundle);
}

}  // namespace pathex::qa
