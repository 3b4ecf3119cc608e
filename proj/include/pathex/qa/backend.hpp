#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pathex/corpus/corpus.hpp"
#include "pathex/qa/bundle.hpp"
#include "pathex/qa/decode.hpp"
#include "pathex/qa/encode.hpp"
#include "pathex/qa/tokenizer.hpp"

namespace pathex::qa {

// A span-scoring encoder. Instances need not be thread-safe; callers keep
// one per worker.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;
  virtual SpanLogits run(const TokenizedWindow& window) = 0;
};

// Runs the backend and checks its output: one finite start and end score
// per token. Any failure surfaces as BACKEND_FAILURE.
SpanLogits infer(EncoderBackend& backend, const TokenizedWindow& window);

// One gold answer the oracle should point at.
struct OracleSpan {
  std::string question;
  std::string context;
  corpus::CharSpan span;
};

// Test double that scores `peak` at the gold start/end tokens of a known
// (question, context) pair and 0 elsewhere. Windows it does not recognize
// fail.
class OracleBackend final : public EncoderBackend {
 public:
  OracleBackend(std::shared_ptr<const BpeTokenizer> tokenizer, std::vector<OracleSpan> spans,
                double peak = 10.0);

  SpanLogits run(const TokenizedWindow& window) override;

 private:
  struct Entry {
    std::vector<TokenId> question_ids;
    Encoding context;
    std::size_t start_token;
    std::size_t end_token;
  };
  std::shared_ptr<const BpeTokenizer> tokenizer_;
  std::vector<Entry> entries_;
  double peak_;
};

// Oracle span table: line-delimited {question, context, char_start, char_end}.
std::vector<OracleSpan> read_oracle_spans(const std::filesystem::path& path);
void write_oracle_spans(const std::filesystem::path& path, const std::vector<OracleSpan>& spans);

// Writes an oracle QA bundle into `dir`: the gold spans of `records` for both
// questions (records lacking a span are skipped), a copy of the tokenizer and
// the manifest. Returns the loaded bundle.
ModelBundle write_oracle_bundle(const std::filesystem::path& dir,
                                const std::vector<corpus::CorpusRecord>& records,
                                const std::filesystem::path& tokenizer_file,
                                std::size_t max_seq_len, const std::string& model_name = "oracle");

// Builds the backend a QA bundle names. BUNDLE_INVALID for unusable bundles.
std::unique_ptr<EncoderBackend> make_backend(const ModelBundle& bundle,
                                             std::shared_ptr<const BpeTokenizer> tokenizer);

}  // namespace pathex::qa
