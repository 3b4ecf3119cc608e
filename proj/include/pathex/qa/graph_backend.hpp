#pragma once

#include <memory>
#include <string>

#include "pathex/metrics/bertscore.hpp"
#include "pathex/qa/backend.hpp"
#include "pathex/qa/bundle.hpp"
#include "pathex/qa/onnx.hpp"
#include "pathex/qa/tokenizer.hpp"

namespace pathex::qa {

// Graph input names matched by role: input_ids (required), attention_mask
// and token_type_ids (optional). Any other input makes the graph unusable.
struct GraphInputs {
  std::string input_ids;
  std::string attention_mask;
  std::string token_type_ids;
};

// Span scorer backed by an exported QA graph. The graph takes [1, seq]
// token ids and returns start and end logits, either as two [1, seq]
// outputs or one [1, seq, 2] output.
class GraphQaBackend final : public EncoderBackend {
 public:
  explicit GraphQaBackend(const ModelBundle& bundle);
  GraphQaBackend(std::shared_ptr<const onnx::Session> session);

  SpanLogits run(const TokenizedWindow& window) override;

 private:
  std::shared_ptr<const onnx::Session> session_;
  GraphInputs inputs_;
};

// Contextual token embeddings from an exported encoder: the final hidden
// state [1, seq, hidden] for `<s> text </s>`, special positions dropped.
// Texts longer than the bundle's max_seq_len are truncated with a warning.
class GraphEmbedder final : public metrics::EmbeddingBackend {
 public:
  explicit GraphEmbedder(const ModelBundle& bundle);
  GraphEmbedder(std::shared_ptr<const onnx::Session> session,
                std::shared_ptr<const BpeTokenizer> tokenizer, std::size_t max_seq_len);

  metrics::EmbeddedText run(std::string_view text) override;

 private:
  std::shared_ptr<const onnx::Session> session_;
  std::shared_ptr<const BpeTokenizer> tokenizer_;
  std::size_t max_seq_len_;
  GraphInputs inputs_;
};

// Loads the graph a bundle names. BUNDLE_INVALID when it cannot be parsed
// or uses operators outside the supported set.
std::shared_ptr<const onnx::Session> load_session(const ModelBundle& bundle);

// Builds the embedder an embedder bundle names. BUNDLE_INVALID for QA or
// oracle bundles.
std::unique_ptr<metrics::EmbeddingBackend> make_embedder(const ModelBundle& bundle);

}  // namespace pathex::qa
