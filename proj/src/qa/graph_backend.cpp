#include "pathex/qa/graph_backend.hpp"

#include "pathex/util/error.hpp"
#include "pathex/util/log.hpp"

namespace pathex::qa {
namespace {

GraphInputs match_inputs(const onnx::Session& session) {
  GraphInputs in;
  for (const auto& v : session.inputs()) {
    if (v.name.find("input_ids") != std::string::npos) {
      in.input_ids = v.name;
    } else if (v.name.find("attention_mask") != std::string::npos) {
      in.attention_mask = v.name;
    } else if (v.name.find("token_type_ids") != std::string::npos) {
      in.token_type_ids = v.name;
    } else {
      throw Error(ErrorCode::kBundleInvalid, "graph input '" + v.name + "' has no known role");
    }
  }
  if (in.input_ids.empty()) throw Error(ErrorCode::kBundleInvalid, "graph has no input_ids input");
  return in;
}

onnx::ElemType input_type(const onnx::Session& s, const std::string& name) {
  for (const auto& v : s.inputs()) {
    if (v.name == name) return v.type;
  }
  return onnx::ElemType::kInt64;
}

std::vector<onnx::Tensor> run_ids(const onnx::Session& session, const GraphInputs& in,
                                  const std::vector<TokenId>& ids) {
  const auto n = static_cast<std::int64_t>(ids.size());
  std::map<std::string, onnx::Tensor> feeds;
  feeds[in.input_ids] = onnx::Tensor::ints({1, n}, ids, input_type(session, in.input_ids));
  if (!in.attention_mask.empty()) {
    feeds[in.attention_mask] = onnx::Tensor::ints(
        {1, n}, std::vector<std::int64_t>(ids.size(), 1), input_type(session, in.attention_mask));
  }
  if (!in.token_type_ids.empty()) {
    feeds[in.token_type_ids] = onnx::Tensor::ints(
        {1, n}, std::vector<std::int64_t>(ids.size(), 0), input_type(session, in.token_type_ids));
  }
  return session.run(feeds);
}

std::vector<double> as_row(const onnx::Tensor& t, std::size_t n) {
  if (!t.floating() || t.numel() != n) {
    throw Error(ErrorCode::kBackendFailure, "graph output does not hold one score per token");
  }
  return {t.f.begin(), t.f.end()};
}

}  // namespace

std::shared_ptr<const onnx::Session> load_session(const ModelBundle& bundle) {
  return std::make_shared<const onnx::Session>(onnx::load_model(bundle.graph_path));
}

GraphQaBackend::GraphQaBackend(const ModelBundle& bundle) : GraphQaBackend(load_session(bundle)) {}

GraphQaBackend::GraphQaBackend(std::shared_ptr<const onnx::Session> session)
    : session_(std::move(session)), inputs_(match_inputs(*session_)) {
  const auto outs = session_->outputs().size();
  if (outs != 1 && outs != 2) {
    throw Error(ErrorCode::kBundleInvalid, "QA graph must have one or two outputs");
  }
}

SpanLogits GraphQaBackend::run(const TokenizedWindow& window) {
  const auto outputs = run_ids(*session_, inputs_, window.token_ids);
  const std::size_t n = window.size();
  SpanLogits logits;
  if (outputs.size() == 2) {
    logits.start = as_row(outputs[0], n);
    logits.end = as_row(outputs[1], n);
    return logits;
  }
  const auto& t = outputs[0];
  if (!t.floating() || t.numel() != 2 * n || t.shape.empty() || t.shape.back() != 2) {
    throw Error(ErrorCode::kBackendFailure, "QA graph output is not [.., seq, 2]");
  }
  for (std::size_t k = 0; k < n; ++k) {
    logits.start.push_back(t.f[2 * k]);
    logits.end.push_back(t.f[2 * k + 1]);
  }
  return logits;
}

GraphEmbedder::GraphEmbedder(const ModelBundle& bundle)
    : GraphEmbedder(load_session(bundle),
                    std::make_shared<const BpeTokenizer>(BpeTokenizer::load(bundle.tokenizer_spec_path)),
                    bundle.max_seq_len) {}

GraphEmbedder::GraphEmbedder(std::shared_ptr<const onnx::Session> session,
                             std::shared_ptr<const BpeTokenizer> tokenizer, std::size_t max_seq_len)
    : session_(std::move(session)),
      tokenizer_(std::move(tokenizer)),
      max_seq_len_(max_seq_len),
      inputs_(match_inputs(*session_)) {
  if (max_seq_len_ < 3) throw Error(ErrorCode::kBundleInvalid, "embedder max_seq_len too small");
}

metrics::EmbeddedText GraphEmbedder::run(std::string_view text) {
  Encoding enc = tokenizer_->encode(text);
  metrics::EmbeddedText out;
  if (enc.ids.empty()) return out;
  const std::size_t room = max_seq_len_ - 2;
  if (enc.size() > room) {
    log::warn("embedder.truncated", {{"tokens", enc.size()}, {"kept", room}});
    enc.ids.resize(room);
    enc.tokens.resize(room);
  }
  std::vector<TokenId> ids{tokenizer_->cls_id()};
  ids.insert(ids.end(), enc.ids.begin(), enc.ids.end());
  ids.push_back(tokenizer_->sep_id());

  const auto outputs = run_ids(*session_, inputs_, ids);
  const auto& hidden = outputs.front();
  if (!hidden.floating() || hidden.shape.size() < 2 ||
      hidden.shape[hidden.shape.size() - 2] != static_cast<std::int64_t>(ids.size())) {
    throw Error(ErrorCode::kBackendFailure, "embedder output is not [.., seq, hidden]");
  }
  const auto dim = static_cast<std::size_t>(hidden.shape.back());
  for (std::size_t k = 1; k + 1 < ids.size(); ++k) {
    const float* row = hidden.f.data() + k * dim;
    out.vectors.emplace_back(row, row + dim);
  }
  out.tokens = std::move(enc.tokens);
  return out;
}

std::unique_ptr<metrics::EmbeddingBackend> make_embedder(const ModelBundle& bundle) {
  if (bundle.kind != BundleKind::kEmbedder || bundle.backend != "onnx") {
    throw Error(ErrorCode::kBundleInvalid, bundle.dir.string() + " is not an onnx embedder bundle");
  }
  return std::make_unique<GraphEmbedder>(bundle);
}

}  // namespace pathex::qa
