#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pathex::metrics {

using Vector = std::vector<double>;

struct BertScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Optional per-token importance weights for each side.
struct TokenWeights {
  std::vector<double> pred;
  std::vector<double> ref;
};

// Cosine similarity; 0 when either vector is zero.
double cosine(const Vector& u, const Vector& v);

// Greedy matching over contextual token embeddings. Each reference token is
// matched to its most similar prediction token (recall) and vice versa
// (precision); similarities are clamped to [0, 1] before weighting.
// F = 2PR / (P + R), or 0 when P + R = 0. Uniform weights unless `weights`
// is given. Errors: EMPTY_SEQUENCE, DIMENSION_MISMATCH (vector sizes or
// weight counts).
BertScore bertscore(const std::vector<Vector>& pred, const std::vector<Vector>& ref,
                    const TokenWeights* weights = nullptr);

// Linear baseline rescaling (x - b) / (1 - b) per component.
BertScore rescale(const BertScore& score, const BertScore& baseline);

// Inverse document frequency over reference token lists:
// idf(t) = ln((M + 1) / (df(t) + 1)).
class IdfTable {
 public:
  IdfTable() = default;
  explicit IdfTable(const std::vector<std::vector<std::string>>& documents);
  double weight(const std::string& token) const;
  std::vector<double> weights(const std::vector<std::string>& tokens) const;

 private:
  std::map<std::string, std::size_t> df_;
  std::size_t documents_ = 0;
};

struct EmbeddedText {
  std::vector<std::string> tokens;
  std::vector<Vector> vectors;
};

// Produces one vector per subword token. Instances need not be thread-safe.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual EmbeddedText run(std::string_view text) = 0;
};

// Validated embedding: EMPTY_SEQUENCE when the text yields no tokens;
// BACKEND_FAILURE for backend errors or inconsistent output.
EmbeddedText embed(std::string_view text, EmbeddingBackend& backend);

// Deterministic test embedder: tokens are normalize_answer(text), each
// mapped to a unit vector derived from a 64-bit hash of the token.
class HashEmbedder final : public EmbeddingBackend {
 public:
  explicit HashEmbedder(std::size_t dim = 32) : dim_(dim) {}
  EmbeddedText run(std::string_view text) override;
  Vector vector_for(std::string_view token) const;

 private:
  std::size_t dim_;
};

}  // namespace pathex::metrics
