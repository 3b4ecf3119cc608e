#include "pathex/metrics/bertscore.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pathex/corpus/split.hpp"
#include "pathex/metrics/answer.hpp"
#include "pathex/util/error.hpp"

namespace pathex::metrics {
namespace {

double dot(const Vector& u, const Vector& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
  return s;
}

// Weighted mean of each row's best clamped similarity.
double greedy_side(const std::vector<std::vector<double>>& sim, bool by_row,
                   const std::vector<double>& w) {
  const std::size_t rows = sim.size(), cols = sim.front().size();
  const std::size_t n = by_row ? rows : cols;
  double num = 0.0, den = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double best = 0.0;
    const std::size_t m = by_row ? cols : rows;
    for (std::size_t b = 0; b < m; ++b) best = std::max(best, by_row ? sim[a][b] : sim[b][a]);
    num += w[a] * best;
    den += w[a];
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

double cosine(const Vector& u, const Vector& v) {
  const double uu = dot(u, u), vv = dot(v, v);
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return dot(u, v) / std::sqrt(uu * vv);
}

BertScore bertscore(const std::vector<Vector>& pred, const std::vector<Vector>& ref,
                    const TokenWeights* weights) {
  if (pred.empty() || ref.empty()) {
    throw Error(ErrorCode::kEmptySequence, "bertscore needs at least one token per side");
  }
  const std::size_t dim = pred.front().size();
  auto same_dim = [dim](const Vector& v) { return v.size() == dim; };
  if (!std::all_of(pred.begin(), pred.end(), same_dim) ||
      !std::all_of(ref.begin(), ref.end(), same_dim)) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding dimensions differ");
  }
  std::vector<double> wp(pred.size(), 1.0), wr(ref.size(), 1.0);
  if (weights) {
    if (weights->pred.size() != pred.size() || weights->ref.size() != ref.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "weight count differs from token count");
    }
    wp = weights->pred;
    wr = weights->ref;
    auto positive_sum = [](const std::vector<double>& w) {
      double s = 0.0;
      for (double x : w) s += x;
      return s > 0.0;
    };
    if (!positive_sum(wp)) wp.assign(pred.size(), 1.0);
    if (!positive_sum(wr)) wr.assign(ref.size(), 1.0);
  }

  // sim[i][j] = clamp(cos(pred_i, ref_j), 0, 1)
  std::vector<std::vector<double>> sim(pred.size(), std::vector<double>(ref.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      sim[i][j] = std::clamp(cosine(pred[i], ref[j]), 0.0, 1.0);
    }
  }
  BertScore s;
  s.precision = greedy_side(sim, true, wp);
  s.recall = greedy_side(sim, false, wr);
  const double denom = s.precision + s.recall;
  s.f1 = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
  return s;
}

BertScore rescale(const BertScore& s, const BertScore& b) {
  auto r = [](double x, double base) { return base < 1.0 ? (x - base) / (1.0 - base) : x; };
  return {r(s.precision, b.precision), r(s.recall, b.recall), r(s.f1, b.f1)};
}

IdfTable::IdfTable(const std::vector<std::vector<std::string>>& documents)
    : documents_(documents.size()) {
  for (const auto& doc : documents) {
    for (const auto& t : std::set<std::string>(doc.begin(), doc.end())) ++df_[t];
  }
}

double IdfTable::weight(const std::string& token) const {
  auto it = df_.find(token);
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((static_cast<double>(documents_) + 1.0) / (df + 1.0));
}

std::vector<double> IdfTable::weights(const std::vector<std::string>& tokens) const {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(weight(t));
  return out;
}

EmbeddedText embed(std::string_view text, EmbeddingBackend& backend) {
  EmbeddedText out;
  try {
    out = backend.run(text);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBackendFailure || e.code() == ErrorCode::kEmptySequence) throw;
    throw Error(ErrorCode::kBackendFailure, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kBackendFailure, e.what());
  }
  if (out.vectors.empty()) throw Error(ErrorCode::kEmptySequence, "text has no tokens");
  if (out.tokens.size() != out.vectors.size()) {
    throw Error(ErrorCode::kBackendFailure, "embedder token/vector count mismatch");
  }
  return out;
}

EmbeddedText HashEmbedder::run(std::string_view text) {
  EmbeddedText out;
  out.tokens = normalize_answer(text);
  for (const auto& t : out.tokens) out.vectors.push_back(vector_for(t));
  return out;
}

Vector HashEmbedder::vector_for(std::string_view token) const {
  // FNV-1a seeds a SplitMix64 stream; components uniform in [-1, 1).
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : token) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  corpus::SplitMix64 rng(h);
  Vector v(dim_);
  double norm = 0.0;
  for (auto& x : v) {
    x = static_cast<double>(rng.next() >> 11) * 0x1.0p-52 - 1.0;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

}  // namespace pathex::metrics
