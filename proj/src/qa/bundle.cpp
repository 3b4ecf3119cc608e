#include "pathex/qa/bundle.hpp"

#include <sstream>

#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"
#include "pathex/util/kv.hpp"
#include "pathex/util/sha256.hpp"

namespace pathex::qa {
namespace {

const std::string& required(const std::map<std::string, std::string>& m, const std::string& key,
                            const std::filesystem::path& dir) {
  auto it = m.find(key);
  if (it == m.end() || it->second.empty()) {
    throw Error(ErrorCode::kBundleInvalid, dir.string() + ": manifest lacks '" + key + "'");
  }
  return it->second;
}

std::size_t parse_size(const std::string& v, const std::string& key,
                       const std::filesystem::path& dir) {
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (pos != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kBundleInvalid, dir.string() + ": bad integer for '" + key + "'");
  }
}

std::filesystem::path verified_file(const std::map<std::string, std::string>& m,
                                    const std::string& file_key, const std::string& hash_key,
                                    const std::filesystem::path& dir) {
  const auto path = dir / required(m, file_key, dir);
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kBundleInvalid, path.string() + " does not exist");
  }
  const auto& expected = required(m, hash_key, dir);
  const auto actual = sha256_file(path);
  if (actual != expected) {
    throw Error(ErrorCode::kBundleInvalid,
                path.string() + ": sha256 mismatch (manifest " + expected + ", file " + actual + ")");
  }
  return path;
}

}  // namespace

ModelBundle load_bundle(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestName;
  if (!std::filesystem::is_regular_file(manifest_path)) {
    throw Error(ErrorCode::kBundleInvalid, "missing " + manifest_path.string());
  }
  ModelBundle b;
  b.dir = dir;
  try {
    b.manifest = load_kv(manifest_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kBundleInvalid, e.detail());
  }
  const auto& m = b.manifest;
  b.backend = required(m, "backend", dir);
  if (b.backend != "onnx" && b.backend != "oracle") {
    throw Error(ErrorCode::kBundleInvalid, dir.string() + ": unknown backend '" + b.backend + "'");
  }
  const std::string kind = m.count("kind") ? m.at("kind") : "qa";
  if (kind == "qa") {
    b.kind = BundleKind::kQa;
  } else if (kind == "embedder") {
    b.kind = BundleKind::kEmbedder;
  } else {
    throw Error(ErrorCode::kBundleInvalid, dir.string() + ": unknown kind '" + kind + "'");
  }
  b.graph_path = verified_file(m, "graph_file", "graph_sha256", dir);
  b.tokenizer_spec_path = verified_file(m, "tokenizer_file", "tokenizer_sha256", dir);
  if (m.count("graph_data_file")) verified_file(m, "graph_data_file", "graph_data_sha256", dir);
  b.max_seq_len = parse_size(required(m, "max_seq_len", dir), "max_seq_len", dir);
  if (b.max_seq_len < 16) {
    throw Error(ErrorCode::kBundleInvalid, dir.string() + ": max_seq_len must be >= 16");
  }
  if (auto it = m.find("stride"); it != m.end() && !it->second.empty()) {
    b.stride = parse_size(it->second, "stride", dir);
  }
  b.model_name = m.count("model_name") ? m.at("model_name") : "";
  b.training_run_id = m.count("training_run_id") ? m.at("training_run_id") : "";
  b.exported_at = m.count("exported_at") ? m.at("exported_at") : "";
  return b;
}

void write_manifest(const ModelBundle& b) {
  std::ostringstream out;
  out << "backend = " << b.backend << "\n";
  out << "kind = " << (b.kind == BundleKind::kQa ? "qa" : "embedder") << "\n";
  out << "graph_file = " << b.graph_path.filename().string() << "\n";
  out << "graph_sha256 = " << sha256_file(b.dir / b.graph_path.filename()) << "\n";
  out << "tokenizer_file = " << b.tokenizer_spec_path.filename().string() << "\n";
  out << "tokenizer_sha256 = " << sha256_file(b.dir / b.tokenizer_spec_path.filename()) << "\n";
  out << "max_seq_len = " << b.max_seq_len << "\n";
  if (b.stride) out << "stride = " << *b.stride << "\n";
  out << "model_name = " << b.model_name << "\n";
  out << "training_run_id = " << b.training_run_id << "\n";
  out << "exported_at = " << b.exported_at << "\n";
  write_text_file(b.dir / kManifestName, out.str());
}

}  // namespace pathex::qa
