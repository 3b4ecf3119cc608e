#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace pathex::qa {

inline constexpr const char* kManifestName = "manifest.txt";

// What the exported graph computes.
enum class BundleKind {
  kQa,        // start/end logits per token
  kEmbedder,  // final hidden state per token
};

// An exported model directory:
//
//   manifest.txt      key = value lines (see README for the key list)
//   <graph_file>      inference graph (or span table for backend = oracle)
//   <tokenizer_file>  serialized BPE tokenizer
//   <graph_data_file> optional external weights of the graph
struct ModelBundle {
  std::filesystem::path dir;
  std::string backend;  // "onnx" or "oracle"
  BundleKind kind = BundleKind::kQa;
  std::filesystem::path graph_path;
  std::filesystem::path tokenizer_spec_path;
  std::size_t max_seq_len = 0;
  std::optional<std::size_t> stride;
  std::string model_name;
  std::string training_run_id;
  std::string exported_at;
  std::map<std::string, std::string> manifest;
};

// Reads and verifies a bundle: required keys present, max_seq_len >= 16,
// referenced files exist and match their recorded SHA-256. Any failure is
// BUNDLE_INVALID.
ModelBundle load_bundle(const std::filesystem::path& dir);

// Writes manifest.txt for files already placed in `bundle.dir`, recording
// their hashes. Used by tooling and tests that assemble bundles.
void write_manifest(const ModelBundle& bundle);

}  // namespace pathex::qa
