#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pathex/app/config.hpp"
#include "pathex/genbench/genbench.hpp"

// Pipeline commands. Each returns the process exit status: 0 when every
// record was processed, 1 when some record failed (the others are still
// written). Errors that stop a command before any record is processed are
// thrown as pathex::Error. Summaries go to `out`, structured logs to stderr.
namespace pathex::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRecordFailures = 1;
inline constexpr int kExitFatal = 2;

// Word-box files (*.jsonl, one document each, sorted by name) -> chunks.
// The document id is the file stem.
int cmd_ingest(const PipelineConfig& config, const std::filesystem::path& input_dir,
               const std::filesystem::path& out_file, std::ostream& out);

// Chunks + gold labels (+ optional manual span sidecar) -> corpus.
int cmd_build_corpus(const PipelineConfig& config, const std::filesystem::path& chunks_file,
                     const std::filesystem::path& gold_file,
                     const std::optional<std::filesystem::path>& annotations_file,
                     const std::filesystem::path& out_file, std::ostream& out);

// Seeded 70/10/20 split (ratios from config). EMPTY_INPUT for an empty corpus.
int cmd_split(const PipelineConfig& config, const std::filesystem::path& corpus_file,
              const std::filesystem::path& out_file, std::ostream& out);

// Span extraction over one split with the QA bundle at `bundle_dir` (or
// paths.model_bundle_dir when empty).
int cmd_extract(const PipelineConfig& config, const std::filesystem::path& corpus_file,
                const std::filesystem::path& split_file, const std::string& split_name,
                const std::filesystem::path& bundle_dir, const std::filesystem::path& out_file,
                std::ostream& out);

struct GenbenchRun {
  std::filesystem::path corpus_file;
  std::filesystem::path split_file;
  std::string split_name;
  std::string endpoint;  // overrides genbench.endpoint when set
  std::filesystem::path out_file;
  // Parsed answers as a predictions file, ready for cmd_evaluate.
  std::optional<std::filesystem::path> predictions_file;
};

// Queries a generation service for every record of a split. `make_client`
// replaces the HTTP client (tests).
int cmd_genbench(const PipelineConfig& config, const GenbenchRun& run, std::ostream& out,
                 const genbench::ClientFactory& make_client = nullptr);

struct EvaluateRun {
  std::filesystem::path predictions_file;
  std::filesystem::path corpus_file;
  // Embedder bundle; falls back to paths.embedder_bundle_dir.
  std::filesystem::path embedder_dir;
  // Deterministic hash embedder instead of a bundle.
  bool test_embedder = false;
  // Writes <prefix>.json, <prefix>.examples.jsonl and <prefix>.txt.
  std::filesystem::path report_prefix;
  std::string model_name;
};

int cmd_evaluate(const PipelineConfig& config, const EvaluateRun& run, std::ostream& out);

// Renders report summaries (<prefix>.json files) as one comparison table.
int cmd_report(const std::vector<std::filesystem::path>& reports,
               const std::optional<std::filesystem::path>& out_file, std::ostream& out);

}  // namespace pathex::app
