#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pathex/corpus/split.hpp"
#include "pathex/genbench/genbench.hpp"
#include "pathex/ingest/layout.hpp"
#include "pathex/metrics/bertscore.hpp"
#include "pathex/qa/extract.hpp"
#include "pathex/util/log.hpp"

namespace pathex::app {

struct IngestSettings {
  ingest::LayoutConfig layout;
  std::filesystem::path lexicon_path;
};

struct QaSettings {
  // max_seq_len comes from the bundle; a configured value overrides it.
  std::optional<std::size_t> max_seq_len;
  std::optional<std::size_t> stride;
  std::size_t max_answer_tokens = 30;
  std::size_t n_best = 20;
};

struct MetricsSettings {
  bool idf = false;
  std::optional<metrics::BertScore> baseline;
  std::string model_name;
};

struct GenbenchSettings {
  std::string endpoint;
  std::filesystem::path template_path;
  genbench::GenerationParams params;
  genbench::RetryPolicy retry;
  std::size_t timeout_ms = 60000;
  std::size_t max_in_flight = 4;
};

struct PathSettings {
  std::filesystem::path ontology_path;
  std::filesystem::path model_bundle_dir;
  std::filesystem::path embedder_bundle_dir;
  std::filesystem::path work_dir;
};

// Everything a pipeline command reads. Loaded from an INI-style file
// ([section] headers, "key = value"), then overridden by environment
// variables named SECTION__KEY (e.g. QA__STRIDE=64, GLOBAL__SEED=7).
struct PipelineConfig {
  std::uint64_t seed = 42;
  std::size_t jobs = 0;  // 0: one per processor
  log::Level log_level = log::Level::kInfo;

  IngestSettings ingest;
  corpus::SplitRatios corpus;
  QaSettings qa;
  MetricsSettings metrics;
  GenbenchSettings genbench;
  PathSettings paths;

  std::size_t effective_jobs() const;
};

// Every accepted "section.key", in documentation order.
const std::vector<std::string>& config_keys();

// Applies one setting. Unknown keys and unparsable values raise
// CONFIG_INVALID.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

// Picks SECTION__KEY variables out of `environ`-style entries and returns
// them as "section.key" -> value. Variables whose section is not a config
// section are ignored; an unknown key inside a known section is an error.
std::map<std::string, std::string> environment_overrides(const std::vector<std::string>& env);
std::map<std::string, std::string> process_environment_overrides();

// Defaults, then the file (if any), then the overrides, then validation.
PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::map<std::string, std::string>& overrides = {});

// Checks cross-field constraints and that every configured path exists.
void validate_config(const PipelineConfig& config);

}  // namespace pathex::app
