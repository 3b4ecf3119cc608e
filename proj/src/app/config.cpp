#include "pathex/app/config.hpp"

#include <cmath>
#include <functional>
#include <unordered_map>

#include "pathex/util/error.hpp"
#include "pathex/util/kv.hpp"
#include "pathex/util/parallel.hpp"
#include "pathex/util/text.hpp"

extern char** environ;

namespace pathex::app {
namespace {

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw Error(ErrorCode::kConfigInvalid, key + ": '" + value + "' is not " + want);
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    const auto n = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::logic_error&) {
    bad_value(key, v, "a non-negative integer");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "a number");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto s = text::to_lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, v, "a boolean");
}

metrics::BertScore to_triple(const std::string& key, const std::string& v) {
  std::vector<double> parts;
  std::string cur;
  for (char c : v + ",") {
    if (c != ',') {
      cur += c;
      continue;
    }
    parts.push_back(to_double(key, std::string(text::trim(cur))));
    cur.clear();
  }
  if (parts.size() != 3) bad_value(key, v, "three comma-separated numbers (P, R, F)");
  return {parts[0], parts[1], parts[2]};
}

struct KeyDef {
  const char* key;
  Setter set;
};

const std::vector<KeyDef>& key_defs() {
  static const std::vector<KeyDef> defs = {
      {"global.seed", [](PipelineConfig& c, const std::string& v) { c.seed = to_uint("global.seed", v); }},
      {"global.jobs", [](PipelineConfig& c, const std::string& v) { c.jobs = to_uint("global.jobs", v); }},
      {"global.log_level", [](PipelineConfig& c, const std::string& v) { c.log_level = log::parse_level(v); }},

      {"ingest.overlap_ratio", [](PipelineConfig& c, const std::string& v) { c.ingest.layout.overlap_ratio = to_double("ingest.overlap_ratio", v); }},
      {"ingest.gap_factor", [](PipelineConfig& c, const std::string& v) { c.ingest.layout.gap_factor = to_double("ingest.gap_factor", v); }},
      {"ingest.top_band", [](PipelineConfig& c, const std::string& v) { c.ingest.layout.top_band = to_double("ingest.top_band", v); }},
      {"ingest.bottom_band", [](PipelineConfig& c, const std::string& v) { c.ingest.layout.bottom_band = to_double("ingest.bottom_band", v); }},
      {"ingest.max_edit_distance", [](PipelineConfig& c, const std::string& v) { c.ingest.layout.max_edit_distance = static_cast<int>(to_uint("ingest.max_edit_distance", v)); }},
      {"ingest.lexicon_path", [](PipelineConfig& c, const std::string& v) { c.ingest.lexicon_path = v; }},

      {"corpus.train_ratio", [](PipelineConfig& c, const std::string& v) { c.corpus.train = to_double("corpus.train_ratio", v); }},
      {"corpus.validation_ratio", [](PipelineConfig& c, const std::string& v) { c.corpus.validation = to_double("corpus.validation_ratio", v); }},
      {"corpus.test_ratio", [](PipelineConfig& c, const std::string& v) { c.corpus.test = to_double("corpus.test_ratio", v); }},

      {"qa.max_seq_len", [](PipelineConfig& c, const std::string& v) { c.qa.max_seq_len = to_uint("qa.max_seq_len", v); }},
      {"qa.stride", [](PipelineConfig& c, const std::string& v) { c.qa.stride = to_uint("qa.stride", v); }},
      {"qa.max_answer_tokens", [](PipelineConfig& c, const std::string& v) { c.qa.max_answer_tokens = to_uint("qa.max_answer_tokens", v); }},
      {"qa.n_best", [](PipelineConfig& c, const std::string& v) { c.qa.n_best = to_uint("qa.n_best", v); }},

      {"metrics.idf", [](PipelineConfig& c, const std::string& v) { c.metrics.idf = to_bool("metrics.idf", v); }},
      {"metrics.baseline", [](PipelineConfig& c, const std::string& v) { c.metrics.baseline = to_triple("metrics.baseline", v); }},
      {"metrics.model_name", [](PipelineConfig& c, const std::string& v) { c.metrics.model_name = v; }},

      {"genbench.endpoint", [](PipelineConfig& c, const std::string& v) { c.genbench.endpoint = v; }},
      {"genbench.template_path", [](PipelineConfig& c, const std::string& v) { c.genbench.template_path = v; }},
      {"genbench.max_new_tokens", [](PipelineConfig& c, const std::string& v) { c.genbench.params.max_new_tokens = static_cast<int>(to_uint("genbench.max_new_tokens", v)); }},
      {"genbench.temperature", [](PipelineConfig& c, const std::string& v) { c.genbench.params.temperature = to_double("genbench.temperature", v); }},
      {"genbench.seed", [](PipelineConfig& c, const std::string& v) { c.genbench.params.seed = to_uint("genbench.seed", v); }},
      {"genbench.retry_max", [](PipelineConfig& c, const std::string& v) { c.genbench.retry.retry_max = static_cast<int>(to_uint("genbench.retry_max", v)); }},
      {"genbench.initial_backoff_ms", [](PipelineConfig& c, const std::string& v) { c.genbench.retry.initial_backoff = std::chrono::milliseconds(to_uint("genbench.initial_backoff_ms", v)); }},
      {"genbench.backoff_multiplier", [](PipelineConfig& c, const std::string& v) { c.genbench.retry.multiplier = to_double("genbench.backoff_multiplier", v); }},
      {"genbench.timeout_ms", [](PipelineConfig& c, const std::string& v) { c.genbench.timeout_ms = to_uint("genbench.timeout_ms", v); }},
      {"genbench.max_in_flight", [](PipelineConfig& c, const std::string& v) { c.genbench.max_in_flight = to_uint("genbench.max_in_flight", v); }},

      {"paths.ontology_path", [](PipelineConfig& c, const std::string& v) { c.paths.ontology_path = v; }},
      {"paths.model_bundle_dir", [](PipelineConfig& c, const std::string& v) { c.paths.model_bundle_dir = v; }},
      {"paths.embedder_bundle_dir", [](PipelineConfig& c, const std::string& v) { c.paths.embedder_bundle_dir = v; }},
      {"paths.work_dir", [](PipelineConfig& c, const std::string& v) { c.paths.work_dir = v; }},
  };
  return defs;
}

const Setter* find_setter(const std::string& key) {
  static const auto index = [] {
    std::unordered_map<std::string, const Setter*> m;
    for (const auto& d : key_defs()) m.emplace(d.key, &d.set);
    return m;
  }();
  auto it = index.find(key);
  return it == index.end() ? nullptr : it->second;
}

bool is_section(const std::string& s) {
  for (const char* name : {"global", "ingest", "corpus", "qa", "metrics", "genbench", "paths"}) {
    if (s == name) return true;
  }
  return false;
}

bool is_path_key(const std::string& key) {
  return key == "ingest.lexicon_path" || key == "genbench.template_path" ||
         key.rfind("paths.", 0) == 0;
}

void require_path(const std::filesystem::path& p, const char* key, bool directory) {
  if (p.empty()) return;
  std::error_code ec;
  const bool ok = directory ? std::filesystem::is_directory(p, ec)
                            : std::filesystem::is_regular_file(p, ec);
  if (!ok) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string(key) + ": " + p.string() + (directory ? " is not a directory" : " is not a file"));
  }
}

}  // namespace

std::size_t PipelineConfig::effective_jobs() const { return jobs == 0 ? default_jobs() : jobs; }

const std::vector<std::string>& config_keys() {
  static const auto keys = [] {
    std::vector<std::string> out;
    for (const auto& d : key_defs()) out.emplace_back(d.key);
    return out;
  }();
  return keys;
}

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
  const Setter* set = find_setter(key);
  if (set == nullptr) throw Error(ErrorCode::kConfigInvalid, "unknown config key '" + key + "'");
  (*set)(config, value);
}

std::map<std::string, std::string> environment_overrides(const std::vector<std::string>& env) {
  std::map<std::string, std::string> out;
  for (const auto& entry : env) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(0, eq);
    const auto sep = name.find("__");
    if (sep == std::string::npos || sep == 0) continue;
    const std::string prefix = name.substr(0, sep);
    const std::string section = text::to_lower(prefix);
    // Section names must be spelled in upper case, so PATH__X and friends
    // from unrelated tools do not collide with the config namespace.
    if (section == prefix || !is_section(section)) continue;
    const std::string key = section + "." + text::to_lower(name.substr(sep + 2));
    if (find_setter(key) == nullptr) {
      throw Error(ErrorCode::kConfigInvalid, "environment variable " + name + " names no config key");
    }
    out[key] = entry.substr(eq + 1);
  }
  return out;
}

std::map<std::string, std::string> process_environment_overrides() {
  std::vector<std::string> env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) env.emplace_back(*e);
  return environment_overrides(env);
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& file,
                           const std::map<std::string, std::string>& overrides) {
  PipelineConfig config;
  if (file) {
    if (!std::filesystem::is_regular_file(*file)) {
      throw Error(ErrorCode::kConfigInvalid, "config file " + file->string() + " does not exist");
    }
    const auto base = file->parent_path();
    for (const auto& [raw_key, value] : load_kv(*file)) {
      // Keys before any [section] header belong to the global section.
      const std::string key = raw_key.find('.') == std::string::npos ? "global." + raw_key : raw_key;
      std::string v = value;
      // Relative paths in a file are relative to that file.
      if (is_path_key(key) && !v.empty() && std::filesystem::path(v).is_relative()) {
        v = (base / v).lexically_normal().string();
      }
      try {
        apply_setting(config, key, v);
      } catch (const Error& e) {
        throw e.with_context(file->string());
      }
    }
  }
  for (const auto& [key, value] : overrides) apply_setting(config, key, value);
  validate_config(config);
  return config;
}

void validate_config(const PipelineConfig& c) {
  const auto& r = c.corpus;
  if (r.train < 0 || r.validation < 0 || r.test < 0 ||
      std::abs(r.train + r.validation + r.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::kConfigInvalid, "corpus ratios must be non-negative and sum to 1");
  }
  const auto& l = c.ingest.layout;
  if (l.overlap_ratio <= 0 || l.overlap_ratio > 1) {
    throw Error(ErrorCode::kConfigInvalid, "ingest.overlap_ratio must be in (0, 1]");
  }
  if (l.gap_factor <= 0) throw Error(ErrorCode::kConfigInvalid, "ingest.gap_factor must be positive");
  if (!(0 <= l.top_band && l.top_band < l.bottom_band && l.bottom_band <= 1)) {
    throw Error(ErrorCode::kConfigInvalid, "ingest bands must satisfy 0 <= top_band < bottom_band <= 1");
  }
  if (c.qa.stride && *c.qa.stride == 0) throw Error(ErrorCode::kConfigInvalid, "qa.stride must be positive");
  if (c.qa.max_seq_len && *c.qa.max_seq_len < 16) {
    throw Error(ErrorCode::kConfigInvalid, "qa.max_seq_len must be at least 16");
  }
  if (c.qa.max_answer_tokens == 0) throw Error(ErrorCode::kConfigInvalid, "qa.max_answer_tokens must be positive");
  if (c.qa.n_best == 0) throw Error(ErrorCode::kConfigInvalid, "qa.n_best must be positive");
  if (c.metrics.baseline) {
    for (double b : {c.metrics.baseline->precision, c.metrics.baseline->recall, c.metrics.baseline->f1}) {
      if (b >= 1.0) throw Error(ErrorCode::kConfigInvalid, "metrics.baseline components must be below 1");
    }
  }
  if (c.genbench.params.temperature < 0) {
    throw Error(ErrorCode::kConfigInvalid, "genbench.temperature must be non-negative");
  }
  if (c.genbench.retry.multiplier < 1.0) {
    throw Error(ErrorCode::kConfigInvalid, "genbench.backoff_multiplier must be at least 1");
  }
  if (c.genbench.max_in_flight == 0) throw Error(ErrorCode::kConfigInvalid, "genbench.max_in_flight must be positive");
  if (c.genbench.timeout_ms == 0) throw Error(ErrorCode::kConfigInvalid, "genbench.timeout_ms must be positive");

  require_path(c.ingest.lexicon_path, "ingest.lexicon_path", false);
  require_path(c.genbench.template_path, "genbench.template_path", false);
  require_path(c.paths.ontology_path, "paths.ontology_path", false);
  require_path(c.paths.model_bundle_dir, "paths.model_bundle_dir", true);
  require_path(c.paths.embedder_bundle_dir, "paths.embedder_bundle_dir", true);
  require_path(c.paths.work_dir, "paths.work_dir", true);
}

}  // namespace pathex::app
