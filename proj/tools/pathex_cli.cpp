#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pathex/app/commands.hpp"
#include "pathex/app/config.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/log.hpp"

namespace fs = std::filesystem;
using namespace pathex;

namespace {

// Relative output paths land in paths.work_dir when one is configured.
fs::path output_path(const app::PipelineConfig& config, const fs::path& p) {
  if (p.empty() || p.is_absolute() || config.paths.work_dir.empty()) return p;
  return config.paths.work_dir / p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Cancer type extraction pipeline"};
  cli.require_subcommand(1);

  std::string config_file;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  std::string log_level;
  cli.add_option("--config", config_file, "INI config file")->check(CLI::ExistingFile);
  cli.add_option("--jobs", jobs, "worker threads (default: processor count)");
  cli.add_option("--seed", seed, "global seed (split permutation)");
  cli.add_option("--log-level", log_level, "debug|info|warn|error|off");

  fs::path in_dir, out, chunks, gold, annotations, corpus_file, splits, bundle, preds, embedder, gen_preds;
  std::string split_name, endpoint, model_name;
  bool test_embedder = false;
  std::vector<fs::path> reports;

  auto* ingest = cli.add_subcommand("ingest", "word-box documents -> chunks");
  ingest->add_option("--input", in_dir, "directory of *.jsonl word-box files")->required();
  ingest->add_option("--out", out, "chunks file")->required();

  auto* build = cli.add_subcommand("build-corpus", "chunks + gold labels -> corpus");
  build->add_option("--chunks", chunks)->required()->check(CLI::ExistingFile);
  build->add_option("--gold", gold)->required()->check(CLI::ExistingFile);
  build->add_option("--annotations", annotations, "manual span sidecar")->check(CLI::ExistingFile);
  build->add_option("--out", out, "corpus file")->required();

  auto* split = cli.add_subcommand("split", "seeded train/validation/test split");
  split->add_option("--corpus", corpus_file)->required()->check(CLI::ExistingFile);
  split->add_option("--out", out, "split file")->required();

  auto* extract = cli.add_subcommand("extract", "span extraction with a QA bundle");
  extract->add_option("--corpus", corpus_file)->required()->check(CLI::ExistingFile);
  extract->add_option("--splits", splits)->required()->check(CLI::ExistingFile);
  extract->add_option("--split", split_name, "train|validation|test")->required();
  extract->add_option("--bundle", bundle, "QA bundle (default: paths.model_bundle_dir)");
  extract->add_option("--out", out, "predictions file")->required();

  auto* gen = cli.add_subcommand("genbench", "benchmark a text generation service");
  gen->add_option("--corpus", corpus_file)->required()->check(CLI::ExistingFile);
  gen->add_option("--splits", splits)->required()->check(CLI::ExistingFile);
  gen->add_option("--split", split_name, "train|validation|test")->required();
  gen->add_option("--endpoint", endpoint, "http://host:port/path (default: genbench.endpoint)");
  gen->add_option("--out", out, "generation results file")->required();
  gen->add_option("--predictions", gen_preds, "also write parsed answers as predictions");

  auto* eval = cli.add_subcommand("evaluate", "score predictions against the corpus");
  eval->add_option("--predictions", preds)->required()->check(CLI::ExistingFile);
  eval->add_option("--corpus", corpus_file)->required()->check(CLI::ExistingFile);
  auto* emb_opt = eval->add_option("--embedder", embedder, "embedder bundle (default: paths.embedder_bundle_dir)");
  eval->add_flag("--test-embedder", test_embedder, "deterministic hash embedder")->excludes(emb_opt);
  eval->add_option("--report", out, "report prefix")->required();
  eval->add_option("--model-name", model_name);

  auto* report = cli.add_subcommand("report", "render report summaries as a table");
  report->add_option("reports", reports, "<prefix>.json files")->required()->check(CLI::ExistingFile);
  report->add_option("--out", out, "write the table here too");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kExitFatal;
  }

  try {
    auto overrides = app::process_environment_overrides();
    if (jobs) overrides["global.jobs"] = std::to_string(*jobs);
    if (seed) overrides["global.seed"] = std::to_string(*seed);
    if (!log_level.empty()) overrides["global.log_level"] = log_level;
    const auto config = app::load_config(
        config_file.empty() ? std::nullopt : std::optional<fs::path>(config_file), overrides);
    log::set_level(config.log_level);

    if (*ingest) return app::cmd_ingest(config, in_dir, output_path(config, out), std::cout);
    if (*build) {
      return app::cmd_build_corpus(config, chunks, gold,
                                   annotations.empty() ? std::nullopt : std::optional<fs::path>(annotations),
                                   output_path(config, out), std::cout);
    }
    if (*split) return app::cmd_split(config, corpus_file, output_path(config, out), std::cout);
    if (*extract) {
      return app::cmd_extract(config, corpus_file, splits, split_name, bundle,
                              output_path(config, out), std::cout);
    }
    if (*gen) {
      app::GenbenchRun run{corpus_file, splits, split_name, endpoint, output_path(config, out),
                           std::nullopt};
      if (!gen_preds.empty()) run.predictions_file = output_path(config, gen_preds);
      return app::cmd_genbench(config, run, std::cout);
    }
    if (*eval) {
      app::EvaluateRun run{preds, corpus_file, embedder, test_embedder, output_path(config, out), model_name};
      return app::cmd_evaluate(config, run, std::cout);
    }
    if (*report) {
      return app::cmd_report(reports, out.empty() ? std::nullopt : std::optional<fs::path>(output_path(config, out)),
                             std::cout);
    }
  } catch (const Error& e) {
    log::error("command.failed", {{"code", std::string(error_code_name(e.code()))}, {"message", e.detail()}});
    std::cerr << e.what() << "\n";
    return app::kExitFatal;
  } catch (const std::exception& e) {
    log::error("command.failed", {{"message", e.what()}});
    std::cerr << e.what() << "\n";
    return app::kExitFatal;
  }
  return app::kExitFatal;
}
