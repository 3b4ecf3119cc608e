#include "pathex/app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <unordered_map>

#include "pathex/corpus/corpus.hpp"
#include "pathex/corpus/ontology.hpp"
#include "pathex/corpus/split.hpp"
#include "pathex/ingest/io.hpp"
#include "pathex/metrics/report.hpp"
#include "pathex/qa/backend.hpp"
#include "pathex/qa/bundle.hpp"
#include "pathex/qa/extract.hpp"
#include "pathex/qa/graph_backend.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/log.hpp"
#include "pathex/util/parallel.hpp"

namespace pathex::app {
namespace fs = std::filesystem;
namespace {

constexpr std::size_t kProgressEvery = 100;

std::string describe(const std::exception& e) {
  if (const auto* pe = dynamic_cast<const Error*>(&e)) {
    return std::string(error_code_name(pe->code())) + ": " + pe->detail();
  }
  return e.what();
}

ingest::Lexicon load_lexicon(const PipelineConfig& config) {
  ingest::Lexicon lexicon;
  if (!config.ingest.lexicon_path.empty()) lexicon = ingest::Lexicon::load(config.ingest.lexicon_path);
  // Ontology names are always spelled right.
  if (!config.paths.ontology_path.empty()) {
    for (const auto& node : corpus::load_ontology(config.paths.ontology_path).nodes()) {
      lexicon.add_tokens(node.name);
    }
  }
  return lexicon;
}

// Records of `split_name`, in corpus order. Split entries without a corpus
// record mean the two files do not belong together.
std::vector<corpus::CorpusRecord> select_split(const std::vector<corpus::CorpusRecord>& records,
                                               const fs::path& split_file,
                                               const std::string& split_name) {
  const corpus::Split wanted = corpus::parse_split(split_name);
  std::unordered_map<std::string, corpus::Split> by_id;
  for (const auto& a : corpus::read_splits(split_file)) by_id.emplace(a.record_id, a.split);
  std::set<std::string> known;
  for (const auto& r : records) known.insert(r.id);
  for (const auto& [id, s] : by_id) {
    if (!known.count(id)) {
      throw Error(ErrorCode::kMalformedRecord,
                  split_file.string() + ": record '" + id + "' is not in the corpus");
    }
  }
  std::vector<corpus::CorpusRecord> out;
  for (const auto& r : records) {
    auto it = by_id.find(r.id);
    if (it != by_id.end() && it->second == wanted) out.push_back(r);
  }
  return out;
}

void sort_by_id(std::vector<corpus::CorpusRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
}

}  // namespace

int cmd_ingest(const PipelineConfig& config, const fs::path& input_dir, const fs::path& out_file,
               std::ostream& out) {
  if (!fs::is_directory(input_dir)) {
    throw Error(ErrorCode::kIoError, input_dir.string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  const ingest::Lexicon lexicon = load_lexicon(config);

  std::vector<std::vector<ingest::Chunk>> per_doc(files.size());
  std::vector<std::string> errors(files.size());
  parallel_for(files.size(), config.effective_jobs(), [&](std::size_t, std::size_t i) {
    try {
      const auto pages = ingest::read_word_boxes(files[i]);
      per_doc[i] = ingest::chunk_document(pages, lexicon, config.ingest.layout,
                                          files[i].stem().string());
    } catch (const std::exception& e) {
      errors[i] = describe(e);
    }
  });

  std::vector<ingest::Chunk> chunks;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!errors[i].empty()) {
      ++failed;
      log::error("ingest.document_failed", {{"file", files[i].string()}, {"error", errors[i]}});
      continue;
    }
    for (auto& c : per_doc[i]) chunks.push_back(std::move(c));
  }
  ingest::write_chunks(out_file, chunks);
  log::info("ingest.done", {{"documents", files.size()}, {"failed", failed}, {"chunks", chunks.size()}});
  out << "documents " << files.size() << ", failed " << failed << ", chunks " << chunks.size() << "\n";
  return failed == 0 ? kExitOk : kExitRecordFailures;
}

int cmd_build_corpus(const PipelineConfig& config, const fs::path& chunks_file,
                     const fs::path& gold_file, const std::optional<fs::path>& annotations_file,
                     const fs::path& out_file, std::ostream& out) {
  const auto chunks = ingest::read_chunks(chunks_file);
  auto records = corpus::build_corpus(chunks, corpus::read_gold(gold_file));
  if (annotations_file) corpus::apply_annotations(records, corpus::read_annotations(*annotations_file));
  for (const auto& r : records) corpus::validate_record(r);

  if (!config.paths.ontology_path.empty()) {
    const auto ontology = corpus::load_ontology(config.paths.ontology_path);
    std::size_t unmapped = 0;
    for (const auto& r : records) {
      for (const auto* label : {&r.broad_label, &r.subtype_label}) {
        if (!label->empty() && corpus::map_to_ontology(*label, ontology) == nullptr) ++unmapped;
      }
    }
    if (unmapped > 0) log::warn("corpus.labels_outside_ontology", {{"labels", unmapped}});
  }

  std::size_t manual = 0, missing_spans = 0;
  for (const auto& r : records) {
    if (r.label_source == corpus::LabelSource::kManual) ++manual;
    if (!r.broad_span || !r.subtype_span) ++missing_spans;
  }
  sort_by_id(records);
  corpus::write_corpus(out_file, records);
  log::info("corpus.done", {{"records", records.size()}, {"manual", manual}, {"missing_spans", missing_spans}});
  out << "records " << records.size() << ", manual " << manual << ", without span "
      << missing_spans << "\n";
  return kExitOk;
}

int cmd_split(const PipelineConfig& config, const fs::path& corpus_file, const fs::path& out_file,
              std::ostream& out) {
  const auto records = corpus::read_corpus(corpus_file);
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, corpus_file.string() + " has no records");
  const auto assignments = corpus::split_dataset(records, config.seed, config.corpus);
  const auto sizes = corpus::count_splits(assignments);
  corpus::write_splits(out_file, assignments);
  log::info("split.done", {{"seed", config.seed}, {"train", sizes.train},
                           {"validation", sizes.validation}, {"test", sizes.test}});
  out << "train " << sizes.train << ", validation " << sizes.validation << ", test " << sizes.test
      << "\n";
  return kExitOk;
}

int cmd_extract(const PipelineConfig& config, const fs::path& corpus_file,
                const fs::path& split_file, const std::string& split_name,
                const fs::path& bundle_dir, const fs::path& out_file, std::ostream& out) {
  corpus::parse_split(split_name);
  const fs::path dir = bundle_dir.empty() ? config.paths.model_bundle_dir : bundle_dir;
  if (dir.empty()) throw Error(ErrorCode::kConfigInvalid, "no QA bundle given (paths.model_bundle_dir)");

  // Everything that can make the bundle unusable happens before inference.
  const qa::ModelBundle bundle = qa::load_bundle(dir);
  std::shared_ptr<const qa::BpeTokenizer> tokenizer;
  try {
    tokenizer = std::make_shared<const qa::BpeTokenizer>(qa::BpeTokenizer::load(bundle.tokenizer_spec_path));
  } catch (const Error& e) {
    throw Error(ErrorCode::kBundleInvalid, e.detail());
  }
  const auto records = select_split(corpus::read_corpus(corpus_file), split_file, split_name);
  const std::size_t jobs = std::max<std::size_t>(1, std::min(config.effective_jobs(), records.size()));
  std::vector<std::unique_ptr<qa::EncoderBackend>> backends;
  if (bundle.kind == qa::BundleKind::kQa && bundle.backend == "onnx") {
    const auto session = qa::load_session(bundle);
    for (std::size_t w = 0; w < jobs; ++w) backends.push_back(std::make_unique<qa::GraphQaBackend>(session));
  } else {
    for (std::size_t w = 0; w < jobs; ++w) backends.push_back(qa::make_backend(bundle, tokenizer));
  }

  qa::QaConfig qc;
  qc.max_seq_len = config.qa.max_seq_len.value_or(bundle.max_seq_len);
  qc.stride = config.qa.stride.value_or(bundle.stride.value_or(qc.max_seq_len / 3));
  qc.max_answer_tokens = config.qa.max_answer_tokens;
  qc.n_best = config.qa.n_best;
  log::info("extract.start", {{"split", split_name}, {"records", records.size()}, {"bundle", dir.string()},
                              {"max_seq_len", qc.max_seq_len}, {"stride", qc.stride}, {"jobs", jobs}});

  std::vector<std::optional<qa::Extraction>> results(records.size());
  std::vector<std::string> errors(records.size());
  std::atomic<std::size_t> done{0};
  parallel_for(records.size(), jobs, [&](std::size_t worker, std::size_t i) {
    try {
      results[i] = qa::extract(records[i], *backends[worker], *tokenizer, qc);
    } catch (const std::exception& e) {
      errors[i] = describe(e);
    }
    const std::size_t n = ++done;
    if (n % kProgressEvery == 0 || n == records.size()) {
      log::info("extract.progress", {{"done", n}, {"total", records.size()}});
    }
  });

  std::vector<qa::Prediction> predictions;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!results[i]) {
      ++failed;
      log::error("extract.record_failed", {{"record_id", records[i].id}, {"error", errors[i]}});
      continue;
    }
    for (auto kind : {corpus::QuestionKind::kBroad, corpus::QuestionKind::kSubtype}) {
      predictions.push_back(qa::to_prediction(records[i].id, kind, results[i]->get(kind)));
    }
  }
  qa::write_predictions(out_file, predictions);
  out << "records " << records.size() << ", failed " << failed << ", predictions "
      << predictions.size() << "\n";
  return failed == 0 ? kExitOk : kExitRecordFailures;
}

int cmd_genbench(const PipelineConfig& config, const GenbenchRun& run, std::ostream& out,
                 const genbench::ClientFactory& make_client) {
  corpus::parse_split(run.split_name);
  if (config.genbench.template_path.empty()) {
    throw Error(ErrorCode::kConfigInvalid, "genbench.template_path is not set");
  }
  const auto tmpl = genbench::load_template(config.genbench.template_path);
  const std::string endpoint = run.endpoint.empty() ? config.genbench.endpoint : run.endpoint;
  genbench::ClientFactory factory = make_client;
  if (!factory) {
    if (endpoint.empty()) throw Error(ErrorCode::kConfigInvalid, "no generation endpoint given");
    // Validates the URL before any record is sent.
    genbench::HttpTransport probe(endpoint, std::chrono::milliseconds(config.genbench.timeout_ms));
    const auto timeout = std::chrono::milliseconds(config.genbench.timeout_ms);
    const auto retry = config.genbench.retry;
    factory = [endpoint, timeout, retry] {
      return std::make_unique<genbench::GenerationClient>(
          std::make_unique<genbench::HttpTransport>(endpoint, timeout), retry);
    };
  }
  const auto all = corpus::read_corpus(run.corpus_file);
  const auto records = select_split(all, run.split_file, run.split_name);
  log::info("genbench.start", {{"split", run.split_name}, {"records", records.size()},
                               {"endpoint", endpoint}, {"max_in_flight", config.genbench.max_in_flight}});

  const auto results = genbench::run_benchmark(records, tmpl, config.genbench.params, factory,
                                               config.genbench.max_in_flight);
  genbench::write_results(run.out_file, results);
  if (run.predictions_file) {
    qa::write_predictions(*run.predictions_file, genbench::to_predictions(results, records));
  }

  std::size_t failed = 0, duplicates = 0;
  for (const auto& r : results) {
    if (r.error) {
      ++failed;
      log::error("genbench.record_failed", {{"record_id", r.record_id}, {"error", *r.error}});
    }
    if (r.duplicate_answer_flag) ++duplicates;
  }
  const std::size_t answered = results.size() - failed;
  const double rate = answered == 0 ? 0.0 : static_cast<double>(duplicates) / static_cast<double>(answered);
  log::info("genbench.done", {{"records", results.size()}, {"failed", failed},
                              {"duplicate_answer_rate", rate}});
  out << "records " << results.size() << ", failed " << failed << ", duplicate_answer_rate "
      << std::fixed << std::setprecision(4) << rate << std::defaultfloat << "\n";
  return failed == 0 ? kExitOk : kExitRecordFailures;
}

int cmd_evaluate(const PipelineConfig& config, const EvaluateRun& run, std::ostream& out) {
  std::unique_ptr<metrics::EmbeddingBackend> embedder;
  if (run.test_embedder) {
    embedder = std::make_unique<metrics::HashEmbedder>();
  } else {
    const fs::path dir = run.embedder_dir.empty() ? config.paths.embedder_bundle_dir : run.embedder_dir;
    if (dir.empty()) {
      throw Error(ErrorCode::kConfigInvalid, "no embedder bundle given (paths.embedder_bundle_dir)");
    }
    embedder = qa::make_embedder(qa::load_bundle(dir));
  }
  std::optional<corpus::Ontology> ontology;
  if (!config.paths.ontology_path.empty()) ontology = corpus::load_ontology(config.paths.ontology_path);

  const auto predictions = qa::read_predictions(run.predictions_file);
  const auto records = corpus::read_corpus(run.corpus_file);
  metrics::EvalOptions options;
  options.idf = config.metrics.idf;
  options.baseline = config.metrics.baseline;
  options.ontology = ontology ? &*ontology : nullptr;
  const auto scores = metrics::score_predictions(predictions, records, *embedder, options);

  std::string name = run.model_name.empty() ? config.metrics.model_name : run.model_name;
  if (name.empty()) name = run.predictions_file.stem().string();
  const auto report = metrics::aggregate(scores, name);
  if (!run.report_prefix.empty()) metrics::write_report(run.report_prefix, report);
  log::info("evaluate.done", {{"examples", report.n_examples}, {"exact_match_pct", report.exact_match_pct},
                              {"macro_f1", report.macro_f1}, {"f1_bert", report.f1_bert}});
  out << metrics::render_table({report});
  return kExitOk;
}

int cmd_report(const std::vector<fs::path>& reports, const std::optional<fs::path>& out_file,
               std::ostream& out) {
  if (reports.empty()) throw Error(ErrorCode::kEmptyInput, "no reports given");
  std::vector<metrics::MetricsReport> loaded;
  for (const auto& p : reports) loaded.push_back(metrics::read_report(p));
  const std::string table = metrics::render_table(loaded);
  if (out_file) write_text_file(*out_file, table);
  out << table;
  return kExitOk;
}

}  // namespace pathex::app
