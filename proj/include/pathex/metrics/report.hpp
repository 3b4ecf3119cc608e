#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pathex/corpus/corpus.hpp"
#include "pathex/corpus/ontology.hpp"
#include "pathex/metrics/bertscore.hpp"
#include "pathex/qa/extract.hpp"

namespace pathex::metrics {

struct ExampleScore {
  std::string record_id;
  corpus::QuestionKind kind = corpus::QuestionKind::kBroad;
  int exact = 0;
  double token_f1 = 0.0;
  double bert_p = 0.0;
  double bert_r = 0.0;
  double bert_f = 0.0;
  // Ontology node ids of prediction and gold, when mapped.
  std::optional<std::string> pred_node;
  std::optional<std::string> gold_node;
};

struct MetricsReport {
  std::string model_name;
  double exact_match_pct = 0.0;
  double macro_f1 = 0.0;
  double f1_bert = 0.0;
  std::size_t n_examples = 0;
  // Macro F1 over ontology classes (one-vs-rest on mapped nodes); present
  // only when an ontology was supplied.
  std::optional<double> per_class_macro_f1;
  std::vector<ExampleScore> per_example;
};

// Unweighted means over examples. EMPTY_INPUT for no scores.
MetricsReport aggregate(const std::vector<ExampleScore>& scores, const std::string& model_name);

// Macro-averaged one-vs-rest F1 over the classes seen in gold or prediction.
// Unmapped predictions count as misses for their gold class. nullopt when no
// example has a mapped gold node.
std::optional<double> per_class_macro_f1(const std::vector<ExampleScore>& scores);

struct EvalOptions {
  bool idf = false;
  std::optional<BertScore> baseline;
  const corpus::Ontology* ontology = nullptr;
};

// Scores every prediction against its record's gold answers. Every
// prediction must name a corpus record (DANGLING_PREDICTION otherwise).
std::vector<ExampleScore> score_predictions(const std::vector<qa::Prediction>& predictions,
                                            const std::vector<corpus::CorpusRecord>& corpus,
                                            EmbeddingBackend& embedder,
                                            const EvalOptions& options = {});

// "Fine-tuned Roberta | 80.61% | 0.85 | 0.98"
std::string render_row(const MetricsReport& report);
// Fixed-width table, columns: Language Models, Exact match,
// Macro-Averaged F1, F1_BERT.
std::string render_table(const std::vector<MetricsReport>& reports);

// <prefix>.json, <prefix>.examples.jsonl, <prefix>.txt
void write_report(const std::filesystem::path& prefix, const MetricsReport& report);
// Reads the structured summary (per_example left empty).
MetricsReport read_report(const std::filesystem::path& json_path);

}  // namespace pathex::metrics
