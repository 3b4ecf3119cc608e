#include "pathex/metrics/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>

#include "pathex/metrics/answer.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"

namespace pathex::metrics {

MetricsReport aggregate(const std::vector<ExampleScore>& scores, const std::string& model_name) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "no example scores to aggregate");
  MetricsReport r;
  r.model_name = model_name;
  r.n_examples = scores.size();
  double exact = 0.0, f1 = 0.0, bert = 0.0;
  for (const auto& s : scores) {
    exact += s.exact;
    f1 += s.token_f1;
    bert += s.bert_f;
  }
  const double n = static_cast<double>(scores.size());
  r.exact_match_pct = 100.0 * exact / n;
  r.macro_f1 = f1 / n;
  r.f1_bert = bert / n;
  r.per_class_macro_f1 = per_class_macro_f1(scores);
  r.per_example = scores;
  return r;
}

std::optional<double> per_class_macro_f1(const std::vector<ExampleScore>& scores) {
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts> classes;
  bool any_gold = false;
  for (const auto& s : scores) {
    if (s.gold_node) any_gold = true;
    const bool hit = s.gold_node && s.pred_node && *s.gold_node == *s.pred_node;
    if (hit) {
      ++classes[*s.gold_node].tp;
      continue;
    }
    if (s.gold_node) ++classes[*s.gold_node].fn;
    if (s.pred_node) ++classes[*s.pred_node].fp;
  }
  if (!any_gold) return std::nullopt;
  double sum = 0.0;
  for (const auto& [id, c] : classes) {
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    sum += denom > 0 ? 2.0 * static_cast<double>(c.tp) / denom : 0.0;
  }
  return sum / static_cast<double>(classes.size());
}

std::vector<ExampleScore> score_predictions(const std::vector<qa::Prediction>& predictions,
                                            const std::vector<corpus::CorpusRecord>& corpus,
                                            EmbeddingBackend& embedder,
                                            const EvalOptions& options) {
  std::unordered_map<std::string, const corpus::CorpusRecord*> by_id;
  for (const auto& r : corpus) by_id[r.id] = &r;

  // Embeddings cached per distinct text; nullopt marks texts with no tokens.
  std::map<std::string, std::optional<EmbeddedText>> cache;
  auto embedded = [&](const std::string& text) -> const std::optional<EmbeddedText>& {
    auto it = cache.find(text);
    if (it != cache.end()) return it->second;
    std::optional<EmbeddedText> e;
    try {
      e = embed(text, embedder);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kEmptySequence) throw;
    }
    return cache.emplace(text, std::move(e)).first->second;
  };

  struct Item {
    const qa::Prediction* pred;
    const corpus::CorpusRecord* record;
    std::vector<std::string> golds;
  };
  std::vector<Item> items;
  items.reserve(predictions.size());
  for (const auto& p : predictions) {
    auto it = by_id.find(p.record_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kDanglingPrediction,
                  "prediction for unknown record '" + p.record_id + "'");
    }
    items.push_back({&p, it->second, it->second->gold_answers(p.kind)});
  }

  IdfTable idf;
  if (options.idf) {
    std::vector<std::vector<std::string>> docs;
    for (const auto& item : items) {
      for (const auto& g : item.golds) {
        if (const auto& e = embedded(g)) docs.push_back(e->tokens);
      }
    }
    idf = IdfTable(docs);
  }

  std::vector<ExampleScore> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    const auto& p = *item.pred;
    ExampleScore s;
    s.record_id = p.record_id;
    s.kind = p.kind;
    s.exact = exact_match(p.text, item.golds);
    s.token_f1 = token_f1(p.text, item.golds);

    const auto& pe = embedded(p.text);
    BertScore best{0.0, 0.0, -1.0};
    for (const auto& g : item.golds) {
      const auto& ge = embedded(g);
      BertScore b;
      if (!pe || !ge) {
        const double v = (!pe && !ge) ? 1.0 : 0.0;
        b = {v, v, v};
      } else if (options.idf) {
        TokenWeights w{idf.weights(pe->tokens), idf.weights(ge->tokens)};
        b = bertscore(pe->vectors, ge->vectors, &w);
      } else {
        b = bertscore(pe->vectors, ge->vectors);
      }
      if (options.baseline) b = rescale(b, *options.baseline);
      if (b.f1 > best.f1) best = b;
    }
    s.bert_p = best.precision;
    s.bert_r = best.recall;
    s.bert_f = best.f1;

    if (options.ontology) {
      if (const auto* n = corpus::map_to_ontology(p.text, *options.ontology)) s.pred_node = n->id;
      if (const auto* n = corpus::map_to_ontology(item.record->label(p.kind), *options.ontology)) {
        s.gold_node = n->id;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::vector<std::string> row_cells(const MetricsReport& r) {
  return {r.model_name, fmt("%.2f%%", r.exact_match_pct), fmt("%.2f", r.macro_f1),
          fmt("%.2f", r.f1_bert)};
}

}  // namespace

std::string render_row(const MetricsReport& report) {
  const auto cells = row_cells(report);
  return cells[0] + " | " + cells[1] + " | " + cells[2] + " | " + cells[3];
}

std::string render_table(const std::vector<MetricsReport>& reports) {
  std::vector<std::vector<std::string>> rows{
      {"Language Models", "Exact match", "Macro-Averaged F1", "F1_BERT"}};
  for (const auto& r : reports) rows.push_back(row_cells(r));
  std::vector<std::size_t> width(4, 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (c) out += " | ";
      out += row[c];
      if (c < 3) out.append(width[c] - row[c].size(), ' ');
    }
    out += '\n';
  };
  emit(rows[0]);
  for (std::size_t c = 0; c < 4; ++c) {
    if (c) out += "-+-";
    out.append(width[c], '-');
  }
  out += '\n';
  for (std::size_t i = 1; i < rows.size(); ++i) emit(rows[i]);
  return out;
}

void write_report(const std::filesystem::path& prefix, const MetricsReport& report) {
  Json summary;
  summary["model_name"] = report.model_name;
  summary["exact_match_pct"] = report.exact_match_pct;
  summary["macro_f1"] = report.macro_f1;
  summary["f1_bert"] = report.f1_bert;
  summary["n_examples"] = report.n_examples;
  if (report.per_class_macro_f1) summary["per_class_macro_f1"] = *report.per_class_macro_f1;
  write_text_file(prefix.string() + ".json", summary.dump(2) + "\n");

  std::vector<Json> rows;
  rows.reserve(report.per_example.size());
  for (const auto& s : report.per_example) {
    Json j;
    j["record_id"] = s.record_id;
    j["question_kind"] = corpus::question_kind_name(s.kind);
    j["exact"] = s.exact;
    j["token_f1"] = s.token_f1;
    j["bert_p"] = s.bert_p;
    j["bert_r"] = s.bert_r;
    j["bert_f"] = s.bert_f;
    j["pred_node"] = s.pred_node ? Json(*s.pred_node) : Json(nullptr);
    j["gold_node"] = s.gold_node ? Json(*s.gold_node) : Json(nullptr);
    rows.push_back(std::move(j));
  }
  write_jsonl(prefix.string() + ".examples.jsonl", rows);

  std::string table = render_table({report});
  if (report.per_class_macro_f1) {
    table += fmt("Per-class macro F1 (ontology-mapped): %.4f\n", *report.per_class_macro_f1);
  }
  write_text_file(prefix.string() + ".txt", table);
}

MetricsReport read_report(const std::filesystem::path& json_path) {
  try {
    const Json j = Json::parse(read_text_file(json_path));
    MetricsReport r;
    r.model_name = require_field<std::string>(j, "model_name");
    r.exact_match_pct = require_field<double>(j, "exact_match_pct");
    r.macro_f1 = require_field<double>(j, "macro_f1");
    r.f1_bert = require_field<double>(j, "f1_bert");
    r.n_examples = require_field<std::size_t>(j, "n_examples");
    if (auto it = j.find("per_class_macro_f1"); it != j.end() && !it->is_null()) {
      r.per_class_macro_f1 = it->get<double>();
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, json_path.string() + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw Error(ErrorCode::kMalformedRecord, json_path.string() + ": " + e.what());
  }
}

}  // namespace pathex::metrics
