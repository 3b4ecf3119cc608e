#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "pathex/corpus/corpus.hpp"
#include "pathex/qa/extract.hpp"

namespace fixtures {

struct Label {
  const char* broad;
  const char* subtype;
};

inline const std::vector<Label>& labels() {
  static const std::vector<Label> v = {
      {"prostate cancer", "prostate adenocarcinoma"},     {"lung cancer", "small cell carcinoma"},
      {"colorectal cancer", "colon adenocarcinoma"},      {"breast cancer", "invasive ductal carcinoma"},
      {"lymphoma", "diffuse large B-cell lymphoma"},      {"skin cancer", "melanoma"},
      {"kidney cancer", "clear cell renal cell carcinoma"}, {"bladder cancer", "urothelial carcinoma"},
  };
  return v;
}

// n exact-match records "syn-000".."syn-(n-1)"; both labels appear verbatim
// in the context.
inline std::vector<pathex::corpus::CorpusRecord> synthetic_records(std::size_t n) {
  std::vector<pathex::corpus::CorpusRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = labels()[i % labels().size()];
    char id[32];
    std::snprintf(id, sizeof id, "syn-%03zu", i);
    pathex::corpus::CorpusRecord r;
    r.id = id;
    r.context = "Specimen " + std::to_string(i) + ". Sections show " + l.subtype + ". Findings are diagnostic of " +
                l.broad + ". Margins are negative.";
    r.broad_label = l.broad;
    r.subtype_label = l.subtype;
    r.broad_span = pathex::corpus::localize_label(r.context, r.broad_label);
    r.subtype_span = pathex::corpus::localize_label(r.context, r.subtype_label);
    r.label_source = pathex::corpus::LabelSource::kExactMatch;
    out.push_back(std::move(r));
  }
  return out;
}

// The gold answer for every record and question, as predictions.
inline std::vector<pathex::qa::Prediction> gold_predictions(const std::vector<pathex::corpus::CorpusRecord>& records) {
  std::vector<pathex::qa::Prediction> out;
  for (const auto& r : records) {
    for (auto kind : {pathex::corpus::QuestionKind::kBroad, pathex::corpus::QuestionKind::kSubtype}) {
      const auto span = *r.span(kind);
      out.push_back({r.id, kind, r.context.substr(span.start, span.length()), span, 0.0});
    }
  }
  return out;
}

}  // namespace fixtures
