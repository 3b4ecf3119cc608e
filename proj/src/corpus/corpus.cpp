#include "pathex/corpus/corpus.hpp"

#include <unordered_map>

#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"
#include "pathex/util/text.hpp"

namespace pathex::corpus {

const char* question_kind_name(QuestionKind kind) {
  return kind == QuestionKind::kBroad ? "broad" : "subtype";
}

QuestionKind parse_question_kind(std::string_view name) {
  if (name == "broad") return QuestionKind::kBroad;
  if (name == "subtype") return QuestionKind::kSubtype;
  throw Error(ErrorCode::kMalformedRecord, "unknown question kind '" + std::string(name) + "'");
}

const char* label_source_name(LabelSource source) {
  return source == LabelSource::kExactMatch ? "exact_match" : "manual";
}

std::vector<std::string> CorpusRecord::gold_answers(QuestionKind kind) const {
  std::vector<std::string> golds{label(kind)};
  if (const auto& s = span(kind); s && s->end <= context.size()) {
    std::string surface = context.substr(s->start, s->length());
    if (surface != golds.front()) golds.push_back(std::move(surface));
  }
  return golds;
}

std::optional<CharSpan> localize_label(std::string_view context, std::string_view label) {
  const std::string needle = text::to_lower(text::collapse_whitespace(label));
  if (needle.empty()) return std::nullopt;

  std::string haystack;
  std::vector<std::size_t> origin;
  haystack.reserve(context.size());
  origin.reserve(context.size());
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (text::is_space(context[i])) {
      if (!haystack.empty() && haystack.back() == ' ') continue;
      haystack.push_back(' ');
    } else {
      haystack.push_back(text::to_lower(context[i]));
    }
    origin.push_back(i);
  }
  const std::size_t pos = haystack.find(needle);
  if (pos == std::string::npos) return std::nullopt;
  return CharSpan{origin[pos], origin[pos + needle.size() - 1] + 1};
}

std::vector<CorpusRecord> build_corpus(const std::vector<ingest::Chunk>& chunks,
                                       const std::vector<GoldEntry>& gold) {
  std::unordered_map<std::string, const GoldEntry*> by_id;
  for (const auto& g : gold) by_id[g.chunk_id] = &g;

  std::vector<CorpusRecord> records;
  records.reserve(chunks.size());
  for (const auto& chunk : chunks) {
    auto it = by_id.find(chunk.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kMissingGold, "no gold entry for chunk '" + chunk.id + "'");
    }
    const GoldEntry& g = *it->second;
    CorpusRecord r;
    r.id = chunk.id;
    r.context = chunk.text;
    r.broad_label = g.broad_label;
    r.subtype_label = g.subtype_label;
    r.icdo = g.icdo;
    r.broad_span = localize_label(r.context, r.broad_label);
    r.subtype_span = localize_label(r.context, r.subtype_label);
    r.label_source = (r.broad_span && r.subtype_span) ? LabelSource::kExactMatch
                                                       : LabelSource::kManual;
    records.push_back(std::move(r));
  }
  return records;
}

void apply_annotations(std::vector<CorpusRecord>& records,
                       const std::vector<Annotation>& annotations) {
  std::unordered_map<std::string, CorpusRecord*> by_id;
  for (auto& r : records) by_id[r.id] = &r;
  for (const auto& a : annotations) {
    auto it = by_id.find(a.record_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kMissingGold, "annotation for unknown record '" + a.record_id + "'");
    }
    CorpusRecord& r = *it->second;
    if (a.span.start >= a.span.end || a.span.end > r.context.size()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "annotation span outside context of '" + a.record_id + "'");
    }
    r.span(a.kind) = a.span;
  }
}

void validate_record(const CorpusRecord& r) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kMalformedRecord, "record '" + r.id + "': " + why);
  };
  if (r.id.empty()) fail("empty id");
  if (r.context.empty()) fail("empty context");
  for (auto kind : {QuestionKind::kBroad, QuestionKind::kSubtype}) {
    const auto& s = r.span(kind);
    if (s && (s->start >= s->end || s->end > r.context.size())) {
      fail(std::string(question_kind_name(kind)) + " span outside context");
    }
    if (r.label_source == LabelSource::kExactMatch) {
      if (!s) fail(std::string("exact_match record lacks ") + question_kind_name(kind) + " span");
      const auto surface = text::to_lower(
          text::collapse_whitespace(std::string_view(r.context).substr(s->start, s->length())));
      if (surface != text::to_lower(text::collapse_whitespace(r.label(kind)))) {
        fail(std::string(question_kind_name(kind)) + " span text does not match label");
      }
    }
  }
}

namespace {

std::optional<CharSpan> span_from_json(const Json& r, const char* key) {
  auto it = r.find(key);
  if (it == r.end() || it->is_null()) return std::nullopt;
  if (!it->is_array() || it->size() != 2) {
    throw std::out_of_range(std::string("field '") + key + "' must be [start, end]");
  }
  return CharSpan{(*it)[0].get<std::size_t>(), (*it)[1].get<std::size_t>()};
}

Json span_to_json(const std::optional<CharSpan>& s) {
  if (!s) return nullptr;
  return Json::array({s->start, s->end});
}

std::optional<IcdOTriplet> icdo_from_json(const Json& r) {
  auto it = r.find("icdo");
  if (it == r.end() || it->is_null()) return std::nullopt;
  IcdOTriplet t{require_field<std::string>(*it, "cancer_type_code"),
                require_field<std::string>(*it, "topography_code"),
                require_field<std::string>(*it, "morphology_code")};
  if (t.cancer_type_code.empty() || t.topography_code.empty() || t.morphology_code.empty()) {
    throw std::out_of_range("icdo codes must be non-empty");
  }
  return t;
}

Json icdo_to_json(const std::optional<IcdOTriplet>& t) {
  if (!t) return nullptr;
  Json j;
  j["cancer_type_code"] = t->cancer_type_code;
  j["topography_code"] = t->topography_code;
  j["morphology_code"] = t->morphology_code;
  return j;
}

}  // namespace

std::vector<GoldEntry> read_gold(const std::filesystem::path& path) {
  std::vector<GoldEntry> out;
  read_jsonl(path, [&](std::size_t, const Json& r) {
    out.push_back({require_field<std::string>(r, "chunk_id"),
                   require_field<std::string>(r, "broad_label"),
                   require_field<std::string>(r, "subtype_label"), icdo_from_json(r)});
  });
  return out;
}

std::vector<Annotation> read_annotations(const std::filesystem::path& path) {
  std::vector<Annotation> out;
  read_jsonl(path, [&](std::size_t, const Json& r) {
    out.push_back({require_field<std::string>(r, "record_id"),
                   parse_question_kind(require_field<std::string>(r, "question_kind")),
                   CharSpan{require_field<std::size_t>(r, "char_start"),
                            require_field<std::size_t>(r, "char_end")}});
  });
  return out;
}

std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path) {
  std::vector<CorpusRecord> out;
  read_jsonl(path, [&](std::size_t, const Json& r) {
    CorpusRecord rec;
    rec.id = require_field<std::string>(r, "id");
    rec.context = require_field<std::string>(r, "context");
    rec.broad_label = require_field<std::string>(r, "broad_label");
    rec.subtype_label = require_field<std::string>(r, "subtype_label");
    const auto source = require_field<std::string>(r, "label_source");
    if (source == "exact_match") {
      rec.label_source = LabelSource::kExactMatch;
    } else if (source == "manual") {
      rec.label_source = LabelSource::kManual;
    } else {
      throw std::out_of_range("unknown label_source '" + source + "'");
    }
    rec.broad_span = span_from_json(r, "broad_span");
    rec.subtype_span = span_from_json(r, "subtype_span");
    rec.icdo = icdo_from_json(r);
    validate_record(rec);
    out.push_back(std::move(rec));
  });
  return out;
}

void write_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records) {
  std::vector<Json> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    Json j;
    j["id"] = r.id;
    j["context"] = r.context;
    j["broad_label"] = r.broad_label;
    j["subtype_label"] = r.subtype_label;
    j["label_source"] = label_source_name(r.label_source);
    j["broad_span"] = span_to_json(r.broad_span);
    j["subtype_span"] = span_to_json(r.subtype_span);
    j["icdo"] = icdo_to_json(r.icdo);
    out.push_back(std::move(j));
  }
  write_jsonl(path, out);
}

}  // namespace pathex::corpus
