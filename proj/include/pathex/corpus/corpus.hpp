#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathex/ingest/layout.hpp"

namespace pathex::corpus {

// Half-open byte range [start, end) into a UTF-8 context.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool operator==(const CharSpan&) const = default;
  auto operator<=>(const CharSpan&) const = default;
};

enum class QuestionKind { kBroad, kSubtype };
const char* question_kind_name(QuestionKind kind);
QuestionKind parse_question_kind(std::string_view name);

struct IcdOTriplet {
  std::string cancer_type_code;
  std::string topography_code;
  std::string morphology_code;

  bool operator==(const IcdOTriplet&) const = default;
};

enum class LabelSource { kExactMatch, kManual };
const char* label_source_name(LabelSource source);

struct CorpusRecord {
  std::string id;
  std::string context;
  std::string broad_label;
  std::string subtype_label;
  LabelSource label_source = LabelSource::kManual;
  std::optional<CharSpan> broad_span;
  std::optional<CharSpan> subtype_span;
  std::optional<IcdOTriplet> icdo;

  const std::string& label(QuestionKind kind) const {
    return kind == QuestionKind::kBroad ? broad_label : subtype_label;
  }
  const std::optional<CharSpan>& span(QuestionKind kind) const {
    return kind == QuestionKind::kBroad ? broad_span : subtype_span;
  }
  std::optional<CharSpan>& span(QuestionKind kind) {
    return kind == QuestionKind::kBroad ? broad_span : subtype_span;
  }
  // Label plus the annotated span text when it differs.
  std::vector<std::string> gold_answers(QuestionKind kind) const;
};

// Leftmost occurrence of `label` in `context`, comparing ASCII
// case-insensitively with whitespace runs collapsed on both sides.
std::optional<CharSpan> localize_label(std::string_view context, std::string_view label);

struct GoldEntry {
  std::string chunk_id;
  std::string broad_label;
  std::string subtype_label;
  std::optional<IcdOTriplet> icdo;
};

// One record per chunk. exact_match when both labels localize, manual
// otherwise (any span that did localize is kept). MISSING_GOLD when a chunk
// has no gold entry.
std::vector<CorpusRecord> build_corpus(const std::vector<ingest::Chunk>& chunks,
                                       const std::vector<GoldEntry>& gold);

struct Annotation {
  std::string record_id;
  QuestionKind kind = QuestionKind::kBroad;
  CharSpan span;
};

// Applies sidecar spans. Unknown record ids raise MISSING_GOLD; spans outside
// the context raise MALFORMED_RECORD.
void apply_annotations(std::vector<CorpusRecord>& records,
                       const std::vector<Annotation>& annotations);

// Checks the CorpusRecord invariants; throws MALFORMED_RECORD.
void validate_record(const CorpusRecord& record);

std::vector<GoldEntry> read_gold(const std::filesystem::path& path);
std::vector<Annotation> read_annotations(const std::filesystem::path& path);
std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records);

}  // namespace pathex::corpus
