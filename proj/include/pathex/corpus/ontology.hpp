#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pathex::corpus {

enum class Level { kBroad, kSubtype };
const char* level_name(Level level);
Level parse_level(std::string_view name);

struct OntologyNode {
  std::string id;
  std::string name;
  Level level = Level::kBroad;
  std::optional<std::string> parent_id;

  bool operator==(const OntologyNode&) const = default;
};

// Lower-case + collapsed whitespace.
std::string normalize_name(std::string_view name);
// normalize_name with ASCII punctuation removed; the ontology lookup key.
std::string lookup_key(std::string_view text);

// Two-level cancer vocabulary: broad types and their histologic subtypes.
// Immutable once built.
class Ontology {
 public:
  Ontology() = default;
  // Validates: subtype parents must name a broad node (ORPHAN_SUBTYPE);
  // broad nodes carry no parent; ids unique; names unique within a level by
  // lookup key (DUPLICATE_NAME).
  explicit Ontology(std::vector<OntologyNode> nodes);

  const std::vector<OntologyNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  const OntologyNode* find_id(std::string_view id) const;
  // Exact lookup by lookup_key within one level.
  const OntologyNode* find_name(std::string_view name, Level level) const;
  const OntologyNode* parent_of(const OntologyNode& node) const;
  std::vector<const OntologyNode*> children_of(std::string_view broad_id) const;

 private:
  std::vector<OntologyNode> nodes_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> broad_by_key_;
  std::unordered_map<std::string, std::size_t> subtype_by_key_;
};

// Line-delimited {id, name, level, parent_id?}.
Ontology load_ontology(const std::filesystem::path& path);
void save_ontology(const std::filesystem::path& path, const Ontology& ontology);

// Maps a free-text answer to the most specific node whose name matches it
// under lookup_key; nullptr when nothing matches.
const OntologyNode* map_to_ontology(std::string_view answer, const Ontology& ontology);

}  // namespace pathex::corpus
