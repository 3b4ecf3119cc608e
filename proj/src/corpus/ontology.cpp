#include "pathex/corpus/ontology.hpp"

#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"
#include "pathex/util/text.hpp"

namespace pathex::corpus {

const char* level_name(Level level) { return level == Level::kBroad ? "broad" : "subtype"; }

Level parse_level(std::string_view name) {
  if (name == "broad") return Level::kBroad;
  if (name == "subtype") return Level::kSubtype;
  throw Error(ErrorCode::kMalformedRecord, "unknown ontology level '" + std::string(name) + "'");
}

std::string normalize_name(std::string_view name) {
  return text::to_lower(text::collapse_whitespace(name));
}

std::string lookup_key(std::string_view s) {
  std::string stripped;
  stripped.reserve(s.size());
  for (char c : s) {
    if (!text::is_punct(c)) stripped.push_back(c);
  }
  return normalize_name(stripped);
}

Ontology::Ontology(std::vector<OntologyNode> nodes) : nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.id.empty() || text::trim(n.name).empty()) {
      throw Error(ErrorCode::kMalformedRecord, "ontology node with empty id or name");
    }
    if (!by_id_.emplace(n.id, i).second) {
      throw Error(ErrorCode::kDuplicateName, "duplicate ontology id '" + n.id + "'");
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.level == Level::kBroad && n.parent_id) {
      throw Error(ErrorCode::kMalformedRecord, "broad node '" + n.id + "' has a parent");
    }
    if (n.level == Level::kSubtype) {
      const OntologyNode* parent = n.parent_id ? find_id(*n.parent_id) : nullptr;
      if (!parent || parent->level != Level::kBroad) {
        throw Error(ErrorCode::kOrphanSubtype,
                    "subtype '" + n.id + "' has no valid broad parent" +
                        (n.parent_id ? " ('" + *n.parent_id + "')" : std::string()));
      }
    }
    auto& index = n.level == Level::kBroad ? broad_by_key_ : subtype_by_key_;
    const std::string key = lookup_key(n.name);
    auto [it, inserted] = index.emplace(key, i);
    if (!inserted) {
      throw Error(ErrorCode::kDuplicateName, "'" + n.name + "' collides with '" +
                                                 nodes_[it->second].name + "' at level " +
                                                 level_name(n.level));
    }
  }
}

const OntologyNode* Ontology::find_id(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &nodes_[it->second];
}

const OntologyNode* Ontology::find_name(std::string_view name, Level level) const {
  const auto& index = level == Level::kBroad ? broad_by_key_ : subtype_by_key_;
  auto it = index.find(lookup_key(name));
  return it == index.end() ? nullptr : &nodes_[it->second];
}

const OntologyNode* Ontology::parent_of(const OntologyNode& node) const {
  return node.parent_id ? find_id(*node.parent_id) : nullptr;
}

std::vector<const OntologyNode*> Ontology::children_of(std::string_view broad_id) const {
  std::vector<const OntologyNode*> out;
  for (const auto& n : nodes_) {
    if (n.parent_id && *n.parent_id == broad_id) out.push_back(&n);
  }
  return out;
}

Ontology load_ontology(const std::filesystem::path& path) {
  std::vector<OntologyNode> nodes;
  read_jsonl(path, [&](std::size_t, const Json& r) {
    OntologyNode n;
    n.id = require_field<std::string>(r, "id");
    n.name = require_field<std::string>(r, "name");
    n.level = parse_level(require_field<std::string>(r, "level"));
    if (auto it = r.find("parent_id"); it != r.end() && !it->is_null()) {
      n.parent_id = it->get<std::string>();
    }
    nodes.push_back(std::move(n));
  });
  return Ontology(std::move(nodes));
}

void save_ontology(const std::filesystem::path& path, const Ontology& ontology) {
  std::vector<Json> records;
  for (const auto& n : ontology.nodes()) {
    Json j;
    j["id"] = n.id;
    j["name"] = n.name;
    j["level"] = level_name(n.level);
    if (n.parent_id) j["parent_id"] = *n.parent_id;
    records.push_back(std::move(j));
  }
  write_jsonl(path, records);
}

const OntologyNode* map_to_ontology(std::string_view answer, const Ontology& ontology) {
  if (lookup_key(answer).empty()) return nullptr;
  if (const auto* node = ontology.find_name(answer, Level::kSubtype)) return node;
  return ontology.find_name(answer, Level::kBroad);
}

}  // namespace pathex::corpus
