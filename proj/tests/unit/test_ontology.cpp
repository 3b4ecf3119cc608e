#include "doctest.h"
#include "pathex/corpus/ontology.hpp"
#include "pathex/util/error.hpp"
#include "support.hpp"

using namespace pathex;
using namespace pathex::corpus;

namespace {

OntologyNode broad(std::string id, std::string name) { return {std::move(id), std::move(name), Level::kBroad, {}}; }
OntologyNode sub(std::string id, std::string name, std::string parent) {
  return {std::move(id), std::move(name), Level::kSubtype, std::move(parent)};
}

ErrorCode build_error(std::vector<OntologyNode> nodes) {
  try {
    Ontology o(std::move(nodes));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("parent links resolve") {
  const Ontology o({broad("B1", "colorectal cancer"), sub("S1", "colon adenocarcinoma", "B1")});
  REQUIRE(o.size() == 2);
  const auto* s = o.find_name("Colon  Adenocarcinoma", Level::kSubtype);
  REQUIRE(s != nullptr);
  CHECK(o.parent_of(*s)->name == "colorectal cancer");
  CHECK(o.children_of("B1").size() == 1);
  CHECK(o.find_id("S1") == s);
  CHECK(o.find_id("nope") == nullptr);
}

TEST_CASE("invalid vocabularies are rejected") {
  CHECK(build_error({sub("S1", "x", "B9")}) == ErrorCode::kOrphanSubtype);
  CHECK(build_error({broad("B1", "a"), sub("S1", "x", "S2"), sub("S2", "y", "B1")}) ==
        ErrorCode::kOrphanSubtype);
  CHECK(build_error({broad("B1", "lung cancer"), broad("B2", "Lung  cancer.")}) ==
        ErrorCode::kDuplicateName);
  CHECK(build_error({broad("B1", "a"), broad("B1", "b")}) == ErrorCode::kDuplicateName);
  // The same name at both levels is allowed; lookups prefer the subtype.
  const Ontology o({broad("B1", "sarcoma"), sub("S1", "sarcoma", "B1")});
  CHECK(map_to_ontology("Sarcoma", o)->id == "S1");
}

TEST_CASE("mapping normalizes case, punctuation and spacing") {
  const Ontology o({broad("B1", "colorectal cancer"), sub("S1", "colon adenocarcinoma", "B1")});
  CHECK(map_to_ontology("Colon adenocarcinoma.", o)->id == "S1");
  CHECK(map_to_ontology("colorectal cancer", o)->id == "B1");
  CHECK(map_to_ontology("met prostatic adenocarcinoma", o) == nullptr);
  CHECK(map_to_ontology("", o) == nullptr);
  CHECK(lookup_key(" Colon,  Adeno-carcinoma! ") == "colon adenocarcinoma");
  CHECK(normalize_name(" Colon,  X ") == "colon, x");
}

TEST_CASE("every node name maps back to its node") {
  const auto o = load_ontology(testing::repo_data("synthetic/ontology.jsonl"));
  REQUIRE(o.size() > 20);
  for (const auto& n : o.nodes()) {
    const auto* m = map_to_ontology(n.name, o);
    REQUIRE(m != nullptr);
    CHECK(m->id == n.id);
  }
}

TEST_CASE("save then load gives the same ontology") {
  testing::TempDir dir;
  const Ontology o({broad("B1", "colorectal cancer"), sub("S1", "colon adenocarcinoma", "B1"),
                    broad("B2", "lung cancer")});
  save_ontology(dir / "o.jsonl", o);
  const auto back = load_ontology(dir / "o.jsonl");
  CHECK(back.nodes() == o.nodes());

  write_text_file(dir / "empty.jsonl", "");
  CHECK(load_ontology(dir / "empty.jsonl").empty());
  write_text_file(dir / "bad.jsonl", R"({"id": "S", "name": "x", "level": "subtype", "parent_id": "B"})");
  CHECK_THROWS_AS(load_ontology(dir / "bad.jsonl"), Error);
}
