// Runs a bundle or tokenizer on JSONL probe inputs and prints one JSON line
// per input. Used by the export parity checks.
//
//   --bundle DIR      qa bundles read {"ids": [...]} and print start/end
//                     logits; embedder bundles read {"text"} and print
//                     tokens and vectors
//   --tokenizer FILE  reads {"text"} and prints ids and byte offsets
#include <iostream>

#include "CLI11.hpp"
#include "pathex/qa/graph_backend.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"

using namespace pathex;

int main(int argc, char** argv) {
  CLI::App cli{"Probe a model bundle or tokenizer"};
  std::filesystem::path bundle_dir, tokenizer_file, input;
  auto* b = cli.add_option("--bundle", bundle_dir)->check(CLI::ExistingDirectory);
  auto* t = cli.add_option("--tokenizer", tokenizer_file)->check(CLI::ExistingFile);
  b->excludes(t);
  cli.add_option("--input", input, "JSONL probes")->required()->check(CLI::ExistingFile);
  CLI11_PARSE(cli, argc, argv);
  if (bundle_dir.empty() == tokenizer_file.empty()) {
    std::cerr << "give exactly one of --bundle or --tokenizer\n";
    return 2;
  }
  try {
    std::function<Json(const Json&)> probe;
    std::unique_ptr<qa::GraphQaBackend> qa_backend;
    std::unique_ptr<metrics::EmbeddingBackend> embedder;
    std::optional<qa::BpeTokenizer> tokenizer;
    if (!tokenizer_file.empty()) {
      tokenizer = qa::BpeTokenizer::load(tokenizer_file);
      probe = [&](const Json& j) {
        const auto enc = tokenizer->encode(j.at("text").get<std::string>());
        Json offsets = Json::array();
        for (const auto& [s, e] : enc.offsets) offsets.push_back({s, e});
        return Json{{"ids", enc.ids}, {"offsets", offsets}};
      };
    } else {
      const auto bundle = qa::load_bundle(bundle_dir);
      if (bundle.kind == qa::BundleKind::kQa) {
        qa_backend = std::make_unique<qa::GraphQaBackend>(bundle);
        probe = [&](const Json& j) {
          qa::TokenizedWindow w;
          w.token_ids = j.at("ids").get<std::vector<qa::TokenId>>();
          w.char_offsets.assign(w.size(), qa::kNoOffsets);
          w.context_mask.assign(w.size(), false);
          const auto l = qa_backend->run(w);
          return Json{{"start", l.start}, {"end", l.end}};
        };
      } else {
        embedder = qa::make_embedder(bundle);
        probe = [&](const Json& j) {
          const auto e = embedder->run(j.at("text").get<std::string>());
          return Json{{"tokens", e.tokens}, {"vectors", e.vectors}};
        };
      }
    }
    read_jsonl(input, [&](std::size_t, const Json& j) { std::cout << probe(j).dump() << "\n"; });
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
