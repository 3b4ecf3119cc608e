// Builds an oracle QA bundle from a corpus: the "model" answers every
// question with the record's gold span. Used for pipeline smoke tests.
#include <iostream>

#include "CLI11.hpp"
#include "pathex/corpus/corpus.hpp"
#include "pathex/qa/backend.hpp"
#include "pathex/util/error.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Write an oracle QA bundle"};
  std::filesystem::path corpus_file, tokenizer, out;
  std::size_t max_seq_len = 384;
  std::string model_name = "oracle";
  cli.add_option("--corpus", corpus_file)->required()->check(CLI::ExistingFile);
  cli.add_option("--tokenizer", tokenizer, "tokenizer JSON")->required()->check(CLI::ExistingFile);
  cli.add_option("--out", out, "bundle directory")->required();
  cli.add_option("--max-seq-len", max_seq_len);
  cli.add_option("--model-name", model_name);
  CLI11_PARSE(cli, argc, argv);
  try {
    const auto records = pathex::corpus::read_corpus(corpus_file);
    pathex::qa::write_oracle_bundle(out, records, tokenizer, max_seq_len, model_name);
    std::cout << "wrote " << out.string() << " (" << records.size() << " records)\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
