#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pathex/util/jsonl.hpp"

namespace pathex::qa {

using TokenId = std::int64_t;

// Byte range [first, second) into the encoded text.
using Offsets = std::pair<std::size_t, std::size_t>;

struct Encoding {
  std::vector<TokenId> ids;
  std::vector<Offsets> offsets;
  std::vector<std::string> tokens;

  std::size_t size() const { return ids.size(); }
};

// How a (question, context) pair is framed with special tokens.
enum class PairLayout {
  kRoberta,  // <s> A </s> </s> B </s>
  kBert,     // [CLS] A [SEP] B [SEP]
};

// Byte-level BPE tokenizer loaded from the serialized tokenizer JSON format
// (model.type = "BPE", ByteLevel pre-tokenizer). Offsets are byte offsets
// into the input, trimmed of the leading space a token absorbs, and widened
// to UTF-8 character boundaries when a token splits a multi-byte character.
class BpeTokenizer {
 public:
  static BpeTokenizer from_json(const Json& spec);
  static BpeTokenizer load(const std::filesystem::path& path);

  // Subword tokens of `text` without special tokens.
  Encoding encode(std::string_view text) const;
  std::string decode(const std::vector<TokenId>& ids) const;

  PairLayout layout() const { return layout_; }
  TokenId cls_id() const { return cls_id_; }
  TokenId sep_id() const { return sep_id_; }
  // Special tokens added around a pair: 4 for kRoberta, 3 for kBert.
  std::size_t pair_special_count() const { return layout_ == PairLayout::kRoberta ? 4 : 3; }
  std::size_t vocab_size() const { return id_to_token_.size(); }
  const std::string& token(TokenId id) const;
  bool is_special(TokenId id) const;

 private:
  std::vector<std::string> bpe(const std::string& mapped_word) const;

  std::unordered_map<std::string, TokenId> vocab_;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, std::size_t> merge_rank_;
  std::vector<TokenId> special_ids_;
  TokenId cls_id_ = 0;
  TokenId sep_id_ = 2;
  TokenId unk_id_ = -1;
  bool add_prefix_space_ = false;
  bool trim_offsets_ = true;
  bool ignore_merges_ = false;
  PairLayout layout_ = PairLayout::kRoberta;
};

// Splits text the way the GPT-2 byte-level pre-tokenizer regex does. Returns
// byte ranges of the pieces. Exposed for tests.
std::vector<Offsets> pretokenize(std::string_view text);

// GPT-2 byte -> printable code point mapping, as UTF-8 strings.
const std::vector<std::string>& byte_to_unicode();

}  // namespace pathex::qa
