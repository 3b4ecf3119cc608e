#include "pathex/qa/tokenizer.hpp"

#include <algorithm>
#include <limits>

#include "pathex/util/error.hpp"
#include "pathex/util/text.hpp"

namespace pathex::qa {
namespace {

struct CodepointRange {
  char32_t lo, hi;
};

#include "unicode_tables.inc"

template <std::size_t N>
bool in_ranges(const CodepointRange (&table)[N], char32_t cp) {
  auto it = std::upper_bound(std::begin(table), std::end(table), cp,
                             [](char32_t v, const CodepointRange& r) { return v < r.lo; });
  if (it == std::begin(table)) return false;
  --it;
  return cp <= it->hi;
}

bool is_letter(char32_t cp) {
  if (cp < 0x80) return text::is_alpha(static_cast<char>(cp));
  return in_ranges(kLetterRanges, cp);
}

bool is_number(char32_t cp) {
  if (cp < 0x80) return text::is_digit(static_cast<char>(cp));
  return in_ranges(kNumberRanges, cp);
}

// Unicode White_Space.
bool is_ws(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

enum class CharClass { kLetter, kNumber, kSpace, kOther };

CharClass classify(char32_t cp) {
  if (is_ws(cp)) return CharClass::kSpace;
  if (is_letter(cp)) return CharClass::kLetter;
  if (is_number(cp)) return CharClass::kNumber;
  return CharClass::kOther;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::size_t count_codepoints(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) n += text::is_utf8_continuation(static_cast<unsigned char>(c)) ? 0 : 1;
  return n;
}

const std::unordered_map<std::string, unsigned char>& unicode_to_byte() {
  static const auto table = [] {
    std::unordered_map<std::string, unsigned char> m;
    const auto& fwd = byte_to_unicode();
    for (int b = 0; b < 256; ++b) m.emplace(fwd[b], static_cast<unsigned char>(b));
    return m;
  }();
  return table;
}

const std::string kSpaceMark = "\xC4\xA0";  // U+0120, the mapped space byte

}  // namespace

const std::vector<std::string>& byte_to_unicode() {
  static const std::vector<std::string> table = [] {
    std::vector<std::string> t(256);
    std::vector<bool> direct(256, false);
    for (int b = '!'; b <= '~'; ++b) direct[b] = true;
    for (int b = 0xA1; b <= 0xAC; ++b) direct[b] = true;
    for (int b = 0xAE; b <= 0xFF; ++b) direct[b] = true;
    int extra = 0;
    for (int b = 0; b < 256; ++b) {
      t[b] = encode_utf8(direct[b] ? static_cast<char32_t>(b) : static_cast<char32_t>(256 + extra++));
    }
    return t;
  }();
  return table;
}

std::vector<Offsets> pretokenize(std::string_view s) {
  struct Cp {
    char32_t value;
    std::size_t pos;
    CharClass cls;
  };
  std::vector<Cp> cps;
  for (std::size_t i = 0; i < s.size();) {
    char32_t cp;
    const std::size_t len = text::utf8_decode(s, i, cp);
    cps.push_back({cp, i, classify(cp)});
    i += len;
  }
  const std::size_t n = cps.size();
  auto byte_at = [&](std::size_t k) { return k < n ? cps[k].pos : s.size(); };
  auto run_end = [&](std::size_t k, CharClass cls) {
    while (k < n && cps[k].cls == cls) ++k;
    return k;
  };

  std::vector<Offsets> out;
  std::size_t i = 0;
  while (i < n) {
    const char32_t c = cps[i].value;
    // 's|'t|'re|'ve|'m|'ll|'d
    if (c == U'\'' && i + 1 < n) {
      const char32_t c1 = cps[i + 1].value;
      const char32_t c2 = i + 2 < n ? cps[i + 2].value : 0;
      std::size_t len = 0;
      if (c1 == U's' || c1 == U't' || c1 == U'm' || c1 == U'd') {
        len = 2;
      } else if ((c1 == U'r' && c2 == U'e') || (c1 == U'v' && c2 == U'e') ||
                 (c1 == U'l' && c2 == U'l')) {
        len = 3;
      }
      if (len) {
        out.emplace_back(byte_at(i), byte_at(i + len));
        i += len;
        continue;
      }
    }
    // ` ?\p{L}+`, ` ?\p{N}+`, ` ?[^\s\p{L}\p{N}]+`
    bool matched = false;
    for (CharClass cls : {CharClass::kLetter, CharClass::kNumber, CharClass::kOther}) {
      std::size_t start = i;
      if (c == U' ' && i + 1 < n && cps[i + 1].cls == cls) {
        start = i + 1;
      } else if (cps[i].cls != cls) {
        continue;
      }
      const std::size_t end = run_end(start, cls);
      out.emplace_back(byte_at(i), byte_at(end));
      i = end;
      matched = true;
      break;
    }
    if (matched) continue;
    // `\s+(?!\S)|\s+`
    const std::size_t end = run_end(i, CharClass::kSpace);
    std::size_t stop = end;
    if (end < n && end - i >= 2) stop = end - 1;
    out.emplace_back(byte_at(i), byte_at(stop));
    i = stop;
  }
  return out;
}

BpeTokenizer BpeTokenizer::from_json(const Json& spec) {
  BpeTokenizer tok;
  const Json& model = spec.at("model");
  if (model.value("type", std::string("BPE")) != "BPE") {
    throw Error(ErrorCode::kBundleInvalid, "tokenizer model type must be BPE");
  }
  for (auto& [token, id] : model.at("vocab").items()) {
    const auto tid = id.get<TokenId>();
    if (tid < 0) throw Error(ErrorCode::kBundleInvalid, "negative token id");
    tok.vocab_[token] = tid;
    if (static_cast<std::size_t>(tid) >= tok.id_to_token_.size()) tok.id_to_token_.resize(tid + 1);
    tok.id_to_token_[tid] = token;
  }
  std::size_t rank = 0;
  for (const auto& m : model.at("merges")) {
    std::string key;
    if (m.is_string()) {
      key = m.get<std::string>();
    } else if (m.is_array() && m.size() == 2) {
      key = m[0].get<std::string>() + " " + m[1].get<std::string>();
    } else {
      throw Error(ErrorCode::kBundleInvalid, "malformed merge entry");
    }
    tok.merge_rank_.emplace(std::move(key), rank++);
  }
  tok.ignore_merges_ = model.value("ignore_merges", false);
  if (auto it = model.find("unk_token"); it != model.end() && it->is_string()) {
    auto v = tok.vocab_.find(it->get<std::string>());
    if (v != tok.vocab_.end()) tok.unk_id_ = v->second;
  }

  if (auto it = spec.find("added_tokens"); it != spec.end()) {
    for (const auto& added : *it) {
      const auto content = added.at("content").get<std::string>();
      const auto id = added.at("id").get<TokenId>();
      tok.vocab_[content] = id;
      if (static_cast<std::size_t>(id) >= tok.id_to_token_.size()) tok.id_to_token_.resize(id + 1);
      tok.id_to_token_[id] = content;
      if (added.value("special", false)) tok.special_ids_.push_back(id);
    }
  }

  if (auto it = spec.find("pre_tokenizer"); it != spec.end() && !it->is_null()) {
    if (it->value("type", std::string()) != "ByteLevel") {
      throw Error(ErrorCode::kBundleInvalid, "only the ByteLevel pre-tokenizer is supported");
    }
    tok.add_prefix_space_ = it->value("add_prefix_space", false);
    tok.trim_offsets_ = it->value("trim_offsets", true);
  }

  auto lookup = [&](const char* name) -> TokenId {
    auto v = tok.vocab_.find(name);
    if (v == tok.vocab_.end()) throw Error(ErrorCode::kBundleInvalid, std::string("no ") + name);
    return v->second;
  };
  const Json* post = nullptr;
  if (auto it = spec.find("post_processor"); it != spec.end() && !it->is_null()) post = &*it;
  const std::string post_type = post ? post->value("type", std::string()) : std::string();
  if (post_type == "RobertaProcessing" || post_type == "BertProcessing") {
    tok.layout_ = post_type == "RobertaProcessing" ? PairLayout::kRoberta : PairLayout::kBert;
    tok.cls_id_ = post->at("cls").at(1).get<TokenId>();
    tok.sep_id_ = post->at("sep").at(1).get<TokenId>();
    if (post_type == "RobertaProcessing") tok.trim_offsets_ = post->value("trim_offsets", true);
  } else if (tok.vocab_.count("<s>") && tok.vocab_.count("</s>")) {
    tok.layout_ = PairLayout::kRoberta;
    tok.cls_id_ = lookup("<s>");
    tok.sep_id_ = lookup("</s>");
  } else {
    tok.layout_ = PairLayout::kBert;
    tok.cls_id_ = lookup("[CLS]");
    tok.sep_id_ = lookup("[SEP]");
  }
  for (TokenId id : {tok.cls_id_, tok.sep_id_}) {
    if (std::find(tok.special_ids_.begin(), tok.special_ids_.end(), id) == tok.special_ids_.end()) {
      tok.special_ids_.push_back(id);
    }
  }
  return tok;
}

BpeTokenizer BpeTokenizer::load(const std::filesystem::path& path) {
  Json spec;
  try {
    spec = Json::parse(read_text_file(path));
    return from_json(spec);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kBundleInvalid, "tokenizer " + path.string() + ": " + e.what());
  }
}

const std::string& BpeTokenizer::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "token id out of range");
  }
  return id_to_token_[id];
}

bool BpeTokenizer::is_special(TokenId id) const {
  return std::find(special_ids_.begin(), special_ids_.end(), id) != special_ids_.end();
}

std::vector<std::string> BpeTokenizer::bpe(const std::string& word) const {
  if (ignore_merges_ && vocab_.count(word)) return {word};
  std::vector<std::string> symbols;
  for (std::size_t i = 0; i < word.size();) {
    char32_t cp;
    const std::size_t len = text::utf8_decode(word, i, cp);
    symbols.push_back(word.substr(i, len));
    i += len;
  }
  while (symbols.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    std::size_t best_at = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find(symbols[i] + " " + symbols[i + 1]);
      if (it != merge_rank_.end() && it->second < best_rank) {
        best_rank = it->second;
        best_at = i;
      }
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    const std::string first = symbols[best_at];
    const std::string second = symbols[best_at + 1];
    std::vector<std::string> merged;
    merged.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == first && symbols[i + 1] == second) {
        merged.push_back(first + second);
        i += 2;
      } else {
        merged.push_back(symbols[i]);
        ++i;
      }
    }
    symbols = std::move(merged);
  }
  return symbols;
}

Encoding BpeTokenizer::encode(std::string_view input) const {
  std::string prefixed;
  std::string_view s = input;
  std::size_t shift = 0;
  if (add_prefix_space_ && !input.empty() && input.front() != ' ') {
    prefixed = " " + std::string(input);
    s = prefixed;
    shift = 1;
  }
  const auto& to_unicode = byte_to_unicode();
  Encoding enc;
  for (const auto& [begin, end] : pretokenize(s)) {
    std::string mapped;
    for (std::size_t b = begin; b < end; ++b) mapped += to_unicode[static_cast<unsigned char>(s[b])];
    std::size_t cursor = begin;
    for (auto& piece : bpe(mapped)) {
      const std::size_t nbytes = count_codepoints(piece);
      std::size_t tb = cursor, te = cursor + nbytes;
      cursor = te;
      if (trim_offsets_) {
        std::size_t lead = 0, trail = 0;
        for (std::size_t k = 0; k + 1 < piece.size() && piece.compare(k, 2, kSpaceMark) == 0; k += 2) ++lead;
        for (std::size_t k = piece.size(); k >= 2 && piece.compare(k - 2, 2, kSpaceMark) == 0; k -= 2) ++trail;
        tb = std::min(tb + lead, te);
        te = std::max(te > trail ? te - trail : 0, tb);
      }
      tb = text::utf8_floor(s, tb);
      te = std::max(text::utf8_ceil(s, te), tb);
      tb = tb >= shift ? tb - shift : 0;
      te = te >= shift ? te - shift : 0;

      auto v = vocab_.find(piece);
      TokenId id = unk_id_;
      if (v != vocab_.end()) {
        id = v->second;
      } else if (unk_id_ < 0) {
        throw Error(ErrorCode::kInvalidArgument, "token '" + piece + "' not in vocabulary");
      }
      enc.ids.push_back(id);
      enc.offsets.emplace_back(tb, te);
      enc.tokens.push_back(std::move(piece));
    }
  }
  return enc;
}

std::string BpeTokenizer::decode(const std::vector<TokenId>& ids) const {
  const auto& to_byte = unicode_to_byte();
  std::string out;
  for (TokenId id : ids) {
    if (is_special(id)) continue;
    const std::string& tok = token(id);
    for (std::size_t i = 0; i < tok.size();) {
      char32_t cp;
      const std::size_t len = text::utf8_decode(tok, i, cp);
      auto it = to_byte.find(tok.substr(i, len));
      if (it != to_byte.end()) {
        out.push_back(static_cast<char>(it->second));
      } else {
        out += tok.substr(i, len);
      }
      i += len;
    }
  }
  return out;
}

}  // namespace pathex::qa
