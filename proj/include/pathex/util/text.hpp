#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Byte-oriented string helpers. All case folding and character classes are
// ASCII-only; bytes >= 0x80 pass through unchanged.
namespace pathex::text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
// Python's string.punctuation.
inline bool is_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}
inline char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }
inline char to_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 32) : c; }

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
// Runs of whitespace become one space; leading/trailing whitespace removed.
std::string collapse_whitespace(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with_icase(std::string_view s, std::string_view prefix);

// Strips leading/trailing characters that are whitespace or punctuation.
std::string_view trim_punct(std::string_view s);

// UTF-8 helpers.
bool is_utf8_continuation(unsigned char c);
// Largest char boundary <= pos.
std::size_t utf8_floor(std::string_view s, std::size_t pos);
// Smallest char boundary >= pos.
std::size_t utf8_ceil(std::string_view s, std::size_t pos);
// Decodes one code point at `pos`; returns byte length consumed (>= 1).
// Invalid sequences decode as U+FFFD with length 1.
std::size_t utf8_decode(std::string_view s, std::size_t pos, char32_t& out);
// Truncates to at most `max_bytes` without splitting a character.
std::string_view utf8_truncate(std::string_view s, std::size_t max_bytes);

}  // namespace pathex::text
