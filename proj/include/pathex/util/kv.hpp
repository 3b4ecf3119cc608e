#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace pathex {

// Flat "key = value" files with optional [section] headers. Keys inside a
// section are returned as "section.key". '#' and ';' start comment lines.
// Duplicate keys and lines without '=' raise CONFIG_INVALID.
std::map<std::string, std::string> parse_kv(const std::string& content,
                                            const std::string& origin = "<string>");
std::map<std::string, std::string> load_kv(const std::filesystem::path& path);

}  // namespace pathex
