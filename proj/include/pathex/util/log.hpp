#pragma once

#include <string>
#include <string_view>

#include "pathex/util/jsonl.hpp"

// Structured logging: one JSON object per line on stderr.
namespace pathex::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kOff = 4 };

void set_level(Level level);
Level level();
// Accepts debug|info|warn|error|off; throws CONFIG_INVALID otherwise.
Level parse_level(std::string_view name);

// Redirects output into an in-memory buffer (tests) or back to stderr.
void capture(bool enabled);
std::string captured();

void emit(Level level, std::string_view event, Json fields = Json::object());

inline void debug(std::string_view event, Json fields = Json::object()) {
  emit(Level::kDebug, event, std::move(fields));
}
inline void info(std::string_view event, Json fields = Json::object()) {
  emit(Level::kInfo, event, std::move(fields));
}
inline void warn(std::string_view event, Json fields = Json::object()) {
  emit(Level::kWarn, event, std::move(fields));
}
inline void error(std::string_view event, Json fields = Json::object()) {
  emit(Level::kError, event, std::move(fields));
}

}  // namespace pathex::log
