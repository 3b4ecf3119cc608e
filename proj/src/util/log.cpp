#include "pathex/util/log.hpp"

#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>

#include "pathex/util/error.hpp"

namespace pathex::log {
namespace {

std::atomic<Level> g_level{Level::kInfo};
std::mutex g_mutex;
bool g_capture = false;
std::string g_buffer;

const char* level_name(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    case Level::kOff: return "off";
  }
  return "info";
}

}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

Level parse_level(std::string_view name) {
  for (Level l : {Level::kDebug, Level::kInfo, Level::kWarn, Level::kError, Level::kOff}) {
    if (name == level_name(l)) return l;
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown log level '" + std::string(name) + "'");
}

void capture(bool enabled) {
  std::lock_guard lock(g_mutex);
  g_capture = enabled;
  g_buffer.clear();
}

std::string captured() {
  std::lock_guard lock(g_mutex);
  return g_buffer;
}

void emit(Level level, std::string_view event, Json fields) {
  if (level < g_level.load() || g_level.load() == Level::kOff) return;
  const auto now = std::chrono::system_clock::now();
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
  Json line = Json::object();
  line["ts_ms"] = ms;
  line["level"] = level_name(level);
  line["event"] = std::string(event);
  if (fields.is_object()) {
    for (auto& [k, v] : fields.items()) line[k] = v;
  }
  const std::string rendered = line.dump() + "\n";
  std::lock_guard lock(g_mutex);
  if (g_capture) {
    g_buffer += rendered;
  } else {
    std::cerr << rendered;
  }
}

}  // namespace pathex::log
