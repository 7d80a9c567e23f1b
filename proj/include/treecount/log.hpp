#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace treecount::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

inline Level parse_level(std::string_view s) {
  if (s == "debug" || s == "3") return Level::kDebug;
  if (s == "info" || s == "2") return Level::kInfo;
  if (s == "warn" || s == "1") return Level::kWarn;
  return Level::kError;
}

/// Verbosity comes from TREECOUNT_LOG (error|warn|info|debug), read once.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("TREECOUNT_LOG");
    return env ? parse_level(env) : Level::kError;
  }();
  return level;
}

inline bool enabled(Level level) { return static_cast<int>(level) <= static_cast<int>(threshold()); }

inline void write(Level level, std::string_view msg) {
  if (!enabled(level)) return;
  static constexpr std::string_view tags[] = {"error", "warn", "info", "debug"};
  std::cerr << "[treecount " << tags[static_cast<int>(level)] << "] " << msg << '\n';
}

}  // namespace treecount::log
