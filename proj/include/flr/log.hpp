#ifndef FLR_LOG_HPP
#define FLR_LOG_HPP

#include <cstdlib>
#include <iostream>
#include <string>

namespace flr::log {

enum class Level { quiet = 0, warn = 1, info = 2, debug = 3 };

/// Verbosity from the FLR_LOG environment variable
/// (quiet|warn|info|debug, default warn).
inline Level level() {
  static const Level lv = [] {
    const char* env = std::getenv("FLR_LOG");
    if (!env) return Level::warn;
    const std::string s(env);
    if (s == "quiet") return Level::quiet;
    if (s == "info") return Level::info;
    if (s == "debug") return Level::debug;
    return Level::warn;
  }();
  return lv;
}

inline void warn(const std::string& msg) {
  if (level() >= Level::warn) std::cerr << "[flr] warning: " << msg << '\n';
}

inline void info(const std::string& msg) {
  if (level() >= Level::info) std::cerr << "[flr] " << msg << '\n';
}

}  // namespace flr::log

#endif  // FLR_LOG_HPP
