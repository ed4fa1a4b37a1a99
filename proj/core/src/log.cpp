#include "replume/log.hpp"

#include <cstdlib>
#include <iostream>

namespace replume::log {

namespace {

Level parse_level(const char* text) {
  if (text == nullptr) return Level::Info;
  const std::string value(text);
  if (value == "debug") return Level::Debug;
  if (value == "info") return Level::Info;
  if (value == "warn") return Level::Warn;
  if (value == "error") return Level::Error;
  return Level::Info;
}

const char* prefix(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
  }
  return "info";
}

}  // namespace

Level threshold() {
  static const Level level = parse_level(std::getenv("REPLUME_LOG"));
  return level;
}

bool enabled(Level level) { return static_cast<int>(level) >= static_cast<int>(threshold()); }

void detail::emit(Level level, const std::string& message) {
  std::cerr << "[" << prefix(level) << "] " << message << '\n';
}

}  // namespace replume::log
