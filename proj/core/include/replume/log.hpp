#pragma once

#include <sstream>
#include <string>

namespace replume::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };

// Threshold comes from the REPLUME_LOG environment variable
// (debug|info|warn|error), read once; defaults to info.
Level threshold();
bool enabled(Level level);

namespace detail {
void emit(Level level, const std::string& message);
}

// Usage: log::Line(log::Level::Info) << "epoch " << e << " loss " << loss;
// The line is written to stderr on destruction if the level is enabled.
class Line {
 public:
  explicit Line(Level level) : level_(level) {}
  ~Line() {
    if (enabled(level_)) detail::emit(level_, stream_.str());
  }
  Line(const Line&) = delete;
  Line& operator=(const Line&) = delete;

  template <typename T>
  Line& operator<<(const T& value) {
    stream_ << value;
    return *this;
  }

 private:
  Level level_;
  std::ostringstream stream_;
};

inline Line debug() { return Line(Level::Debug); }
inline Line info() { return Line(Level::Info); }
inline Line warn() { return Line(Level::Warn); }
inline Line error() { return Line(Level::Error); }

}  // namespace replume::log
