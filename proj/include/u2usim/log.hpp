#ifndef U2USIM_LOG_HPP
#define U2USIM_LOG_HPP

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

// Minimal stderr logger. Level comes from the U2USIM_LOG environment
// variable: error | warn | info | debug (default warn).

namespace u2usim {

enum class LogLevel : int { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("U2USIM_LOG");
    if (env == nullptr) return LogLevel::kWarn;
    if (std::strcmp(env, "error") == 0) return LogLevel::kError;
    if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    return LogLevel::kWarn;
  }();
  return level;
}

inline void log_msg(LogLevel level, const char* tag, const char* fmt, ...) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::fprintf(stderr, "[u2usim %s] ", tag);
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fputc('\n', stderr);
}

}  // namespace u2usim

#define U2USIM_LOG_ERROR(...) \
  ::u2usim::log_msg(::u2usim::LogLevel::kError, "error", __VA_ARGS__)
#define U2USIM_LOG_WARN(...) \
  ::u2usim::log_msg(::u2usim::LogLevel::kWarn, "warn", __VA_ARGS__)
#define U2USIM_LOG_INFO(...) \
  ::u2usim::log_msg(::u2usim::LogLevel::kInfo, "info", __VA_ARGS__)
#define U2USIM_LOG_DEBUG(...) \
  ::u2usim::log_msg(::u2usim::LogLevel::kDebug, "debug", __VA_ARGS__)

#endif  // U2USIM_LOG_HPP
