#pragma once

#include <cstdio>
#include <string>

namespace mhts {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

LogLevel log_threshold();
void set_log_threshold(LogLevel level);

void log_line(LogLevel level, const std::string& msg);

inline void log_debug(const std::string& msg) { log_line(LogLevel::debug, msg); }
inline void log_info(const std::string& msg) { log_line(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log_line(LogLevel::warn, msg); }
inline void log_error(const std::string& msg) { log_line(LogLevel::error, msg); }

}  // namespace mhts
