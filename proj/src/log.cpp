#include "mhts/log.hpp"

#include <atomic>
#include <mutex>

namespace mhts {

namespace {
std::atomic<int> g_threshold{static_cast<int>(LogLevel::info)};
std::mutex g_mutex;

const char* level_tag(LogLevel level) {
    switch (level) {
        case LogLevel::debug: return "debug";
        case LogLevel::info: return "info";
        case LogLevel::warn: return "warn";
        case LogLevel::error: return "error";
    }
    return "?";
}
}  // namespace

LogLevel log_threshold() { return static_cast<LogLevel>(g_threshold.load()); }

void set_log_threshold(LogLevel level) { g_threshold.store(static_cast<int>(level)); }

void log_line(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) < g_threshold.load()) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "[mhts %s] %s\n", level_tag(level), msg.c_str());
}

}  // namespace mhts
