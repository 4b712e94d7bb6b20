#include "pcmlp/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace pcmlp {
namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::kWarning)};
std::mutex g_mutex;
constexpr const char* kNames[] = {"debug", "info", "warning", "error"};
}  // namespace

void set_log_level(LogLevel level) { g_level.store(static_cast<int>(level)); }
LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) < g_level.load() || level == LogLevel::kOff) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[pcmlp " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace pcmlp
