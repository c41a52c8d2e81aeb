#include "stressfuse/common/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace stressfuse {
namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::kWarn)};
std::mutex g_mu;
}  // namespace

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }
LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log_warn(std::string_view msg) {
  if (g_level < static_cast<int>(LogLevel::kWarn)) return;
  std::lock_guard lock(g_mu);
  std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(msg.size()), msg.data());
}

void log_info(std::string_view msg) {
  if (g_level < static_cast<int>(LogLevel::kInfo)) return;
  std::lock_guard lock(g_mu);
  std::fprintf(stderr, "%.*s\n", static_cast<int>(msg.size()), msg.data());
}

}  // namespace stressfuse
