#pragma once

#include <string_view>

namespace stressfuse {

enum class LogLevel { kQuiet = 0, kWarn = 1, kInfo = 2 };

void set_log_level(LogLevel level);
LogLevel log_level();

void log_warn(std::string_view msg);
void log_info(std::string_view msg);

}  // namespace stressfuse
