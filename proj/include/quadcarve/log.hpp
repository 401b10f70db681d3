#pragma once

#include <string_view>

namespace quadcarve::log {

// Thin facade over spdlog so that only src/log.cpp depends on it. The level is
// taken from QUADCARVE_LOG (trace|debug|info|warn|error|off), default "warn".
void warn(std::string_view msg);
void info(std::string_view msg);
void debug(std::string_view msg);
void error(std::string_view msg);

}  // namespace quadcarve::log
