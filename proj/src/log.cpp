#include "quadcarve/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>
#include <string>

namespace quadcarve::log {
namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("quadcarve");
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("QUADCARVE_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return instance;
}

}  // namespace

void warn(std::string_view msg) { logger()->warn("{}", msg); }
void info(std::string_view msg) { logger()->info("{}", msg); }
void debug(std::string_view msg) { logger()->debug("{}", msg); }
void error(std::string_view msg) { logger()->error("{}", msg); }

}  // namespace quadcarve::log
