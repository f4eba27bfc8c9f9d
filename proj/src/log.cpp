#include "calsep/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string_view>

#include "calsep/errors.hpp"

namespace calsep {

void init_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_color_mt("calsep");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("CALSEP_LOG");
  const std::string_view level = env ? env : "error";
  if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else if (level == "error") spdlog::set_level(spdlog::level::err);
  else throw ParseError("CALSEP_LOG must be error, info or debug");
}

void log_info(const std::string& msg) { spdlog::info(msg); }
void log_debug(const std::string& msg) { spdlog::debug(msg); }
void log_error(const std::string& msg) { spdlog::error(msg); }

}  // namespace calsep
