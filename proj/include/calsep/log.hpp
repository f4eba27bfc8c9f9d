#pragma once

#include <string>

namespace calsep {

// Reads CALSEP_LOG (error, info, debug) and configures the default logger.
// Unset means error.
void init_logging();

void log_info(const std::string& msg);
void log_debug(const std::string& msg);
void log_error(const std::string& msg);

}  // namespace calsep
