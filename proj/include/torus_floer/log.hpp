#pragma once

#include <string>

namespace floer {

/// 0 silent, 1 warnings, 2 progress notes. Messages go to stderr.
void set_log_level(int level);
int log_level();
void log_warn(const std::string& msg);
void log_note(const std::string& msg);

}  // namespace floer
