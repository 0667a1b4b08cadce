#pragma once

#include <cstdio>
#include <string>

namespace densal {

// Diagnostics go to stderr so command output on stdout stays parseable.
inline void log_info(const std::string& msg) {
  std::fprintf(stderr, "[densal] %s\n", msg.c_str());
}

inline void log_warn(const std::string& msg) {
  std::fprintf(stderr, "[densal] warning: %s\n", msg.c_str());
}

}  // namespace densal
