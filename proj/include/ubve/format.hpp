#pragma once

#include <cstdio>
#include <string>

namespace ubve {

/// Fixed 17-significant-digit rendering used for every CSV value.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace ubve
