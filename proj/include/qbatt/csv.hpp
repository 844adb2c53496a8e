#pragma once

#include <cstdio>
#include <string>

namespace qbatt {

// Round-trip exact, locale-independent double formatting so repeated runs
// emit byte-identical artifacts.
inline std::string csv_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace qbatt
