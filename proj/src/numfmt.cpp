#include "extval/numfmt.hpp"

#include <cstdio>
#include <cstdlib>

namespace extval {

namespace {

std::string format_g(double x, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, x);
  return buf;
}

}  // namespace

std::string format_sig17(double x) { return format_g(x, "%.17g"); }

std::string format_sig12(double x) { return format_g(x, "%.12g"); }

double round_sig12(double x) {
  return std::strtod(format_sig12(x).c_str(), nullptr);
}

}  // namespace extval
