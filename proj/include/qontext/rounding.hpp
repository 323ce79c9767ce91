#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace qontext {

inline constexpr int kDisplayDecimals = 4;

// Round half away from zero at `decimals` places. The tiny nudge makes decimal
// ties such as 0.12345 (stored as 0.1234499...) round the way they read.
inline double round_to(double x, int decimals = kDisplayDecimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = x * scale;
  return std::round(scaled + std::copysign(1e-12 * (1.0 + std::fabs(scaled)), scaled)) / scale;
}

// Fixed-point text with a period separator; "-0.0000" is normalized to "0.0000".
inline std::string format_fixed(double x, int decimals = kDisplayDecimals) {
  double r = round_to(x, decimals);
  if (r == 0.0) r = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

}  // namespace qontext
