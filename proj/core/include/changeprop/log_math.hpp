#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace changeprop {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^a + e^b); exact when one side is -inf.
inline double log_add_exp(double a, double b) noexcept {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// log(sum_i e^{x_i}); returns the max exactly when every other term is -inf.
inline double log_sum_exp(std::span<const double> xs) noexcept {
  if (xs.empty()) return kNegInf;
  const double m = *std::max_element(xs.begin(), xs.end());
  if (m == kNegInf || std::isinf(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// log(1 + e^x) without overflow.
inline double log1p_exp(double x) noexcept {
  if (x > 35.0) return x + std::exp(-x);
  return std::log1p(std::exp(x));
}

// log(x) that maps 0 to -inf instead of raising.
inline double safe_log(double x) noexcept { return x > 0.0 ? std::log(x) : kNegInf; }

}  // namespace changeprop
