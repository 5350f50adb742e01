#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace pbcising {

// log(exp(a) + exp(b))
inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

// log(exp(a) - exp(b)) for a >= b; -inf when the difference vanishes.
inline double log_diff_exp(double a, double b) {
  if (b > a) return std::numeric_limits<double>::quiet_NaN();
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double d = b - a;
  // log1p(-exp(d)) loses accuracy for d near 0; switch to log(-expm1(d)).
  return a + (d > -M_LN2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)));
}

inline double log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

}  // namespace pbcising
