#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pspin/rng.hpp"

namespace testing {

inline std::vector<double> uniform_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                          double hi = 1.0) {
  pspin::CounterStream rng(seed);
  std::vector<double> u(n);
  for (auto& x : u) x = rng.uniform(lo, hi);
  return u;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double norm2(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

}  // namespace testing
