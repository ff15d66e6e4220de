#ifndef CFD_LOGSPACE_HPP
#define CFD_LOGSPACE_HPP

#include <cmath>
#include <limits>

namespace cfd {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without leaving the log domain.
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

}  // namespace cfd

#endif  // CFD_LOGSPACE_HPP
