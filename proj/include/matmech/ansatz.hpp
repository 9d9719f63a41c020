#pragma once

#include <cstdlib>

namespace matmech {

// Bookkeeping of the perturbative ansatz X(n, n - alpha) = weight(alpha)
// lambda^s(alpha) a(n, n - alpha), with a = a^(0) + lambda a^(1) + ...
//
// Quadratic force: s = |alpha| - 1 for alpha != 0 and s = 1 on the diagonal.
// Cubic force: only odd bands survive and they rise every second harmonic,
// s = (|alpha| - 1) / 2; even bands are stored with s = |alpha| / 2 (s = 1 on
// the diagonal) and come out identically zero.

inline int leading_power(int force_exponent, int alpha) {
  alpha = std::abs(alpha);
  if (alpha == 0) return 1;
  if (force_exponent == 2) return alpha - 1;
  return alpha / 2;
}

inline double amplitude_weight(int alpha) { return alpha == 0 ? 1.0 : 0.5; }

/// Widest band that can be non-zero in the lambda^j coefficient of X.
inline int band_reach(int force_exponent, int total_order) {
  return (force_exponent - 1) * total_order + 1;
}

}  // namespace matmech
