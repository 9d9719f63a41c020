#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "matmech/band_array.hpp"
#include "matmech/errors.hpp"
#include "matmech/frequency_grid.hpp"
#include "matmech/params.hpp"

namespace matmech {

/// The representation of x(t): amplitudes X(n, m) oscillating at w(n, m).
struct MotionRepresentation {
  BandAmplitudeArray amplitudes;
  FrequencyGrid frequencies;
  OscillatorParams params;

  MotionRepresentation(BandAmplitudeArray x, FrequencyGrid w, OscillatorParams p)
      : amplitudes(std::move(x)), frequencies(std::move(w)), params(p) {
    if (amplitudes.n_max() > frequencies.n_max())
      throw Error(ErrorKind::dimension, "frequency grid shorter than amplitude array");
  }
};

/// Multiplication law Z(n, m) = sum_k X(n, k) Y(k, m) on the common truncation.
///
/// The result band is X.band_max + Y.band_max. Intermediate levels above
/// n_max are discarded; a row is flagged inexact when that happened or when
/// it consumed an inexact row of either operand.
inline BandAmplitudeArray multiply(const BandAmplitudeArray& x, const BandAmplitudeArray& y) {
  if (x.n_max() != y.n_max())
    throw Error(ErrorKind::dimension, "multiply: n_max mismatch (" + std::to_string(x.n_max()) +
                                          " vs " + std::to_string(y.n_max()) + ")");
  const int n_max = x.n_max();
  const int bx = x.band_max();
  const int by = y.band_max();
  const int bz = bx + by;

  Symmetry symmetry = Symmetry::general;
  if (x.symmetry() == y.symmetry() && x.symmetry() != Symmetry::general && x == y)
    symmetry = x.symmetry();  // powers of a self-adjoint array stay self-adjoint

  BandAmplitudeArray z(n_max, bz, symmetry);
  for (int n = 0; n <= n_max; ++n) {
    const int m_lo = std::max(0, n - bz);
    const int m_hi = std::min(n_max, n + bz);
    for (int m = m_lo; m <= m_hi; ++m) {
      const int k_lo = std::max({0, n - bx, m - by});
      const int k_hi = std::min({n_max, n + bx, m + by});
      complex sum{};
      for (int k = k_lo; k <= k_hi; ++k) sum += x(n, k) * y(k, m);
      z.assign(n, m, sum);
    }
    bool exact = x.row_exact(n) && n + bx <= n_max;
    for (int k = std::max(0, n - bx); exact && k <= std::min(n_max, n + bx); ++k)
      exact = y.row_exact(k);
    z.mark_row(n, exact);
  }
  return z;
}

/// dX/dt entrywise: i w(n, m) X(n, m). Real-symmetric input becomes hermitian.
inline BandAmplitudeArray time_derivative(const MotionRepresentation& motion) {
  const BandAmplitudeArray& x = motion.amplitudes;
  const Symmetry symmetry = x.symmetry() == Symmetry::general ? Symmetry::general : Symmetry::hermitian;
  BandAmplitudeArray d(x.n_max(), x.band_max(), symmetry);
  for (int n = 0; n <= x.n_max(); ++n) {
    for (int m = std::max(0, n - x.band_max()); m <= std::min(x.n_max(), n + x.band_max()); ++m)
      d.assign(n, m, complex{0.0, motion.frequencies(n, m)} * x(n, m));
    d.mark_row(n, x.row_exact(n));
  }
  return d;
}

/// Residual of the quantum condition (Thomas-Kuhn sum rule) at every level:
///   4 pi m sum_{alpha>=0} { |X(n+alpha, n)|^2 w(n+alpha, n) - |X(n, n-alpha)|^2 w(n, n-alpha) } - h.
/// Rows within band_max of n_max see a truncated sum.
inline std::vector<double> quantum_condition_residual(const MotionRepresentation& motion) {
  const BandAmplitudeArray& x = motion.amplitudes;
  const double prefactor = 4.0 * std::numbers::pi * motion.params.mass;
  std::vector<double> residual(static_cast<std::size_t>(x.n_max() + 1));
  for (int n = 0; n <= x.n_max(); ++n) {
    double sum = 0.0;
    for (int alpha = 1; alpha <= x.band_max(); ++alpha) {
      if (n + alpha <= x.n_max())
        sum += std::norm(x(n + alpha, n)) * motion.frequencies(n + alpha, n);
      if (n - alpha >= 0) sum -= std::norm(x(n, n - alpha)) * motion.frequencies(n, n - alpha);
    }
    residual[static_cast<std::size_t>(n)] = prefactor * sum - motion.params.planck();
  }
  return residual;
}

/// Diagonal of x p - p x with p = m dx/dt, built from the multiplication law.
/// Equals i hbar at every level where the quantum condition holds.
inline std::vector<complex> commutator_diagonal(const MotionRepresentation& motion) {
  const BandAmplitudeArray& x = motion.amplitudes;
  const BandAmplitudeArray xdot = time_derivative(motion);
  const BandAmplitudeArray xp = multiply(x, xdot);
  const BandAmplitudeArray px = multiply(xdot, x);
  std::vector<complex> out(static_cast<std::size_t>(x.n_max() + 1));
  for (int n = 0; n <= x.n_max(); ++n)
    out[static_cast<std::size_t>(n)] = motion.params.mass * (xp(n, n) - px(n, n));
  return out;
}

struct EmissionRate {
  double rate;   ///< transitions per unit time P(n, n - alpha)
  double power;  ///< P hbar w(n, n - alpha)
};

/// Spontaneous emission n -> n - alpha:
///   P = e^2 / (3 pi eps0 hbar c^3) w^3 |X|^2.
inline EmissionRate emission_power(const MotionRepresentation& motion, int n, int alpha,
                                   const PhysicalConstants& consts) {
  consts.validate();
  const int m = n - alpha;
  if (n < 0 || m < 0 || n > motion.frequencies.n_max())
    throw Error(ErrorKind::invalid_input, "emission: level index out of range");
  const double w = motion.frequencies(n, m);
  if (!(w > 0.0))
    throw Error(ErrorKind::not_an_emission,
                "w(" + std::to_string(n) + ", " + std::to_string(m) + ") is not positive");
  const double hbar = motion.params.hbar;
  const double c = consts.light_speed;
  const double rate = consts.charge * consts.charge /
                      (3.0 * std::numbers::pi * consts.permittivity * hbar * c * c * c) * w * w * w *
                      std::norm(motion.amplitudes(n, m));
  return {rate, rate * hbar * w};
}

}  // namespace matmech
