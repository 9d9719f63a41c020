#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "matmech/amplitude.hpp"
#include "matmech/ansatz.hpp"
#include "matmech/band_array.hpp"
#include "matmech/errors.hpp"
#include "matmech/perturbation.hpp"

namespace matmech {

/// The lambda^t part of W = m xdot^2 / 2 + m w0^2 x^2 / 2 + m lambda x^(p+1) / (p+1),
/// split into its three pieces.
struct EnergyOrder {
  BandAmplitudeArray kinetic;
  BandAmplitudeArray harmonic;
  BandAmplitudeArray anharmonic;
  BandAmplitudeArray total;
};

/// Energy representatives W(n, m) organised by power of lambda, on levels
/// 0..n_max of the solution. Off-diagonal entries must vanish for energy to be
/// conserved; that is checked by callers, not assumed.
class EnergyMatrix {
 public:
  explicit EnergyMatrix(std::vector<EnergyOrder> orders) : orders_(std::move(orders)) {}

  int order_cap() const { return static_cast<int>(orders_.size()) - 1; }
  const EnergyOrder& order(int t) const { return orders_.at(static_cast<std::size_t>(t)); }

  double total(int t, int n, int m) const { return order(t).total.real(n, m); }
  double kinetic(int t, int n, int m) const { return order(t).kinetic.real(n, m); }
  double harmonic(int t, int n, int m) const { return order(t).harmonic.real(n, m); }
  double anharmonic(int t, int n, int m) const { return order(t).anharmonic.real(n, m); }

 private:
  std::vector<EnergyOrder> orders_;
};

namespace detail {

inline BandAmplitudeArray scaled(const BandAmplitudeArray& x, double factor) {
  BandAmplitudeArray out(x.n_max(), x.band_max(), Symmetry::general);
  for (int n = 0; n <= x.n_max(); ++n) {
    for (int m = std::max(0, n - x.band_max()); m <= std::min(x.n_max(), n + x.band_max()); ++m)
      out.assign(n, m, factor * x(n, m));
    out.mark_row(n, x.row_exact(n));
  }
  return out;
}

}  // namespace detail

/// Assembles W(n, m) term by term with the multiplication law, through
/// lambda^order_cap. The kinetic term uses xdot(n, k) = i w(n, k) X(n, k), so
/// (xdot^2)(n, m) = sum_k w(n, k) w(m, k) X(n, k) X(k, m).
inline EnergyMatrix energy_matrix(const PerturbSolution& sol, int order_cap) {
  if (order_cap < 0 || order_cap > sol.total_order())
    throw Error(ErrorKind::order, "energy through lambda^" + std::to_string(order_cap) +
                                      " needs a solution holding that power (holds " +
                                      std::to_string(sol.total_order()) + ")");
  const OscillatorParams& params = sol.params();
  const int p = sol.force_exponent();
  const int levels = sol.computed_levels() - 1;
  const double m = params.mass;

  std::vector<BandAmplitudeArray> x;
  std::vector<BandAmplitudeArray> rate;  // real part of the lambda^t coefficient of xdot / i
  for (int t = 0; t <= order_cap; ++t) {
    x.push_back(sol.series(t));
    const int band = sol.series(t).band_max();
    BandAmplitudeArray d(levels, band, Symmetry::general);
    for (int n = 0; n <= levels; ++n) {
      for (int k = std::max(0, n - band); k <= std::min(levels, n + band); ++k) {
        double value = 0.0;
        for (int c = 0; c <= t; ++c) value += sol.omega(c, n, k) * sol.series(t - c).real(n, k);
        d.assign(n, k, value);
      }
      d.mark_row(n, sol.series(t).row_exact(n));
    }
    rate.push_back(std::move(d));
  }

  std::vector<EnergyOrder> orders;
  for (int t = 0; t <= order_cap; ++t) {
    const BandAmplitudeArray x2 = detail::power_coefficient(x, 2, t);
    const BandAmplitudeArray d2 = detail::power_coefficient(rate, 2, t);
    const BandAmplitudeArray kinetic = detail::scaled(d2, -0.5 * m);
    const BandAmplitudeArray harmonic = detail::scaled(x2, 0.5 * m * params.omega0 * params.omega0);
    BandAmplitudeArray anharmonic(levels, 0, Symmetry::general);
    if (t >= 1)
      anharmonic = detail::scaled(detail::power_coefficient(x, p + 1, t - 1), m / (p + 1));
    const BandAmplitudeArray total = detail::add(detail::add(kinetic, harmonic), anharmonic);
    orders.push_back({kinetic.leading_rows(sol.n_max()), harmonic.leading_rows(sol.n_max()),
                      anharmonic.leading_rows(sol.n_max()), total.leading_rows(sol.n_max())});
  }
  return EnergyMatrix(std::move(orders));
}

/// W(n, n) through lambda^2 with its three pieces.
struct EnergySeries {
  int level;
  double coefficient[3];  ///< lambda^0, lambda^1, lambda^2
  double kinetic2;
  double harmonic2;
  double anharmonic2;

  double at(double lambda) const {
    return coefficient[0] + lambda * coefficient[1] + lambda * lambda * coefficient[2];
  }
};

inline std::vector<EnergySeries> energy_diagonal_series(const PerturbSolution& sol) {
  if (sol.order() < 2 || sol.total_order() < 2)
    throw Error(ErrorKind::order, "the lambda^2 energy needs a second-order solution");
  const EnergyMatrix w = energy_matrix(sol, 2);
  std::vector<EnergySeries> out;
  for (int n = 0; n <= sol.n_max(); ++n) {
    out.push_back({n,
                   {w.total(0, n, n), w.total(1, n, n), w.total(2, n, n)},
                   w.kinetic(2, n, n),
                   w.harmonic(2, n, n),
                   w.anharmonic(2, n, n)});
  }
  return out;
}

/// Closed-form second-order energy of the quadratic force,
/// (n + 1/2) hbar w0 - 5 lambda^2 hbar^2 / (12 m w0^4) (n^2 + n + 11/30), and its pieces.
inline EnergySeries closed_form_energy(int n, const OscillatorParams& params) {
  if (params.force_exponent != 2)
    throw Error(ErrorKind::no_closed_form, "closed-form energy is tabulated for the quadratic force only");
  const double m = params.mass;
  const double w0 = params.omega0;
  const double hbar = params.hbar;
  const double beta4 = std::pow(params.beta(), 4);
  const double shape = n * n + n + 11.0 / 30.0;
  EnergySeries e{n, {(n + 0.5) * hbar * w0, 0.0, -5.0 * hbar * hbar / (12.0 * m * std::pow(w0, 4)) * shape},
                 0.0, 0.0, 0.0};
  e.harmonic2 = 0.5 * m * w0 * w0 * 5.0 * beta4 / (12.0 * std::pow(w0, 4)) * shape;
  e.kinetic2 = -0.5 * m * w0 * w0 * 5.0 * beta4 / (24.0 * std::pow(w0, 4)) * shape;
  e.anharmonic2 = -5.0 * m * beta4 / (24.0 * w0 * w0) * shape;
  return e;
}

}  // namespace matmech
