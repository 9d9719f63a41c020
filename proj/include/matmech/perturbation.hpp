#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "matmech/amplitude.hpp"
#include "matmech/ansatz.hpp"
#include "matmech/band_array.hpp"
#include "matmech/errors.hpp"
#include "matmech/frequency_grid.hpp"
#include "matmech/params.hpp"

namespace matmech {

/// Order-by-order solution of the anharmonic oscillator.
///
/// Internally the amplitudes are kept as a power series in lambda,
/// X = sum_j lambda^j x_j, and the frequency potential as
/// Omega = sum_j lambda^j Omega_j. The per-band coefficients a^(k) of the
/// ansatz are views into that series: a^(k)(n, n - alpha) =
/// x_{s(alpha)+k}(n, n - alpha) / weight(alpha).
///
/// The series is computed on a padded level range so that every level up to
/// n_max() is free of truncation error.
class PerturbSolution {
 public:
  PerturbSolution(OscillatorParams params, int order, int band_max, int n_max,
                  std::vector<BandAmplitudeArray> series, std::vector<std::vector<double>> potential)
      : params_(params),
        order_(order),
        band_max_(band_max),
        n_max_(n_max),
        series_(std::move(series)),
        potential_(std::move(potential)) {}

  const OscillatorParams& params() const { return params_; }
  int force_exponent() const { return params_.force_exponent; }
  /// Highest per-band order K of the a^(k).
  int order() const { return order_; }
  /// Highest power of lambda held in the series.
  int total_order() const { return static_cast<int>(series_.size()) - 1; }
  int band_max() const { return band_max_; }
  int n_max() const { return n_max_; }
  /// Number of levels actually computed (n_max() plus padding).
  int computed_levels() const { return series_.empty() ? 0 : series_.front().n_max() + 1; }

  /// lambda^j coefficient of X on the padded level range.
  const BandAmplitudeArray& series(int j) const { return series_.at(static_cast<std::size_t>(j)); }

  /// lambda^j coefficient of the frequency potential.
  double potential(int j, int n) const {
    return potential_.at(static_cast<std::size_t>(j)).at(static_cast<std::size_t>(n));
  }

  /// a^(k)(n, m); zero when either level is negative.
  double a(int k, int n, int m) const {
    if (n < 0 || m < 0) return 0.0;
    const int alpha = n - m;
    const int j = leading_power(force_exponent(), alpha) + k;
    if (k < 0 || j > total_order())
      throw Error(ErrorKind::order, "a^(" + std::to_string(k) + ") of band " +
                                        std::to_string(alpha) + " needs lambda^" +
                                        std::to_string(j) + ", solution holds " +
                                        std::to_string(total_order()));
    return series(j).real(n, m) / amplitude_weight(alpha);
  }

  /// w^(k)(n, m) = Omega_k(n) - Omega_k(m); zero when either level is negative.
  double omega(int k, int n, int m) const {
    if (n < 0 || m < 0) return 0.0;
    if (k < 0 || k > total_order())
      throw Error(ErrorKind::order, "frequency order " + std::to_string(k) + " not computed");
    return potential(k, n) - potential(k, m);
  }

 private:
  OscillatorParams params_;
  int order_;
  int band_max_;
  int n_max_;
  std::vector<BandAmplitudeArray> series_;
  std::vector<std::vector<double>> potential_;
};

namespace detail {

/// Sum over a+b = i of w_a(n, m) w_b(n, m): the lambda^i part of w^2.
inline double omega_squared(const std::vector<std::vector<double>>& potential, int i, int n, int m) {
  double sum = 0.0;
  for (int a = 0; a <= i; ++a) {
    const double wa = potential[static_cast<std::size_t>(a)][static_cast<std::size_t>(n)] -
                      potential[static_cast<std::size_t>(a)][static_cast<std::size_t>(m)];
    const double wb = potential[static_cast<std::size_t>(i - a)][static_cast<std::size_t>(n)] -
                      potential[static_cast<std::size_t>(i - a)][static_cast<std::size_t>(m)];
    sum += wa * wb;
  }
  return sum;
}

inline BandAmplitudeArray add(const BandAmplitudeArray& x, const BandAmplitudeArray& y) {
  const int band = std::max(x.band_max(), y.band_max());
  BandAmplitudeArray out(x.n_max(), band, Symmetry::general);
  for (int n = 0; n <= x.n_max(); ++n) {
    for (int m = std::max(0, n - band); m <= std::min(x.n_max(), n + band); ++m)
      out.assign(n, m, x(n, m) + y(n, m));
    out.mark_row(n, x.row_exact(n) && y.row_exact(n));
  }
  return out;
}

/// lambda^t coefficient of X^power, given the series coefficients x_0..x_t.
inline BandAmplitudeArray power_coefficient(const std::vector<BandAmplitudeArray>& x, int power, int t) {
  const int n_max = x.front().n_max();
  if (power == 1) return x[static_cast<std::size_t>(t)];
  BandAmplitudeArray sum(n_max, 0, Symmetry::general);
  for (int first = 0; first <= t; ++first) {
    const BandAmplitudeArray rest = power_coefficient(x, power - 1, t - first);
    sum = add(sum, multiply(x[static_cast<std::size_t>(first)], rest));
  }
  return sum;
}

inline int default_band_max(int force_exponent, int order) {
  return force_exponent == 2 ? std::max(3, order + 1) : 2 * order + 1;
}

inline int required_total_order(int force_exponent, int order, int band_max) {
  int total = leading_power(force_exponent, 0) + order;
  for (int alpha = 1; alpha <= band_max; ++alpha)
    total = std::max(total, leading_power(force_exponent, alpha) + order);
  return total;
}

inline int level_padding(int force_exponent, int total_order) {
  return 2 * (total_order + 1) * band_reach(force_exponent, total_order) + 8;
}

}  // namespace detail

/// Solves the recursion relations of x'' + w0^2 x + lambda x^p = 0 together
/// with the quantum condition, order by order in lambda, for per-band orders
/// k <= order (at most 2). band_max defaults to max(3, order + 1) for p = 2
/// and 2 order + 1 for p = 3.
///
/// At each power j of lambda:
///  - the (n, n-1) equation of motion fixes w_j(n, n-1), hence Omega_j;
///  - every other band follows from its equation of motion, whose linear
///    coefficient w0^2 - (alpha w0)^2 is non-zero;
///  - the quantum condition becomes a first-order difference equation for the
///    (n, n-1) band, summed forward from the floor X(0, -1) = 0.
inline PerturbSolution solve_perturbative(const OscillatorParams& params, int order, int n_max,
                                          int band_max = -1) {
  params.validate();
  if (order < 0 || order > 2)
    throw Error(ErrorKind::unimplemented_order,
                "perturbative order " + std::to_string(order) + " (supported: 0..2)");
  if (n_max < order + 3)
    throw Error(ErrorKind::dimension, "n_max must be at least order + 3");
  const int p = params.force_exponent;
  if (band_max < 0) band_max = detail::default_band_max(p, order);
  if (band_max < 1) throw Error(ErrorKind::dimension, "band_max must be at least 1");

  const int total = detail::required_total_order(p, order, band_max);
  const int levels = n_max + detail::level_padding(p, total);
  const double w0 = params.omega0;

  std::vector<BandAmplitudeArray> x;
  std::vector<std::vector<double>> potential;
  x.reserve(static_cast<std::size_t>(total + 1));

  for (int j = 0; j <= total; ++j) {
    const BandAmplitudeArray forcing = j == 0 ? BandAmplitudeArray(levels, 0, Symmetry::general)
                                              : detail::power_coefficient(x, p, j - 1);

    // Frequencies from the first band.
    std::vector<double> omega_j(static_cast<std::size_t>(levels + 1), 0.0);
    if (j == 0) {
      for (int n = 0; n <= levels; ++n) omega_j[static_cast<std::size_t>(n)] = (n + 0.5) * w0;
    } else {
      const BandAmplitudeArray& x0 = x[0];
      for (int n = 1; n <= levels; ++n) {
        double rhs = forcing.real(n, n - 1);
        for (int i = 1; i < j; ++i)
          rhs -= detail::omega_squared(potential, i, n, n - 1) *
                 x[static_cast<std::size_t>(j - i)].real(n, n - 1);
        double cross = 0.0;
        for (int a = 1; a < j; ++a) {
          cross += (potential[static_cast<std::size_t>(a)][static_cast<std::size_t>(n)] -
                    potential[static_cast<std::size_t>(a)][static_cast<std::size_t>(n - 1)]) *
                   (potential[static_cast<std::size_t>(j - a)][static_cast<std::size_t>(n)] -
                    potential[static_cast<std::size_t>(j - a)][static_cast<std::size_t>(n - 1)]);
        }
        rhs -= cross * x0.real(n, n - 1);
        const double w = rhs / (2.0 * w0 * x0.real(n, n - 1));
        omega_j[static_cast<std::size_t>(n)] = omega_j[static_cast<std::size_t>(n - 1)] + w;
      }
    }
    potential.push_back(std::move(omega_j));

    // Bands other than the first from the equation of motion.
    const int reach = band_reach(p, j);
    BandAmplitudeArray xj(levels, reach, Symmetry::real_symmetric);
    for (int n = 0; n <= levels; ++n) {
      for (int alpha = 0; alpha <= reach; ++alpha) {
        const int m = n - alpha;
        if (alpha == 1 || m < 0) continue;
        double rhs = -forcing.real(n, m);
        for (int i = 1; i <= j; ++i)
          rhs += detail::omega_squared(potential, i, n, m) * x[static_cast<std::size_t>(j - i)].real(n, m);
        const double linear = w0 * w0 - detail::omega_squared(potential, 0, n, m);
        xj.set(n, m, rhs / linear);
      }
    }
    x.push_back(std::move(xj));

    // First band from the quantum condition.
    auto band_energy = [&](int alpha, int row, bool skip_unknown) {
      // lambda^j part of X(row, row-alpha)^2 w(row, row-alpha)
      const int col = row - alpha;
      if (col < 0 || row > levels) return 0.0;
      double sum = 0.0;
      for (int a = 0; a <= j; ++a) {
        for (int b = 0; a + b <= j; ++b) {
          if (skip_unknown && (a == j || b == j)) continue;
          const int c = j - a - b;
          sum += x[static_cast<std::size_t>(a)].real(row, col) * x[static_cast<std::size_t>(b)].real(row, col) *
                 (potential[static_cast<std::size_t>(c)][static_cast<std::size_t>(row)] -
                  potential[static_cast<std::size_t>(c)][static_cast<std::size_t>(col)]);
        }
      }
      return sum;
    };

    BandAmplitudeArray& target = x.back();
    const int wide = band_reach(p, j);
    double first_band = 0.0;  // lambda^j part of X(n, n-1)^2 w(n, n-1); zero at the floor
    for (int n = 0; n < levels; ++n) {
      double rhs = j == 0 ? params.hbar / (2.0 * params.mass) : 0.0;
      for (int alpha = 2; alpha <= wide; ++alpha)
        rhs -= band_energy(alpha, n + alpha, false) - band_energy(alpha, n, false);
      first_band += rhs;
      const int row = n + 1;
      const double w = potential[0][static_cast<std::size_t>(row)] - potential[0][static_cast<std::size_t>(row - 1)];
      double value = 0.0;
      if (j == 0) {
        if (!(first_band > 0.0))
          throw Error(ErrorKind::numeric, "quantum condition gives non-positive |X(" +
                                              std::to_string(row) + ", " + std::to_string(row - 1) + ")|^2");
        value = std::sqrt(first_band / w);
      } else {
        value = (first_band - band_energy(1, row, true)) / (2.0 * x[0].real(row, row - 1) * w);
      }
      target.set(row, row - 1, value);
    }
  }

  // Rows well inside the padding are as exact as rows <= n_max.
  const int exact_limit = n_max + detail::level_padding(p, total) / 2;
  for (auto& xj : x) {
    for (int n = 0; n <= xj.n_max(); ++n) xj.mark_row(n, n <= exact_limit);
  }
  return PerturbSolution(params, order, band_max, n_max, std::move(x), std::move(potential));
}

/// The harmonic oscillator directly: only adjacent levels are connected, the
/// equation of motion forces w(n, n-1) = w0 and the quantum condition, summed
/// up from the ground state, gives X(n, n-1)^2 = n hbar / (2 m w0).
inline PerturbSolution sho_solve(const OscillatorParams& params, int n_max) {
  params.validate();
  if (params.lambda != 0.0)
    throw Error(ErrorKind::misuse, "sho_solve requires lambda = 0");
  if (n_max < 1) throw Error(ErrorKind::dimension, "sho_solve needs n_max >= 1");
  const double w0 = params.omega0;
  std::vector<double> potential(static_cast<std::size_t>(n_max + 1));
  for (int n = 0; n <= n_max; ++n) potential[static_cast<std::size_t>(n)] = (n + 0.5) * w0;

  BandAmplitudeArray x(n_max, 1, Symmetry::real_symmetric);
  double squared = 0.0;  // |X(0, -1)|^2 = 0
  for (int n = 1; n <= n_max; ++n) {
    // 4 pi m (|X(n, n-1)|^2 - |X(n-1, n-2)|^2) w0 = h
    squared += params.planck() / (4.0 * std::numbers::pi * params.mass * w0);
    x.set(n, n - 1, std::sqrt(squared));
  }
  std::vector<BandAmplitudeArray> series;
  series.push_back(std::move(x));
  return PerturbSolution(params, 0, 1, n_max, std::move(series), {std::move(potential)});
}

/// X and Omega at a numerical lambda, summing a^(k) for k <= order() on bands
/// up to band_max(). Levels 0..n_max().
inline MotionRepresentation assemble_motion(const PerturbSolution& sol, double lambda) {
  const int n_max = sol.n_max();
  const int p = sol.force_exponent();
  BandAmplitudeArray x(n_max, sol.band_max(), Symmetry::real_symmetric);
  for (int n = 0; n <= n_max; ++n) {
    for (int alpha = 0; alpha <= sol.band_max() && n - alpha >= 0; ++alpha) {
      const int s = leading_power(p, alpha);
      double value = 0.0;
      for (int k = sol.order(); k >= 0; --k) {
        const int j = s + k;
        if (j > sol.total_order()) continue;
        value += std::pow(lambda, j) * sol.series(j).real(n, n - alpha);
      }
      x.set(n, n - alpha, value);
    }
  }
  std::vector<double> potential(static_cast<std::size_t>(n_max + 1), 0.0);
  for (int n = 0; n <= n_max; ++n) {
    double value = 0.0;
    for (int k = std::min(sol.order(), sol.total_order()); k >= 0; --k)
      value += std::pow(lambda, k) * sol.potential(k, n);
    potential[static_cast<std::size_t>(n)] = value;
  }
  OscillatorParams params = sol.params();
  params.lambda = lambda;
  return MotionRepresentation(std::move(x), FrequencyGrid(std::move(potential)), params);
}

/// Residual of the lambda^j part of the quantum condition at every level
/// 0..n_max, normalised by the magnitude of the terms that enter it.
inline std::vector<double> quantum_condition_order_residual(const PerturbSolution& sol, int j) {
  if (j < 0 || j > sol.total_order())
    throw Error(ErrorKind::order, "quantum condition order beyond solution");
  const int levels = sol.computed_levels() - 1;
  const int wide = band_reach(sol.force_exponent(), sol.total_order());
  auto part = [&](int alpha, int row, double& magnitude) {
    const int col = row - alpha;
    if (col < 0 || row > levels) return 0.0;
    double sum = 0.0;
    for (int a = 0; a <= j; ++a) {
      for (int b = 0; a + b <= j; ++b) {
        const int c = j - a - b;
        const double term = sol.series(a).real(row, col) * sol.series(b).real(row, col) *
                            (sol.potential(c, row) - sol.potential(c, col));
        sum += term;
        magnitude += std::abs(term);
      }
    }
    return sum;
  };
  std::vector<double> out(static_cast<std::size_t>(sol.n_max() + 1));
  const double target = j == 0 ? sol.params().hbar / (2.0 * sol.params().mass) : 0.0;
  for (int n = 0; n <= sol.n_max(); ++n) {
    double magnitude = target;
    double sum = -target;
    for (int alpha = 1; alpha <= wide; ++alpha) sum += part(alpha, n + alpha, magnitude) - part(alpha, n, magnitude);
    out[static_cast<std::size_t>(n)] = magnitude > 0.0 ? sum / magnitude : 0.0;
  }
  return out;
}

/// Structure constant A_alpha of the lowest-order amplitudes,
/// a^(0)(n, n-alpha) = A_alpha beta^alpha / w0^(2(alpha-1)) sqrt(n! / (n-alpha)!).
struct StructureConstant {
  int band;
  double value;
  double spread;  ///< largest relative deviation over the levels sampled
};

inline std::vector<StructureConstant> extract_structure_constants(const PerturbSolution& sol,
                                                                  double tolerance = 1e-10) {
  if (sol.force_exponent() != 2)
    throw Error(ErrorKind::unsupported_force, "structure constants are defined for the quadratic force");
  const double beta = sol.params().beta();
  const double w0 = sol.params().omega0;
  std::vector<StructureConstant> out;
  for (int alpha = 1; alpha <= sol.band_max(); ++alpha) {
    if (leading_power(2, alpha) > sol.total_order()) break;
    std::vector<double> samples;
    for (int n = alpha; n <= sol.n_max(); ++n) {
      double falling = 1.0;
      for (int i = 0; i < alpha; ++i) falling *= static_cast<double>(n - i);
      samples.push_back(sol.a(0, n, n - alpha) * std::pow(w0, 2 * (alpha - 1)) /
                        (std::pow(beta, alpha) * std::sqrt(falling)));
    }
    if (samples.empty()) break;
    const double ref = samples.front();
    double spread = 0.0;
    for (double s : samples) spread = std::max(spread, std::abs(s - ref) / std::max(std::abs(ref), 1e-300));
    if (spread > tolerance)
      throw Error(ErrorKind::structure_violation,
                  "A_" + std::to_string(alpha) + " varies with n by " + std::to_string(spread));
    out.push_back({alpha, ref, spread});
  }
  return out;
}

/// Tabulated closed forms for the quadratic force (a^(k)(n, n-alpha)).
inline double closed_form_amplitude(int k, int n, int alpha, const OscillatorParams& params) {
  if (params.force_exponent != 2)
    throw Error(ErrorKind::no_closed_form, "closed forms are tabulated for the quadratic force only");
  if (alpha < 0) return closed_form_amplitude(k, n - alpha, -alpha, params);
  if (n < 0 || n - alpha < 0) return 0.0;
  const double beta = params.beta();
  const double w0 = params.omega0;
  const double dn = n;
  switch (k * 10 + alpha) {
    case 0: return -beta * beta / (4.0 * w0 * w0) * (2.0 * dn + 1.0);
    case 1: return beta * std::sqrt(dn);
    case 2: return beta * beta / (6.0 * w0 * w0) * std::sqrt(dn * (dn - 1.0));
    case 3: return std::pow(beta, 3) / (48.0 * std::pow(w0, 4)) * std::sqrt(dn * (dn - 1.0) * (dn - 2.0));
    case 10:
    case 11:
    case 12: return 0.0;
    case 20: return -std::pow(beta, 4) / (72.0 * std::pow(w0, 6)) * (30.0 * dn * dn + 30.0 * dn + 11.0);
    case 21: return 11.0 * std::pow(beta, 3) / (72.0 * std::pow(w0, 4)) * dn * std::sqrt(dn);
    case 22: return 3.0 * std::pow(beta, 4) / (32.0 * std::pow(w0, 6)) * (2.0 * dn - 1.0) * std::sqrt(dn * (dn - 1.0));
    default: break;
  }
  throw Error(ErrorKind::no_closed_form,
              "no closed form for a^(" + std::to_string(k) + ") on band " + std::to_string(alpha));
}

/// Tabulated closed forms for w^(k)(n, n-alpha), quadratic force.
inline double closed_form_frequency(int k, int n, int alpha, const OscillatorParams& params) {
  if (params.force_exponent != 2)
    throw Error(ErrorKind::no_closed_form, "closed forms are tabulated for the quadratic force only");
  const double beta = params.beta();
  const double w0 = params.omega0;
  if (k == 0 && alpha >= 1) return alpha * w0;
  if (k == 1 && alpha == 1) return 0.0;
  if (k == 2 && alpha == 1) return -5.0 * beta * beta / (12.0 * std::pow(w0, 3)) * n;
  if (k == 2 && alpha == 2) return -5.0 * beta * beta / (12.0 * std::pow(w0, 3)) * (2.0 * n - 1.0);
  throw Error(ErrorKind::no_closed_form,
              "no closed form for w^(" + std::to_string(k) + ") on band " + std::to_string(alpha));
}

}  // namespace matmech
