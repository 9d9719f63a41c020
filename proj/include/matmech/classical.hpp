#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "matmech/ansatz.hpp"
#include "matmech/errors.hpp"
#include "matmech/params.hpp"

namespace matmech {

/// Exponential Fourier coefficients X_alpha of a real even series, alpha >= 0,
/// with X_-alpha = X_alpha implied. A cosine series sum c_alpha cos(alpha w t)
/// maps to X_0 = c_0 and X_alpha = c_alpha / 2.
struct HarmonicSeries {
  std::vector<double> coefficients;

  int harmonic_max() const { return static_cast<int>(coefficients.size()) - 1; }

  double operator[](int alpha) const {
    alpha = std::abs(alpha);
    return alpha < static_cast<int>(coefficients.size()) ? coefficients[static_cast<std::size_t>(alpha)] : 0.0;
  }

  static HarmonicSeries from_cosine(const std::vector<double>& amplitudes) {
    HarmonicSeries out{amplitudes};
    for (std::size_t a = 1; a < out.coefficients.size(); ++a) out.coefficients[a] *= 0.5;
    return out;
  }

  std::vector<double> cosine_amplitudes() const {
    std::vector<double> out = coefficients;
    for (std::size_t a = 1; a < out.size(); ++a) out[a] *= 2.0;
    return out;
  }
};

/// Convolution over the signed harmonic index.
inline HarmonicSeries fourier_product(const HarmonicSeries& a, const HarmonicSeries& b) {
  if (a.coefficients.empty() || b.coefficients.empty()) return HarmonicSeries{{0.0}};
  const int na = a.harmonic_max();
  const int nb = b.harmonic_max();
  HarmonicSeries out{std::vector<double>(static_cast<std::size_t>(na + nb + 1), 0.0)};
  for (int beta = 0; beta <= na + nb; ++beta) {
    double sum = 0.0;
    for (int alpha = -na; alpha <= na; ++alpha) {
      const int rest = beta - alpha;
      if (std::abs(rest) > nb) continue;
      sum += a[alpha] * b[rest];
    }
    out.coefficients[static_cast<std::size_t>(beta)] = sum;
  }
  return out;
}

/// Either the leading amplitude a_1 or the action J fixes the solution.
struct ClassicalSeed {
  std::optional<double> amplitude;
  std::optional<double> action;

  static ClassicalSeed with_amplitude(double a1) { return {a1, std::nullopt}; }
  static ClassicalSeed with_action(double j) { return {std::nullopt, j}; }
};

class ClassicalSolution {
 public:
  ClassicalSolution(OscillatorParams params, int order, int harmonic_max, std::vector<HarmonicSeries> series,
                    std::vector<double> frequency, std::optional<double> action)
      : params_(params),
        order_(order),
        harmonic_max_(harmonic_max),
        series_(std::move(series)),
        frequency_(std::move(frequency)),
        action_(action) {}

  const OscillatorParams& params() const { return params_; }
  int order() const { return order_; }
  /// Highest harmonic kept when the series is evaluated in time.
  int harmonic_max() const { return harmonic_max_; }
  int total_order() const { return static_cast<int>(series_.size()) - 1; }
  /// Exponential coefficients of lambda^j in x(t).
  const HarmonicSeries& series(int j) const { return series_.at(static_cast<std::size_t>(j)); }
  /// Prescribed action, when the solution was quantized.
  std::optional<double> action() const { return action_; }

  /// Cosine coefficient a_alpha^(k): x = sum_alpha lambda^s(alpha) sum_k lambda^k a_alpha^(k) cos(alpha w t).
  double a(int k, int alpha) const {
    if (alpha < 0) throw Error(ErrorKind::invalid_input, "harmonic index must be non-negative");
    if (k < 0 || k > order_)
      throw Error(ErrorKind::order, "coefficient order " + std::to_string(k) + " exceeds " + std::to_string(order_));
    const int j = leading_power(params_.force_exponent, alpha) + k;
    if (j > total_order())
      throw Error(ErrorKind::order, "a_" + std::to_string(alpha) + "^(" + std::to_string(k) + ") needs lambda^" +
                                        std::to_string(j) + ", solution holds " + std::to_string(total_order()));
    const double x = series(j)[alpha];
    return alpha == 0 ? x : 2.0 * x;
  }

  /// w^(k).
  double omega(int k) const {
    if (k < 0 || k > total_order()) throw Error(ErrorKind::order, "frequency order " + std::to_string(k));
    return frequency_[static_cast<std::size_t>(k)];
  }

  /// w0 + lambda w^(1) + ... through order K.
  double frequency(double lambda) const {
    double w = 0.0;
    double power = 1.0;
    for (int k = 0; k <= order_; ++k, power *= lambda) w += power * frequency_[static_cast<std::size_t>(k)];
    return w;
  }

  /// Cosine amplitudes of the truncated series at coupling lambda.
  std::vector<double> cosine_amplitudes(double lambda) const {
    std::vector<double> out(static_cast<std::size_t>(harmonic_max_ + 1), 0.0);
    for (int alpha = 0; alpha <= harmonic_max_; ++alpha) {
      const int s = leading_power(params_.force_exponent, alpha);
      for (int k = 0; k <= order_ && s + k <= total_order(); ++k)
        out[static_cast<std::size_t>(alpha)] += std::pow(lambda, s + k) * a(k, alpha);
    }
    return out;
  }

 private:
  OscillatorParams params_;
  int order_;
  int harmonic_max_;
  std::vector<HarmonicSeries> series_;
  std::vector<double> frequency_;
  std::optional<double> action_;
};

namespace detail {

inline HarmonicSeries series_power(const std::vector<HarmonicSeries>& y, int power, int t) {
  if (power == 1) return t < static_cast<int>(y.size()) ? y[static_cast<std::size_t>(t)] : HarmonicSeries{{0.0}};
  HarmonicSeries out{{0.0}};
  for (int i = 0; i <= t; ++i) {
    HarmonicSeries term = fourier_product(y[static_cast<std::size_t>(i)], series_power(y, power - 1, t - i));
    if (term.coefficients.size() > out.coefficients.size()) out.coefficients.resize(term.coefficients.size(), 0.0);
    for (std::size_t a = 0; a < term.coefficients.size(); ++a) out.coefficients[a] += term.coefficients[a];
  }
  return out;
}

inline double frequency_squared(const std::vector<double>& w, int i) {
  double sum = 0.0;
  for (int a = 0; a <= i; ++a) sum += w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(i - a)];
  return sum;
}

/// Order-t part of 2 pi m w sum_alpha alpha^2 X_alpha^2 over signed alpha.
inline double action_order(const std::vector<HarmonicSeries>& y, const std::vector<double>& w, double mass, int t) {
  double sum = 0.0;
  for (int a = 0; a <= t; ++a)
    for (int b = 0; a + b <= t; ++b) {
      const int c = t - a - b;
      const HarmonicSeries& yb = y[static_cast<std::size_t>(b)];
      const HarmonicSeries& yc = y[static_cast<std::size_t>(c)];
      const int top = std::min(yb.harmonic_max(), yc.harmonic_max());
      double s = 0.0;
      for (int alpha = 1; alpha <= top; ++alpha) s += 2.0 * alpha * alpha * yb[alpha] * yc[alpha];
      sum += w[static_cast<std::size_t>(a)] * s;
    }
  return 2.0 * std::numbers::pi * mass * sum;
}

}  // namespace detail

/// Harmonics coupled at order K plus one guard harmonic.
inline int default_harmonic_max(int force_exponent, int order) { return (force_exponent - 1) * order + 2; }

/// Power of lambda needed to reach order K on every coupled harmonic.
inline int classical_total_order(int force_exponent, int order) {
  int total = 0;
  for (int alpha = 0; alpha <= (force_exponent - 1) * order + 1; ++alpha)
    total = std::max(total, leading_power(force_exponent, alpha) + order);
  return total;
}

/// Harmonic-balance solution of x'' + w0^2 x + lambda x^p = 0 through order K.
inline ClassicalSolution classical_solve(const OscillatorParams& params, int order, const ClassicalSeed& seed,
                                         int harmonic_max = -1) {
  params.validate();
  if (order < 0 || order > 2) throw Error(ErrorKind::unimplemented_order, "order " + std::to_string(order));
  if (!seed.amplitude && !seed.action)
    throw Error(ErrorKind::underdetermined, "either the leading amplitude or the action must be given");
  if (seed.amplitude && seed.action)
    throw Error(ErrorKind::invalid_input, "give the leading amplitude or the action, not both");
  const int p = params.force_exponent;
  if (harmonic_max < 0) harmonic_max = default_harmonic_max(p, order);
  if (harmonic_max < 1) throw Error(ErrorKind::invalid_input, "harmonic_max must be at least 1");

  const double m = params.mass;
  const double w0 = params.omega0;
  double a1 = 0.0;
  if (seed.amplitude) {
    a1 = *seed.amplitude;
    if (!(a1 >= 0.0) || !std::isfinite(a1)) throw Error(ErrorKind::invalid_input, "leading amplitude must be >= 0");
  } else {
    const double j = *seed.action;
    if (!(j >= 0.0) || !std::isfinite(j)) throw Error(ErrorKind::invalid_input, "action must be >= 0");
    a1 = std::sqrt(j / (std::numbers::pi * m * w0));
  }

  const int total = classical_total_order(p, order);
  const int reach = band_reach(p, total);
  std::vector<HarmonicSeries> y;
  std::vector<double> w{w0};
  y.push_back(HarmonicSeries{std::vector<double>(static_cast<std::size_t>(reach + 1), 0.0)});
  y[0].coefficients[1] = 0.5 * a1;

  for (int j = 1; j <= total; ++j) {
    const HarmonicSeries forcing = detail::series_power(y, p, j - 1);
    HarmonicSeries next{std::vector<double>(static_cast<std::size_t>(reach + 1), 0.0)};

    // harmonic 1 fixes w^(j); a_1 itself only moves when the action is prescribed
    double w_sq = 0.0;
    if (a1 > 0.0) {
      w_sq = forcing[1];
      for (int i = 1; i < j; ++i) w_sq -= detail::frequency_squared(w, i) * y[static_cast<std::size_t>(j - i)][1];
      w_sq /= y[0][1];
    }
    double cross = 0.0;
    for (int a = 1; a < j; ++a) cross += w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(j - a)];
    w.push_back((w_sq - cross) / (2.0 * w0));

    for (int alpha = 0; alpha <= reach; ++alpha) {
      if (alpha == 1) continue;
      double rhs = -forcing[alpha];
      for (int i = 1; i <= j; ++i)
        rhs += alpha * alpha * detail::frequency_squared(w, i) * y[static_cast<std::size_t>(j - i)][alpha];
      next.coefficients[static_cast<std::size_t>(alpha)] = rhs / (w0 * w0 * (1.0 - alpha * alpha));
    }
    y.push_back(next);

    if (seed.action && a1 > 0.0) {
      // pick X_1 at this order so that the order-j action vanishes
      const double rest = detail::action_order(y, w, m, j);
      const double slope = 2.0 * std::numbers::pi * m * w0 * 4.0 * y[0][1];
      y[static_cast<std::size_t>(j)].coefficients[1] = -rest / slope;
    }
  }
  return ClassicalSolution(params, order, harmonic_max, std::move(y), std::move(w), seed.action);
}

/// x(t) of the truncated series at coupling lambda, with its first two time derivatives.
struct ClassicalState {
  double position;
  double velocity;
  double acceleration;
};

inline ClassicalState evaluate_classical(const ClassicalSolution& sol, double lambda, double t) {
  const std::vector<double> c = sol.cosine_amplitudes(lambda);
  const double w = sol.frequency(lambda);
  ClassicalState state{0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < c.size(); ++a) {
    const double aw = static_cast<double>(a) * w;
    state.position += c[a] * std::cos(aw * t);
    state.velocity -= c[a] * aw * std::sin(aw * t);
    state.acceleration -= c[a] * aw * aw * std::cos(aw * t);
  }
  return state;
}

/// Coefficient of lambda^(s(alpha) + k) cos(alpha w t) in x'' + w0^2 x + lambda x^p,
/// relative to the size of its terms.
inline double harmonic_balance_residual(const ClassicalSolution& sol, int alpha, int k) {
  const int p = sol.params().force_exponent;
  const int t = leading_power(p, alpha) + k;
  if (t > sol.total_order()) throw Error(ErrorKind::order, "residual order beyond solution");
  std::vector<HarmonicSeries> y;
  std::vector<double> w;
  for (int j = 0; j <= sol.total_order(); ++j) {
    y.push_back(sol.series(j));
    w.push_back(sol.omega(j));
  }
  const double w0_sq = sol.params().omega0 * sol.params().omega0;
  double sum = w0_sq * y[static_cast<std::size_t>(t)][alpha];
  double magnitude = std::abs(sum);
  for (int i = 0; i <= t; ++i) {
    const double term = -alpha * alpha * detail::frequency_squared(w, i) * y[static_cast<std::size_t>(t - i)][alpha];
    sum += term;
    magnitude += std::abs(term);
  }
  if (t >= 1) {
    const double nonlinear = detail::series_power(y, p, t - 1)[alpha];
    sum += nonlinear;
    magnitude += std::abs(nonlinear);
  }
  return magnitude > 0.0 ? std::abs(sum) / magnitude : 0.0;
}

/// Action of the truncated series at params.lambda from the Fourier form,
/// cross-checked against trapezoid quadrature of the loop integral of m xdot^2.
inline double action_integral(const ClassicalSolution& sol, const OscillatorParams& params) {
  const double lambda = params.lambda;
  const std::vector<double> c = sol.cosine_amplitudes(lambda);
  const double w = sol.frequency(lambda);
  double fourier = 0.0;
  for (std::size_t a = 1; a < c.size(); ++a) fourier += static_cast<double>(a * a) * c[a] * c[a];
  fourier *= std::numbers::pi * params.mass * w;

  constexpr int samples = 256;
  const double period = 2.0 * std::numbers::pi / w;
  double quadrature = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double v = evaluate_classical(sol, lambda, period * i / samples).velocity;
    quadrature += params.mass * v * v;
  }
  quadrature *= period / samples;

  const double scale = std::max(std::abs(fourier), std::abs(quadrature));
  if (std::abs(fourier - quadrature) > 1e-8 * scale)
    throw Error(ErrorKind::inconsistency, "Fourier action " + std::to_string(fourier) + " disagrees with quadrature " +
                                              std::to_string(quadrature));
  return fourier;
}

/// max over one period of |x'' + w0^2 x + lambda x^p|.
inline double ode_residual(const ClassicalSolution& sol, double lambda, int samples) {
  if (samples < 16) throw Error(ErrorKind::invalid_input, "sample count must be at least 16");
  const double w0_sq = sol.params().omega0 * sol.params().omega0;
  const int p = sol.params().force_exponent;
  const double period = 2.0 * std::numbers::pi / sol.frequency(lambda);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const ClassicalState s = evaluate_classical(sol, lambda, period * i / samples);
    const double r = s.acceleration + w0_sq * s.position + lambda * std::pow(s.position, p);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

/// Classical solution quantized at J = n h.
inline ClassicalSolution classical_at_level(const OscillatorParams& params, int order, double n) {
  return classical_solve(params, order, ClassicalSeed::with_action(n * params.planck()));
}

/// (J(n+1) - J(n)) / h - 1 for the solutions quantized at n and n + 1, with
/// both actions measured at params.lambda.
inline double quantization_step_residual(const OscillatorParams& params, int order, int n) {
  const double lower = action_integral(classical_at_level(params, order, n), params);
  const double upper = action_integral(classical_at_level(params, order, n + 1), params);
  return (upper - lower) / params.planck() - 1.0;
}

}  // namespace matmech
