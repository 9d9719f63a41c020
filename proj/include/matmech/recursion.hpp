#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "matmech/ansatz.hpp"
#include "matmech/errors.hpp"
#include "matmech/params.hpp"
#include "matmech/perturbation.hpp"

namespace matmech {

/// a^(order)(n + row, n + col), stored with row >= col.
struct AmplitudeFactor {
  int order;
  int row;
  int col;
  auto operator<=>(const AmplitudeFactor&) const = default;
};

/// w^(order)(n + row, n + col).
struct FrequencyFactor {
  int order;
  int row;
  int col;
  auto operator<=>(const FrequencyFactor&) const = default;
};

struct RecursionTerm {
  double coefficient;
  std::vector<FrequencyFactor> frequencies;
  std::vector<AmplitudeFactor> amplitudes;
};

/// The coefficient of lambda^(s(alpha) + k) in the (n, n - alpha) component of
/// the equation of motion, divided by weight(alpha): a polynomial in the a^(j)
/// and w^(j) around level n.
class Recursion {
 public:
  Recursion(int band, int order, int force_exponent, std::vector<RecursionTerm> terms)
      : band_(band), order_(order), force_exponent_(force_exponent), terms_(std::move(terms)) {}

  int band() const { return band_; }
  int order() const { return order_; }
  int force_exponent() const { return force_exponent_; }
  const std::vector<RecursionTerm>& terms() const { return terms_; }

  /// Sum of the terms and sum of their magnitudes at level n.
  /// `amp(k, i, j)` returns a^(k)(i, j), `freq(k, i, j)` returns w^(k)(i, j);
  /// factors touching a negative level are skipped as zero.
  template <class Amplitude, class Frequency>
  std::pair<double, double> evaluate(int n, Amplitude&& amp, Frequency&& freq) const {
    double sum = 0.0;
    double magnitude = 0.0;
    for (const RecursionTerm& term : terms_) {
      double value = term.coefficient;
      for (const AmplitudeFactor& f : term.amplitudes) {
        if (n + f.row < 0 || n + f.col < 0) {
          value = 0.0;
          break;
        }
        value *= amp(f.order, n + f.row, n + f.col);
      }
      if (value != 0.0) {
        for (const FrequencyFactor& f : term.frequencies) {
          if (n + f.row < 0 || n + f.col < 0) {
            value = 0.0;
            break;
          }
          value *= freq(f.order, n + f.row, n + f.col);
        }
      }
      sum += value;
      magnitude += std::abs(value);
    }
    return {sum, magnitude};
  }

  /// Residual at level n of a solution, relative to the size of its terms.
  double residual(const PerturbSolution& sol, int n) const {
    const auto [sum, magnitude] = evaluate(
        n, [&](int k, int i, int j) { return sol.a(k, i, j); },
        [&](int k, int i, int j) { return sol.omega(k, i, j); });
    return magnitude > 0.0 ? std::abs(sum) / magnitude : 0.0;
  }

 private:
  int band_;
  int order_;
  int force_exponent_;
  std::vector<RecursionTerm> terms_;
};

namespace detail {

using TermKey = std::pair<std::vector<FrequencyFactor>, std::vector<AmplitudeFactor>>;

inline void accumulate(std::map<TermKey, double>& terms, double coefficient,
                       std::vector<FrequencyFactor> freqs, std::vector<AmplitudeFactor> amps) {
  for (AmplitudeFactor& a : amps)
    if (a.row < a.col) std::swap(a.row, a.col);
  std::sort(freqs.begin(), freqs.end());
  std::sort(amps.begin(), amps.end());
  terms[{std::move(freqs), std::move(amps)}] += coefficient;
}

/// Visits every way of writing `remaining` as an ordered sum of `slots` non-negative parts.
template <class Visit>
void compositions(int remaining, int slots, std::vector<int>& parts, Visit&& visit) {
  if (slots == 0) {
    if (remaining == 0) visit(parts);
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    parts.push_back(v);
    compositions(remaining - v, slots - 1, parts, visit);
    parts.pop_back();
  }
}

}  // namespace detail

/// Generates the order-k recursion relation of band alpha by substituting the
/// ansatz into [w0^2 - w^2(n, n-alpha)] X(n, n-alpha) + lambda (X^p)(n, n-alpha) = 0.
inline Recursion build_recursions(const OscillatorParams& params, int alpha, int k) {
  const int p = params.force_exponent;
  if (p != 2 && p != 3) throw Error(ErrorKind::unsupported_force, "force exponent must be 2 or 3");
  if (k < 0 || k > 2)
    throw Error(ErrorKind::unimplemented_order, "recursion order " + std::to_string(k));
  if (alpha < 0) throw Error(ErrorKind::invalid_input, "band index must be non-negative");

  const int s_alpha = leading_power(p, alpha);
  const int total = s_alpha + k;
  const double w0_sq = params.omega0 * params.omega0;
  std::map<detail::TermKey, double> terms;

  // [w0^2 - w^2] X(n, n-alpha)
  for (int l = s_alpha; l <= total; ++l) {
    const int kk = l - s_alpha;
    const int i = total - l;
    const AmplitudeFactor amp{kk, 0, -alpha};
    if (i == 0) detail::accumulate(terms, w0_sq, {}, {amp});
    for (int a = 0; a <= i; ++a)
      detail::accumulate(terms, -1.0, {{a, 0, -alpha}, {i - a, 0, -alpha}}, {amp});
  }

  // lambda (X^p)(n, n-alpha): all paths n -> n - alpha in p jumps
  if (total >= 1) {
    const int reach = 2 * total + 1;
    std::vector<int> bands(static_cast<std::size_t>(p), -reach);
    while (true) {
      int band_sum = 0;
      int base = 0;
      bool admissible = true;
      for (int b : bands) {
        band_sum += b;
        base += leading_power(p, b);
      }
      admissible = band_sum == alpha && base <= total - 1;
      if (admissible) {
        double weight = 1.0 / amplitude_weight(alpha);
        for (int b : bands) weight *= amplitude_weight(b);
        std::vector<int> extra;
        detail::compositions(total - 1 - base, p, extra, [&](const std::vector<int>& parts) {
          std::vector<AmplitudeFactor> amps;
          int level = 0;
          for (std::size_t f = 0; f < bands.size(); ++f) {
            amps.push_back({parts[f], level, level - bands[f]});
            level -= bands[f];
          }
          detail::accumulate(terms, weight, {}, std::move(amps));
        });
      }
      std::size_t pos = 0;
      while (pos < bands.size() && bands[pos] == reach) bands[pos++] = -reach;
      if (pos == bands.size()) break;
      ++bands[pos];
    }
  }

  std::vector<RecursionTerm> out;
  for (auto& [key, coefficient] : terms) {
    if (coefficient == 0.0) continue;
    out.push_back({coefficient, key.first, key.second});
  }
  return Recursion(alpha, k, p, std::move(out));
}

}  // namespace matmech
