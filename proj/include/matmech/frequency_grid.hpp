#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "matmech/errors.hpp"

namespace matmech {

/// Stationary-state energies W(0..n_max).
struct LevelSpectrum {
  std::vector<double> energies;

  int n_max() const { return static_cast<int>(energies.size()) - 1; }
};

/// Transition frequencies w(n, m) stored through a per-level potential
/// Omega(n), so w(n, m) = Omega(n) - Omega(m). The combination rule
/// w(n, k) + w(k, m) = w(n, m) then holds up to the rounding of one
/// subtraction, and exactly whenever the potentials are exactly representable
/// differences (integers, dyadics).
class FrequencyGrid {
 public:
  FrequencyGrid() = default;

  explicit FrequencyGrid(std::vector<double> potential) : potential_(std::move(potential)) {
    for (std::size_t n = 0; n < potential_.size(); ++n) {
      if (!std::isfinite(potential_[n]))
        throw Error(ErrorKind::invalid_input,
                    "non-finite frequency potential at level " + std::to_string(n));
    }
  }

  int n_max() const { return static_cast<int>(potential_.size()) - 1; }

  double potential(int n) const { return potential_.at(static_cast<std::size_t>(n)); }
  std::span<const double> potentials() const { return potential_; }

  /// w(n, m); levels outside the grid are a caller error.
  double operator()(int n, int m) const { return potential(n) - potential(m); }

 private:
  std::vector<double> potential_;
};

inline FrequencyGrid frequency_grid_from_levels(const LevelSpectrum& levels, double hbar) {
  if (levels.energies.empty()) throw Error(ErrorKind::invalid_input, "empty level spectrum");
  if (!(hbar > 0.0)) throw Error(ErrorKind::invalid_input, "hbar must be positive");
  std::vector<double> potential;
  potential.reserve(levels.energies.size());
  for (std::size_t n = 0; n < levels.energies.size(); ++n) {
    const double w = levels.energies[n];
    if (!std::isfinite(w))
      throw Error(ErrorKind::invalid_input, "non-finite energy at level " + std::to_string(n));
    potential.push_back(w / hbar);
  }
  return FrequencyGrid(std::move(potential));
}

}  // namespace matmech
