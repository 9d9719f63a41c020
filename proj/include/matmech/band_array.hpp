#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "matmech/errors.hpp"

namespace matmech {

using complex = std::complex<double>;

/// Symmetry carried by a BandAmplitudeArray.
///
/// Products of two different symmetric arrays are in general not symmetric
/// ((XY)^T = YX), so a third, unconstrained mode exists for them.
enum class Symmetry : std::uint8_t { real_symmetric, hermitian, general };

/// The ensemble X(n, n - alpha) for levels 0..n_max and |alpha| <= band_max.
///
/// Both level indices live in 0..n_max; any entry with an index outside that
/// range, or further than band_max from the diagonal, reads as exactly zero.
/// Negative indices are the ground-state floor and are always zero.
///
/// Each row carries an exactness flag. A row is exact when none of its entries
/// lost a contribution to the level truncation; products propagate the flag.
class BandAmplitudeArray {
 public:
  BandAmplitudeArray() = default;

  BandAmplitudeArray(int n_max, int band_max, Symmetry symmetry = Symmetry::real_symmetric)
      : n_max_(n_max),
        band_max_(band_max),
        symmetry_(symmetry),
        entries_(checked_size(n_max, band_max)),
        exact_(static_cast<std::size_t>(n_max + 1), 1) {}

  int n_max() const { return n_max_; }
  int band_max() const { return band_max_; }
  Symmetry symmetry() const { return symmetry_; }

  bool in_range(int n, int m) const {
    return n >= 0 && m >= 0 && n <= n_max_ && m <= n_max_ && std::abs(n - m) <= band_max_;
  }

  /// X(n, m); zero outside the stored range.
  complex operator()(int n, int m) const {
    return in_range(n, m) ? entries_[index(n, m)] : complex{};
  }

  double real(int n, int m) const { return (*this)(n, m).real(); }

  /// Sets X(n, m) and, for the symmetric modes, its partner X(m, n).
  void set(int n, int m, complex value) {
    if (!in_range(n, m))
      throw Error(ErrorKind::dimension,
                  "entry (" + std::to_string(n) + ", " + std::to_string(m) + ") outside array");
    if (symmetry_ == Symmetry::real_symmetric && value.imag() != 0.0)
      throw Error(ErrorKind::invalid_input, "real-symmetric array cannot hold complex entries");
    if (symmetry_ == Symmetry::hermitian && n == m && value.imag() != 0.0)
      throw Error(ErrorKind::invalid_input, "hermitian array needs a real diagonal");
    entries_[index(n, m)] = value;
    if (n == m) return;
    if (symmetry_ == Symmetry::real_symmetric) entries_[index(m, n)] = value;
    if (symmetry_ == Symmetry::hermitian) entries_[index(m, n)] = std::conj(value);
  }

  void set(int n, int m, double value) { set(n, m, complex{value, 0.0}); }

  /// Raw assignment of one entry, bypassing the symmetry partner. Used by
  /// operations that fill every entry themselves.
  void assign(int n, int m, complex value) { entries_[index(n, m)] = value; }

  bool row_exact(int n) const { return n >= 0 && n <= n_max_ && exact_[static_cast<std::size_t>(n)] != 0; }
  void mark_row(int n, bool exact) { exact_.at(static_cast<std::size_t>(n)) = exact ? 1 : 0; }

  /// Largest n such that rows 0..n are all exact, or -1.
  int exact_row_limit() const {
    int n = 0;
    while (n <= n_max_ && exact_[static_cast<std::size_t>(n)] != 0) ++n;
    return n - 1;
  }

  /// Row n is exact and at least `margin` levels below the truncation edge.
  bool trusted(int n, int margin) const { return row_exact(n) && n + margin <= n_max_; }

  /// Returns an array with the same entries and a wider or narrower band.
  BandAmplitudeArray with_band(int band_max) const {
    BandAmplitudeArray out(n_max_, band_max, symmetry_);
    for (int n = 0; n <= n_max_; ++n) {
      for (int m = std::max(0, n - band_max); m <= std::min(n_max_, n + band_max); ++m)
        out.entries_[out.index(n, m)] = (*this)(n, m);
      out.exact_[static_cast<std::size_t>(n)] = exact_[static_cast<std::size_t>(n)];
    }
    return out;
  }

  /// Keeps levels 0..n_max only.
  BandAmplitudeArray leading_rows(int n_max) const {
    if (n_max > n_max_) throw Error(ErrorKind::dimension, "leading_rows: n_max beyond array");
    BandAmplitudeArray out(n_max, band_max_, symmetry_);
    for (int n = 0; n <= n_max; ++n) {
      for (int m = std::max(0, n - band_max_); m <= std::min(n_max, n + band_max_); ++m)
        out.entries_[out.index(n, m)] = (*this)(n, m);
      out.exact_[static_cast<std::size_t>(n)] = exact_[static_cast<std::size_t>(n)];
    }
    return out;
  }

  /// Checks the stored entries against the declared symmetry.
  bool satisfies_symmetry(double tol = 0.0) const {
    for (int n = 0; n <= n_max_; ++n) {
      for (int m = std::max(0, n - band_max_); m <= std::min(n_max_, n + band_max_); ++m) {
        const complex a = (*this)(n, m);
        const complex b = (*this)(m, n);
        switch (symmetry_) {
          case Symmetry::real_symmetric:
            if (a.imag() != 0.0 || std::abs(a - b) > tol) return false;
            break;
          case Symmetry::hermitian:
            if (std::abs(a - std::conj(b)) > tol) return false;
            break;
          case Symmetry::general:
            break;
        }
      }
    }
    return true;
  }

  double max_abs() const {
    double out = 0.0;
    for (const complex& v : entries_) out = std::max(out, std::abs(v));
    return out;
  }

  friend bool operator==(const BandAmplitudeArray&, const BandAmplitudeArray&) = default;

 private:
  static std::size_t checked_size(int n_max, int band_max) {
    if (n_max < 0) throw Error(ErrorKind::dimension, "n_max must be non-negative");
    if (band_max < 0) throw Error(ErrorKind::dimension, "band_max must be non-negative");
    return static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(2 * band_max + 1);
  }

  std::size_t index(int n, int m) const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(2 * band_max_ + 1) +
           static_cast<std::size_t>(n - m + band_max_);
  }

  int n_max_ = 0;
  int band_max_ = 0;
  Symmetry symmetry_ = Symmetry::real_symmetric;
  std::vector<complex> entries_;
  std::vector<std::uint8_t> exact_;
};

}  // namespace matmech
