#pragma once

#include <cmath>
#include <numbers>

#include "matmech/errors.hpp"

namespace matmech {

/// Physical parameters of x'' + w0^2 x + lambda x^p = 0.
///
/// Defaults are the dimensionless units m = w0 = hbar = 1, in which the
/// amplitude scale beta is sqrt(2) and Planck's constant h is 2 pi.
struct OscillatorParams {
  double mass = 1.0;
  double omega0 = 1.0;
  double lambda = 0.0;
  double hbar = 1.0;
  int force_exponent = 2;

  double planck() const { return 2.0 * std::numbers::pi * hbar; }

  /// beta = (h / (pi m w0))^(1/2); equivalently beta^2 = 2 hbar / (m w0).
  double beta() const { return std::sqrt(planck() / (std::numbers::pi * mass * omega0)); }

  /// Ground-level matrix element scale (hbar / (2 m w0))^(1/2) = beta / 2.
  double length_scale() const { return std::sqrt(hbar / (2.0 * mass * omega0)); }

  void validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw Error(ErrorKind::invalid_input, "mass must be positive and finite");
    if (!(omega0 > 0.0) || !std::isfinite(omega0))
      throw Error(ErrorKind::invalid_input, "omega0 must be positive and finite");
    if (!(hbar > 0.0) || !std::isfinite(hbar))
      throw Error(ErrorKind::invalid_input, "hbar must be positive and finite");
    if (!std::isfinite(lambda))
      throw Error(ErrorKind::invalid_input, "lambda must be finite");
    if (force_exponent != 2 && force_exponent != 3)
      throw Error(ErrorKind::unsupported_force, "force exponent must be 2 or 3");
  }
};

/// Charge, permittivity and speed of light; SI by default.
struct PhysicalConstants {
  double charge = 1.602176634e-19;
  double permittivity = 8.8541878128e-12;
  double light_speed = 299792458.0;

  void validate() const {
    if (!(charge > 0.0) || !(permittivity > 0.0) || !(light_speed > 0.0))
      throw Error(ErrorKind::invalid_input, "physical constants must be positive");
  }
};

}  // namespace matmech
