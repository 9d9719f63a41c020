#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "matmech/amplitude.hpp"
#include "matmech/perturbation.hpp"

using namespace matmech;

namespace {

BandAmplitudeArray random_array(std::mt19937_64& rng, int n_max, int band) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BandAmplitudeArray x(n_max, band);
  for (int n = 0; n <= n_max; ++n)
    for (int m = std::max(0, n - band); m <= n; ++m) x.set(n, m, u(rng));
  return x;
}

Eigen::MatrixXcd dense(const BandAmplitudeArray& x) {
  Eigen::MatrixXcd d(x.n_max() + 1, x.n_max() + 1);
  for (int n = 0; n <= x.n_max(); ++n)
    for (int m = 0; m <= x.n_max(); ++m) d(n, m) = x(n, m);
  return d;
}

FrequencyGrid random_grid(std::mt19937_64& rng, int n_max) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::vector<double> potential;
  for (int n = 0; n <= n_max; ++n) potential.push_back(n + u(rng));
  return FrequencyGrid(potential);
}

MotionRepresentation sho_motion(int n_max) {
  const OscillatorParams params;
  return assemble_motion(sho_solve(params, n_max), 0.0);
}

}  // namespace

TEST(Params, BetaSquaredIsTwoHbarOverMassOmega) {
  for (double m : {1.0, 2.5}) {
    for (double w0 : {1.0, 0.3}) {
      OscillatorParams p;
      p.mass = m;
      p.omega0 = w0;
      p.hbar = 0.7;
      EXPECT_NEAR(p.beta() * p.beta(), 2.0 * p.hbar / (m * w0), 1e-14);
    }
  }
  EXPECT_DOUBLE_EQ(OscillatorParams{}.beta(), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(OscillatorParams{}.planck(), 2.0 * std::numbers::pi);
}

TEST(Params, RejectsNonPositiveScales) {
  OscillatorParams p;
  p.mass = 0.0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.omega0 = -1.0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.hbar = 0.0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.force_exponent = 4;
  EXPECT_THROW(p.validate(), Error);
  PhysicalConstants c;
  c.light_speed = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(FrequencyGrid, EquallySpacedLevels) {
  LevelSpectrum levels;
  for (int n = 0; n <= 8; ++n) levels.energies.push_back(n + 0.5);
  const FrequencyGrid w = frequency_grid_from_levels(levels, 1.0);
  EXPECT_EQ(w(5, 3), 2.0);
  for (int n = 0; n <= 8; ++n) EXPECT_EQ(w(n, n), 0.0);
}

TEST(FrequencyGrid, NonFiniteEnergyIsInvalidInput) {
  LevelSpectrum levels{{0.5, NAN, 2.5}};
  try {
    frequency_grid_from_levels(levels, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
  EXPECT_THROW(frequency_grid_from_levels(LevelSpectrum{}, 1.0), Error);
  EXPECT_THROW(frequency_grid_from_levels(LevelSpectrum{{1.0}}, 0.0), Error);
}

TEST(FrequencyGrid, RitzRuleExactForDyadicPotentials) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> k(-64, 64);
  std::vector<double> potential;
  for (int n = 0; n <= 20; ++n) potential.push_back(n + k(rng) / 256.0);
  const FrequencyGrid w(potential);
  for (int n = 0; n <= 20; ++n)
    for (int a = 0; a <= n; ++a)
      for (int b = a; b <= n; ++b) {
        EXPECT_EQ(w(n, n - a) + w(n - a, n - b) - w(n, n - b), 0.0);
        EXPECT_EQ(w(n, n - a), -w(n - a, n));
      }
}

TEST(FrequencyGrid, RitzRuleToRoundingForArbitraryPotentials) {
  std::mt19937_64 rng(11);
  const FrequencyGrid w = random_grid(rng, 20);
  for (int n = 0; n <= 20; ++n)
    for (int a = 0; a <= n; ++a)
      for (int b = a; b <= n; ++b) {
        EXPECT_LE(std::abs(w(n, n - a) + w(n - a, n - b) - w(n, n - b)), 8.0 * 2.3e-16 * 22.0);
        EXPECT_EQ(w(n, n - a), -w(n - a, n));
      }
}

TEST(BandAmplitudeArray, SymmetricPartnerAndFloor) {
  BandAmplitudeArray x(5, 2);
  x.set(3, 1, 0.25);
  EXPECT_EQ(x(1, 3), complex(0.25));
  EXPECT_EQ(x(3, 4), complex(0.0));
  EXPECT_EQ(x(0, -1), complex(0.0));
  EXPECT_EQ(x(-1, -1), complex(0.0));
  EXPECT_EQ(x(5, 0), complex(0.0));  // beyond the band
  EXPECT_THROW(x.set(5, 0, 1.0), Error);
  EXPECT_THROW(x.set(2, 1, complex(0.0, 1.0)), Error);
  EXPECT_TRUE(x.satisfies_symmetry());
}

TEST(BandAmplitudeArray, HermitianMode) {
  BandAmplitudeArray x(4, 1, Symmetry::hermitian);
  x.set(2, 1, complex(0.5, -0.25));
  EXPECT_EQ(x(1, 2), complex(0.5, 0.25));
  EXPECT_THROW(x.set(2, 2, complex(1.0, 1.0)), Error);
  EXPECT_TRUE(x.satisfies_symmetry());
  BandAmplitudeArray y(4, 1, Symmetry::real_symmetric);
  y.set(2, 1, 0.5);
  EXPECT_FALSE(x == y);  // the mode flag is part of the value
}

TEST(BandAmplitudeArray, RejectsNegativeSizes) {
  EXPECT_THROW(BandAmplitudeArray(-1, 1), Error);
  EXPECT_THROW(BandAmplitudeArray(3, -1), Error);
}

TEST(Multiply, IdentityBand) {
  std::mt19937_64 rng(3);
  const BandAmplitudeArray y = random_array(rng, 8, 2);
  BandAmplitudeArray one(8, 0);
  for (int n = 0; n <= 8; ++n) one.set(n, n, 1.0);
  const BandAmplitudeArray z = multiply(one, y);
  EXPECT_EQ(z.band_max(), 2);
  for (int n = 0; n <= 8; ++n)
    for (int m = 0; m <= 8; ++m) EXPECT_EQ(z(n, m), y(n, m));
}

TEST(Multiply, ShoSquaredEntries) {
  const MotionRepresentation sho = sho_motion(12);
  const BandAmplitudeArray z = multiply(sho.amplitudes, sho.amplitudes);
  EXPECT_NEAR(z.real(2, 0), std::sqrt(2.0) / 2.0, 1e-15);
  const double beta2 = OscillatorParams{}.beta() * OscillatorParams{}.beta();
  for (int n = 0; n < 12; ++n) EXPECT_NEAR(z.real(n, n), beta2 / 4.0 * (2 * n + 1), 1e-13);
}

TEST(Multiply, ShoSquaredMatchesDenseProduct) {
  const MotionRepresentation sho = sho_motion(9);
  const Eigen::MatrixXcd x = dense(sho.amplitudes);
  const Eigen::MatrixXcd expected = x * x;
  const BandAmplitudeArray z = multiply(sho.amplitudes, sho.amplitudes);
  for (int n = 0; n <= 9; ++n)
    for (int m = 0; m <= 9; ++m) EXPECT_NEAR(std::abs(z(n, m) - expected(n, m)), 0.0, 1e-14);
}

TEST(Multiply, DimensionMismatch) {
  try {
    multiply(BandAmplitudeArray(4, 1), BandAmplitudeArray(5, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension);
  }
}

TEST(Multiply, RowExactnessTracksTruncation) {
  const MotionRepresentation sho = sho_motion(10);
  const BandAmplitudeArray z = multiply(sho.amplitudes, sho.amplitudes);
  EXPECT_TRUE(z.row_exact(9));
  EXPECT_FALSE(z.row_exact(10));
  const BandAmplitudeArray z3 = multiply(z, sho.amplitudes);
  EXPECT_TRUE(z3.row_exact(8));
  EXPECT_FALSE(z3.row_exact(9));
  EXPECT_EQ(z3.exact_row_limit(), 8);
}

TEST(MultiplyProperty, AgreesWithDenseProduct) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const BandAmplitudeArray x = random_array(rng, 11, 1 + trial % 3);
    const BandAmplitudeArray y = random_array(rng, 11, 1 + trial % 4);
    const Eigen::MatrixXcd expected = dense(x) * dense(y);
    const BandAmplitudeArray z = multiply(x, y);
    for (int n = 0; n <= 11; ++n)
      for (int m = 0; m <= 11; ++m) {
        double scale = 0.0;
        for (int k = 0; k <= 11; ++k) scale += std::abs(x(n, k) * y(k, m));
        EXPECT_LE(std::abs(z(n, m) - expected(n, m)), 1e-14 * std::max(scale, 1e-300));
      }
  }
}

TEST(MultiplyProperty, AssociativeOnInteriorRows) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 10; ++trial) {
    const BandAmplitudeArray x = random_array(rng, 14, 2);
    const BandAmplitudeArray y = random_array(rng, 14, 1);
    const BandAmplitudeArray z = random_array(rng, 14, 3);
    const BandAmplitudeArray left = multiply(multiply(x, y), z);
    const BandAmplitudeArray right = multiply(x, multiply(y, z));
    for (int n = 0; n <= 14 - 6; ++n) {
      ASSERT_TRUE(left.row_exact(n));
      for (int m = 0; m <= 14; ++m) {
        const double scale = std::max(1.0, std::abs(left(n, m)));
        EXPECT_LE(std::abs(left(n, m) - right(n, m)), 1e-14 * scale);
      }
    }
  }
}

TEST(MultiplyProperty, TransposeOfProductIsReversedProduct) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 10; ++trial) {
    const BandAmplitudeArray x = random_array(rng, 10, 2);
    const BandAmplitudeArray y = random_array(rng, 10, 3);
    const BandAmplitudeArray xy = multiply(x, y);
    const BandAmplitudeArray yx = multiply(y, x);
    EXPECT_EQ(xy.symmetry(), Symmetry::general);
    for (int n = 0; n <= 10; ++n)
      for (int m = 0; m <= 10; ++m) EXPECT_LE(std::abs(xy(n, m) - yx(m, n)), 1e-15);
  }
}

TEST(MultiplyProperty, CommutatorWithDerivativeIsAntiHermitian) {
  std::mt19937_64 rng(404);
  const BandAmplitudeArray x = random_array(rng, 10, 3);
  const MotionRepresentation motion(x, random_grid(rng, 10), OscillatorParams{});
  const BandAmplitudeArray d = time_derivative(motion);
  const BandAmplitudeArray a = multiply(x, d);
  const BandAmplitudeArray b = multiply(d, x);
  for (int n = 0; n <= 10; ++n)
    for (int m = 0; m <= 10; ++m) {
      const complex c = a(n, m) - b(n, m);
      const complex ct = a(m, n) - b(m, n);
      EXPECT_LE(std::abs(c + std::conj(ct)), 1e-14);
    }
}

TEST(TimeDerivative, ScalesByFrequency) {
  const MotionRepresentation sho = sho_motion(8);
  const BandAmplitudeArray d = time_derivative(sho);
  EXPECT_EQ(d.symmetry(), Symmetry::hermitian);
  EXPECT_NEAR(std::abs(d(1, 0)), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_EQ(d(1, 0), complex(0.0, sho.amplitudes.real(1, 0)));
  EXPECT_EQ(d(0, 1), std::conj(d(1, 0)));
  for (int n = 0; n <= 8; ++n) EXPECT_EQ(d(n, n), complex(0.0));
  EXPECT_TRUE(d.satisfies_symmetry());
}

TEST(TimeDerivativeProperty, ProductRule) {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 10; ++trial) {
    const int n_max = 7;
    const FrequencyGrid grid = random_grid(rng, n_max);
    const OscillatorParams params;
    const BandAmplitudeArray x = random_array(rng, n_max, 2);
    const BandAmplitudeArray y = random_array(rng, n_max, 2);
    const BandAmplitudeArray xy = multiply(x, y);
    const BandAmplitudeArray lhs = time_derivative(MotionRepresentation(xy, grid, params));
    const BandAmplitudeArray rhs1 = multiply(time_derivative(MotionRepresentation(x, grid, params)), y);
    const BandAmplitudeArray rhs2 = multiply(x, time_derivative(MotionRepresentation(y, grid, params)));
    for (int n = 0; n <= n_max; ++n)
      for (int m = 0; m <= n_max; ++m) EXPECT_LE(std::abs(lhs(n, m) - rhs1(n, m) - rhs2(n, m)), 1e-14);
  }
}

TEST(Motion, GridMustCoverAmplitudes) {
  EXPECT_THROW(MotionRepresentation(BandAmplitudeArray(5, 1), FrequencyGrid({0.0, 1.0}), OscillatorParams{}), Error);
}

TEST(QuantumCondition, ShoExactAmplitudes) {
  const MotionRepresentation sho = sho_motion(50);
  const std::vector<double> r = quantum_condition_residual(sho);
  for (int n = 0; n <= 48; ++n) EXPECT_LE(std::abs(r[n]), 1e-12) << "n=" << n;
}

TEST(QuantumCondition, ZeroAmplitudesGiveMinusH) {
  const OscillatorParams params;
  const MotionRepresentation zero(BandAmplitudeArray(6, 2), FrequencyGrid({0, 1, 2, 3, 4, 5, 6}), params);
  for (double r : quantum_condition_residual(zero)) EXPECT_DOUBLE_EQ(r, -params.planck());
  for (complex c : commutator_diagonal(zero)) EXPECT_EQ(c, complex(0.0));
}

TEST(Commutator, ShoGivesIHbar) {
  const MotionRepresentation sho = sho_motion(20);
  const std::vector<complex> c = commutator_diagonal(sho);
  for (int n = 0; n <= 18; ++n) EXPECT_LE(std::abs(c[n] - complex(0.0, 1.0)), 1e-12) << "n=" << n;
}

TEST(CommutatorProperty, QuantumConditionImpliesIHbar) {
  // arbitrary amplitudes: the commutator diagonal always equals i (residual + h) / 2 pi,
  // so a vanishing residual forces i hbar
  std::mt19937_64 rng(606);
  OscillatorParams params;
  params.hbar = 0.8;
  params.mass = 1.7;
  const BandAmplitudeArray x = random_array(rng, 12, 3);
  const MotionRepresentation motion(x, random_grid(rng, 12), params);
  const std::vector<complex> c = commutator_diagonal(motion);
  const std::vector<double> r = quantum_condition_residual(motion);
  for (int n = 0; n <= 12 - 3; ++n) {
    const complex expected(0.0, (r[n] + params.planck()) / (2.0 * std::numbers::pi));
    EXPECT_LE(std::abs(c[n] - expected), 1e-13);
  }
  const MotionRepresentation sho = sho_motion(14);
  const std::vector<double> rs = quantum_condition_residual(sho);
  const std::vector<complex> cs = commutator_diagonal(sho);
  for (int n = 0; n <= 12; ++n) {
    ASSERT_LE(std::abs(rs[n]), 1e-12);
    EXPECT_LE(std::abs(cs[n] - complex(0.0, sho.params.hbar)), 1e-12);
  }
}

TEST(Emission, ZeroAmplitudeAndQuadraticScaling) {
  const PhysicalConstants consts;
  const OscillatorParams params;
  BandAmplitudeArray x(3, 1);
  const FrequencyGrid grid({0.5, 1.5, 2.5, 3.5});
  EXPECT_EQ(emission_power(MotionRepresentation(x, grid, params), 2, 1, consts).rate, 0.0);
  x.set(2, 1, 0.3);
  const double p1 = emission_power(MotionRepresentation(x, grid, params), 2, 1, consts).rate;
  x.set(2, 1, 0.6);
  const double p2 = emission_power(MotionRepresentation(x, grid, params), 2, 1, consts).rate;
  EXPECT_NEAR(p2 / p1, 4.0, 1e-14);
}

TEST(Emission, AbsorptionIsNotAnEmission) {
  BandAmplitudeArray x(3, 1);
  x.set(2, 1, 0.3);
  const MotionRepresentation motion(x, FrequencyGrid({0.5, 1.5, 2.5, 3.5}), OscillatorParams{});
  try {
    emission_power(motion, 1, -1, PhysicalConstants{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_an_emission);
  }
  EXPECT_THROW(emission_power(motion, 2, 0, PhysicalConstants{}), Error);
}

TEST(Emission, ShoElectronInSiUnits) {
  OscillatorParams params;
  params.mass = 9.1093837015e-31;
  params.omega0 = 1e15;
  params.hbar = 1.054571817e-34;
  const MotionRepresentation sho = assemble_motion(sho_solve(params, 4), 0.0);
  const EmissionRate p = emission_power(sho, 1, 1, PhysicalConstants{});
  // reference from a 40-digit evaluation of the same formula
  EXPECT_NEAR(p.rate, 6266424.7682195513351, 6266424.77 * 1e-12);
  EXPECT_NEAR(p.power, 6.6083949539150961063e-13, 6.61e-13 * 1e-12);
}
