#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "matmech/amplitude.hpp"
#include "matmech/band_array.hpp"
#include "matmech/errors.hpp"
#include "matmech/frequency_grid.hpp"
#include "matmech/params.hpp"

namespace matmech {

/// Dense symmetric N x N operator in the unperturbed number basis, optionally
/// carrying the truncated position matrix it was built from.
class TruncatedOperator {
 public:
  explicit TruncatedOperator(Eigen::MatrixXd matrix, Eigen::MatrixXd position = {})
      : matrix_(std::move(matrix)), position_(std::move(position)) {
    if (matrix_.rows() != matrix_.cols()) throw Error(ErrorKind::dimension, "operator must be square");
    if (position_.size() != 0 && (position_.rows() != matrix_.rows() || position_.cols() != matrix_.cols()))
      throw Error(ErrorKind::dimension, "position matrix must match the operator");
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
      throw Error(ErrorKind::invalid_input, "operator is not symmetric");
  }

  int size() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::MatrixXd& position() const { return position_; }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd position_;
};

/// <k|x|n> in the number basis: <n-1|x|n> = sqrt(hbar / (2 m w0)) sqrt(n).
inline Eigen::MatrixXd position_matrix(const OscillatorParams& params, int size) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(size, size);
  const double scale = params.length_scale();
  for (int n = 1; n < size; ++n) {
    x(n - 1, n) = scale * std::sqrt(static_cast<double>(n));
    x(n, n - 1) = x(n - 1, n);
  }
  return x;
}

namespace detail {

inline Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& x, int power) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(x.rows(), x.cols());
  for (int i = 0; i < power; ++i) out = out * x;
  return out;
}

/// Matrix of the potential m lambda x^(p+1) / (p+1) with x truncated at `size`.
inline Eigen::MatrixXd anharmonic_matrix(const OscillatorParams& params, int size) {
  const int p = params.force_exponent;
  return params.mass * params.lambda / (p + 1) * matrix_power(position_matrix(params, size), p + 1);
}

/// Same, with every element exact for rows and columns below `size`.
inline Eigen::MatrixXd exact_anharmonic_matrix(const OscillatorParams& params, int size) {
  const int pad = params.force_exponent + 2;
  return anharmonic_matrix(params, size + pad).topLeftCorner(size, size);
}

}  // namespace detail

/// H = (n + 1/2) hbar w0 on the diagonal plus m lambda x^(p+1) / (p+1), with
/// the power of x formed inside the truncation.
inline TruncatedOperator build_hamiltonian(const OscillatorParams& params, int size) {
  params.validate();
  if (size < 8) throw Error(ErrorKind::invalid_input, "basis size must be at least 8");
  Eigen::MatrixXd h = detail::anharmonic_matrix(params, size);
  for (int n = 0; n < size; ++n) h(n, n) += (n + 0.5) * params.hbar * params.omega0;
  h = 0.5 * (h + h.transpose());
  return TruncatedOperator(std::move(h), position_matrix(params, size));
}

struct SpectrumResult {
  Eigen::VectorXd energies;      ///< ascending
  Eigen::MatrixXd eigenvectors;  ///< column k is state k, sign fixed so that entry (k, k) > 0
  Eigen::MatrixXd amplitudes;    ///< <k|x|n> between eigenstates; empty when no position matrix was given
  std::vector<double> plateau;   ///< |E_n(N) - E_n(N - step)| per checked level, when requested
  double plateau_threshold = 0.0;

  int size() const { return static_cast<int>(energies.size()); }
  double energy(int n) const { return energies(n); }
  double amplitude(int k, int n) const { return amplitudes(k, n); }
  bool plateau_reached() const {
    return std::all_of(plateau.begin(), plateau.end(), [&](double d) { return d <= plateau_threshold; });
  }

  /// Exact representation of x(t) over all N levels.
  MotionRepresentation motion(const OscillatorParams& params) const {
    if (amplitudes.size() == 0) throw Error(ErrorKind::misuse, "spectrum carries no amplitudes");
    const int n_max = size() - 1;
    BandAmplitudeArray x(n_max, n_max);
    for (int n = 0; n <= n_max; ++n)
      for (int m = 0; m <= n; ++m) x.set(n, m, amplitudes(n, m));
    std::vector<double> levels(energies.data(), energies.data() + energies.size());
    return MotionRepresentation(std::move(x), frequency_grid_from_levels({levels}, params.hbar), params);
  }
};

/// Full symmetric eigendecomposition, checked pair by pair.
inline SpectrumResult diagonalize(const TruncatedOperator& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix());
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::numeric, "symmetric eigensolver did not converge (size " + std::to_string(op.size()) + ")");
  SpectrumResult out;
  out.energies = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  const double norm = std::max(op.matrix().norm(), 1e-300);
  for (int k = 0; k < op.size(); ++k) {
    if (out.eigenvectors(k, k) < 0.0) out.eigenvectors.col(k) *= -1.0;
    const double residual = (op.matrix() * out.eigenvectors.col(k) - out.energies(k) * out.eigenvectors.col(k)).norm();
    if (residual > 1e-10 * norm)
      throw Error(ErrorKind::numeric, "eigenpair " + std::to_string(k) + " residual " + std::to_string(residual) +
                                          " exceeds 1e-10 |H|");
  }
  if (op.position().size() != 0) {
    out.amplitudes = out.eigenvectors.transpose() * op.position() * out.eigenvectors;
    out.amplitudes = 0.5 * (out.amplitudes + out.amplitudes.transpose());
  }
  return out;
}

/// Diagonalizes at basis size N and records how much the lowest `levels`
/// eigenvalues moved relative to basis size N - step.
inline SpectrumResult oracle_spectrum(const OscillatorParams& params, int size, int levels = 6, int step = 10,
                                      double threshold = 1e-8) {
  SpectrumResult out = diagonalize(build_hamiltonian(params, size));
  if (levels > 0) {
    if (size - step < 8 || levels > size - step)
      throw Error(ErrorKind::invalid_input, "basis too small for the plateau check");
    const SpectrumResult smaller = diagonalize(build_hamiltonian(params, size - step));
    for (int n = 0; n < levels; ++n) out.plateau.push_back(std::abs(out.energies(n) - smaller.energies(n)));
  }
  out.plateau_threshold = threshold;
  return out;
}

/// Coefficients of the corrected state |n> = |n>_0 + sum_k c_k |k>_0 through
/// first order in lambda; entry n holds 1.
inline std::vector<double> rspt_first_order_state(const OscillatorParams& params, int n, int size) {
  params.validate();
  const int reach = params.force_exponent + 1;
  if (n < 0 || n + reach >= size) throw Error(ErrorKind::invalid_input, "level too close to the basis edge");
  const Eigen::MatrixXd v = detail::exact_anharmonic_matrix(params, size);
  std::vector<double> c(static_cast<std::size_t>(size), 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  for (int k = 0; k < size; ++k) {
    if (k == n) continue;
    c[static_cast<std::size_t>(k)] = v(k, n) / ((n - k) * params.hbar * params.omega0);
  }
  return c;
}

/// Rayleigh-Schrodinger energy of level n through lambda^2, at params.lambda.
inline double rspt_energy_second_order(const OscillatorParams& params, int n) {
  params.validate();
  if (n < 0) throw Error(ErrorKind::invalid_input, "level must be non-negative");
  const int size = n + 2 * (params.force_exponent + 1) + 2;
  const Eigen::MatrixXd v = detail::exact_anharmonic_matrix(params, size);
  const double e0 = params.hbar * params.omega0;
  double energy = (n + 0.5) * e0 + v(n, n);
  for (int k = 0; k < size; ++k) {
    if (k == n) continue;
    energy += v(k, n) * v(k, n) / ((n - k) * e0);
  }
  return energy;
}

struct LambdaFit {
  std::vector<double> coefficients;  ///< c_j of sum_j c_j lambda^j
  double condition_number = 0.0;     ///< of the scaled design matrix
  double max_residual = 0.0;
  bool ill_conditioned = false;
  std::string warning;
};

/// Geometric grid lambda0 / 2^(count-1) .. lambda0.
inline std::vector<double> default_lambda_grid(double lambda0, int count = 5) {
  std::vector<double> grid;
  for (int i = count - 1; i >= 0; --i) grid.push_back(lambda0 / std::pow(2.0, i));
  return grid;
}

/// Least-squares polynomial in lambda, solved in the scaled variable
/// lambda / max|lambda| to keep the design matrix well conditioned.
inline LambdaFit lambda_series_fit(const std::function<double(double)>& f, const std::vector<double>& grid, int order,
                                   double condition_limit = 1e8) {
  if (order < 0) throw Error(ErrorKind::invalid_input, "fit order must be non-negative");
  if (static_cast<int>(grid.size()) < order + 2)
    throw Error(ErrorKind::invalid_input, "fit needs at least order + 2 grid points");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorKind::invalid_input, "fit grid values must be distinct");

  double scale = 0.0;
  for (double l : grid) scale = std::max(scale, std::abs(l));
  const int rows = static_cast<int>(grid.size());
  Eigen::MatrixXd design(rows, order + 1);
  Eigen::VectorXd values(rows);
  for (int i = 0; i < rows; ++i) {
    const double u = grid[static_cast<std::size_t>(i)] / scale;
    for (int j = 0; j <= order; ++j) design(i, j) = std::pow(u, j);
    values(i) = f(grid[static_cast<std::size_t>(i)]);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd scaled = svd.solve(values);
  const Eigen::VectorXd& sigma = svd.singularValues();

  LambdaFit fit;
  fit.condition_number = sigma(0) / sigma(sigma.size() - 1);
  fit.max_residual = (design * scaled - values).cwiseAbs().maxCoeff();
  for (int j = 0; j <= order; ++j) fit.coefficients.push_back(scaled(j) / std::pow(scale, j));
  if (!(fit.condition_number <= condition_limit)) {
    fit.ill_conditioned = true;
    fit.warning = "design matrix condition number " + std::to_string(fit.condition_number) + " exceeds " +
                  std::to_string(condition_limit);
  }
  return fit;
}

}  // namespace matmech
