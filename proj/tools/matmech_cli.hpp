#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "matmech/matmech.hpp"

namespace matmech::cli {

using ordered_json = nlohmann::ordered_json;

struct RunConfig {
  std::string subcommand;
  int force = 2;
  int order = 2;
  int n_max = 12;
  double lambda = 0.05;
  bool lambda_given = false;
  int basis = 80;
  double mass = 1.0;
  double omega0 = 1.0;
  double hbar = 1.0;
  std::string format = "json";
  std::string output;
  std::uint64_t seed = 1;
  std::string check = "all";
  double level = 1000.0;
  std::optional<double> amplitude;

  OscillatorParams params() const {
    OscillatorParams p;
    p.mass = mass;
    p.omega0 = omega0;
    p.hbar = hbar;
    p.lambda = lambda;
    p.force_exponent = force;
    return p;
  }
};

/// One verified invariant. `label` names the equation it checks.
struct Check {
  std::string name;
  std::string label;
  double tolerance;
  double residual;
  std::string where;

  bool pass() const { return residual <= tolerance; }
};

struct CsvRow {
  std::string quantity;
  std::optional<int> n;
  std::optional<int> alpha;
  std::optional<int> order;
  double value;
};

struct Report {
  ordered_json config = ordered_json::object();
  ordered_json results = ordered_json::object();
  std::vector<Check> checks;
  std::vector<CsvRow> rows;
};

/// Thrown for configuration problems detected before any computation.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- formatting ----

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void emit_json(std::ostream& os, const ordered_json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << ordered_json(it.key()).dump() << ": ";
        emit_json(os, it.value(), depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        emit_json(os, j[i], depth + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case ordered_json::value_t::number_float:
      os << format_number(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

inline std::string to_json(const Report& report) {
  ordered_json checks = ordered_json::array();
  const Check* worst = nullptr;
  double worst_ratio = -1.0;
  for (const Check& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"paper_eq", c.label},
                      {"tolerance", c.tolerance},
                      {"residual", c.residual},
                      {"where", c.where},
                      {"pass", c.pass()}});
    const double ratio = c.tolerance > 0.0 ? c.residual / c.tolerance : c.residual;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst = &c;
    }
  }
  ordered_json provenance = ordered_json::object();
  if (worst) provenance = {{"paper_eq", worst->label}, {"tolerance", worst->tolerance}, {"residual", worst->residual}};
  ordered_json top = {{"config", report.config},
                      {"results", report.results},
                      {"checks", checks},
                      {"provenance", provenance}};
  std::ostringstream os;
  emit_json(os, top, 0);
  os << "\n";
  return os.str();
}

inline std::string to_csv(const Report& report) {
  std::ostringstream os;
  os << "quantity,n,alpha,order,value\n";
  auto field = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  for (const CsvRow& r : report.rows)
    os << r.quantity << ',' << field(r.n) << ',' << field(r.alpha) << ',' << field(r.order) << ','
       << format_number(r.value) << '\n';
  for (const Check& c : report.checks)
    os << "check:" << c.name << ",,,," << format_number(c.residual) << '\n';
  return os.str();
}

inline std::string index_key(const std::string& name, std::initializer_list<int> indices) {
  std::string key = name;
  for (int i : indices) key += "[" + std::to_string(i) + "]";
  return key;
}

// ---- checks ----

inline Check worst_of(std::string name, std::string label, double tolerance) {
  return {std::move(name), std::move(label), tolerance, 0.0, ""};
}

inline void consider(Check& c, double residual, const std::string& where) {
  if (!(residual <= c.residual)) {
    c.residual = std::isfinite(residual) ? residual : INFINITY;
    c.where = where;
  }
}

inline std::string at_level(int n) { return "n=" + std::to_string(n); }

inline Check check_quantum_condition(const PerturbSolution& sol) {
  Check c = worst_of("qc", "Eq (3.11)", 1e-12);
  for (int j = 0; j <= sol.total_order(); ++j) {
    const std::vector<double> r = quantum_condition_order_residual(sol, j);
    for (int n = 0; n <= sol.n_max(); ++n)
      consider(c, std::abs(r[static_cast<std::size_t>(n)]), at_level(n) + " order=" + std::to_string(j));
  }
  return c;
}

inline Check check_recursions(const PerturbSolution& sol) {
  Check c = worst_of("recursion", "Eqs (3.7)-(3.10)", 1e-12);
  for (int alpha = 0; alpha <= sol.band_max(); ++alpha)
    for (int k = 0; k <= sol.order(); ++k) {
      const Recursion rec = build_recursions(sol.params(), alpha, k);
      for (int n = 0; n <= sol.n_max(); ++n)
        consider(c, rec.residual(sol, n),
                 at_level(n) + " alpha=" + std::to_string(alpha) + " order=" + std::to_string(k));
    }
  return c;
}

inline Check check_sho_commutator(const OscillatorParams& base, int n_max) {
  OscillatorParams params = base;
  params.lambda = 0.0;
  const MotionRepresentation motion = assemble_motion(sho_solve(params, n_max), 0.0);
  const std::vector<complex> c = commutator_diagonal(motion);
  Check out = worst_of("commutator.sho", "Eq (A.5)", 1e-12);
  for (int n = 0; n <= n_max - 2; ++n)
    consider(out, std::abs(c[static_cast<std::size_t>(n)] - complex{0.0, params.hbar}) / params.hbar, at_level(n));
  return out;
}

/// m (X Xdot - Xdot X)(n, n) against i (residual + h) / 2 pi on the same amplitudes.
inline Check check_commutator_chain(const PerturbSolution& sol, double lambda) {
  const MotionRepresentation motion = assemble_motion(sol, lambda);
  const std::vector<complex> c = commutator_diagonal(motion);
  const std::vector<double> r = quantum_condition_residual(motion);
  Check out = worst_of("commutator.chain", "Eqs (A.1)-(A.5)", 1e-12);
  const double h = motion.params.planck();
  for (int n = 0; n <= sol.n_max() - sol.band_max(); ++n) {
    const complex expected{0.0, (r[static_cast<std::size_t>(n)] + h) / (2.0 * std::numbers::pi)};
    consider(out, std::abs(c[static_cast<std::size_t>(n)] - expected) / motion.params.hbar, at_level(n));
  }
  return out;
}

inline std::vector<Check> check_offdiagonal(const PerturbSolution& sol) {
  const int cap = std::min(sol.order(), 1);
  const EnergyMatrix w = energy_matrix(sol, cap);
  const char* labels[] = {"Eqs (B.1)-(B.3)", "Eq (B.4)", "Eqs (B.5)-(B.7)"};
  std::vector<Check> out;
  for (int alpha = 1; alpha <= 3; ++alpha) {
    Check c = worst_of("offdiag.W(n,n-" + std::to_string(alpha) + ")", labels[alpha - 1], 1e-12);
    for (int t = 0; t <= cap; ++t)
      for (int n = alpha; n <= sol.n_max(); ++n) {
        const double scale = std::abs(w.kinetic(t, n, n - alpha)) + std::abs(w.harmonic(t, n, n - alpha)) +
                             std::abs(w.anharmonic(t, n, n - alpha));
        const double total = std::abs(w.total(t, n, n - alpha));
        consider(c, scale > 0.0 ? total / scale : total, at_level(n) + " order=" + std::to_string(t));
      }
    out.push_back(c);
  }
  return out;
}

inline double relative_error(double value, double expected) {
  const double diff = std::abs(value - expected);
  return expected == 0.0 ? diff : diff / std::abs(expected);
}

inline Check check_closed_forms(const PerturbSolution& sol) {
  Check c = worst_of("closed-form", "Eqs (3.17)-(3.49)", 1e-12);
  const OscillatorParams& p = sol.params();
  for (int k = 0; k <= sol.order(); ++k)
    for (int alpha = 0; alpha <= sol.band_max(); ++alpha) {
      bool tabulated = true;
      for (int n = alpha; n <= sol.n_max() && tabulated; ++n) {
        try {
          const double expected = closed_form_amplitude(k, n, alpha, p);
          consider(c, relative_error(sol.a(k, n, n - alpha), expected),
                   "a" + std::to_string(k) + " " + at_level(n) + " alpha=" + std::to_string(alpha));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::no_closed_form) throw;
          tabulated = false;
        }
      }
      for (int n = std::max(alpha, 1); n <= sol.n_max() && alpha >= 1; ++n) {
        try {
          const double expected = closed_form_frequency(k, n, alpha, p);
          consider(c, relative_error(sol.omega(k, n, n - alpha), expected),
                   "w" + std::to_string(k) + " " + at_level(n) + " alpha=" + std::to_string(alpha));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::no_closed_form) throw;
          break;
        }
      }
    }
  return c;
}

inline Check check_energy(const PerturbSolution& sol) {
  Check c = worst_of("energy", "Eq (3.54)", 1e-12);
  const std::vector<EnergySeries> series = energy_diagonal_series(sol);
  for (const EnergySeries& e : series) {
    const EnergySeries ref = closed_form_energy(e.level, sol.params());
    const double scale = std::abs(ref.harmonic2) + std::abs(ref.kinetic2) + std::abs(ref.anharmonic2);
    for (int t = 0; t < 3; ++t)
      consider(c, std::abs(e.coefficient[t] - ref.coefficient[t]) / std::max(std::abs(ref.coefficient[t]), scale),
               at_level(e.level) + " order=" + std::to_string(t));
    consider(c, relative_error(e.kinetic2, ref.kinetic2), at_level(e.level) + " kinetic");
    consider(c, relative_error(e.harmonic2, ref.harmonic2), at_level(e.level) + " harmonic");
    consider(c, relative_error(e.anharmonic2, ref.anharmonic2), at_level(e.level) + " anharmonic");
  }
  return c;
}

inline Check check_parity(const PerturbSolution& sol) {
  Check c = worst_of("parity", "Sec 3.3", 0.0);
  for (int j = 0; j <= sol.total_order(); ++j) {
    const BandAmplitudeArray& x = sol.series(j);
    for (int n = 0; n <= sol.n_max(); ++n)
      for (int alpha = 0; alpha <= x.band_max() && n - alpha >= 0; alpha += 2)
        consider(c, std::abs(x.real(n, n - alpha)),
                 at_level(n) + " alpha=" + std::to_string(alpha) + " power=" + std::to_string(j));
  }
  return c;
}

inline Check check_structure(const PerturbSolution& sol) {
  Check c = worst_of("structure", "Eq (3.27)", 1e-10);
  const double expected[] = {1.0, 1.0 / 6.0, 1.0 / 48.0};
  try {
    for (const StructureConstant& s : extract_structure_constants(sol)) {
      if (s.band > 3) break;
      consider(c, std::max(s.spread, relative_error(s.value, expected[s.band - 1])),
               "alpha=" + std::to_string(s.band));
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::structure_violation) throw;
    consider(c, INFINITY, e.what());
  }
  return c;
}

inline Check check_ritz(const PerturbSolution& sol) {
  Check c = worst_of("ritz", "Eq (3.23)", 4.0 * std::numeric_limits<double>::epsilon());
  for (int k = 0; k <= sol.order(); ++k)
    for (int n = 2; n <= sol.n_max(); ++n) {
      const double lhs = sol.omega(k, n, n - 2);
      const double rhs = sol.omega(k, n, n - 1) + sol.omega(k, n - 1, n - 2);
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
      consider(c, std::abs(lhs - rhs) / scale, at_level(n) + " order=" + std::to_string(k));
    }
  return c;
}

/// Portable uniform deviates in [-1, 1) from a seeded 64-bit engine.
class Deviates {
 public:
  explicit Deviates(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return 2.0 * static_cast<double>(engine_() >> 11) * 0x1.0p-53 - 1.0; }

 private:
  std::mt19937_64 engine_;
};

inline BandAmplitudeArray random_band(Deviates& u, int n_max, int band) {
  BandAmplitudeArray x(n_max, band);
  for (int n = 0; n <= n_max; ++n)
    for (int m = std::max(0, n - band); m <= n; ++m) x.set(n, m, u());
  return x;
}

inline std::vector<Check> check_properties(std::uint64_t seed) {
  Deviates u(seed);
  const int n_max = 9;
  const BandAmplitudeArray x = random_band(u, n_max, 2);
  const BandAmplitudeArray y = random_band(u, n_max, 3);
  const BandAmplitudeArray xy = multiply(x, y);
  const BandAmplitudeArray yx = multiply(y, x);

  Check dense = worst_of("properties.dense", "Eq (2.10)", 1e-14);
  Check transpose = worst_of("properties.transpose", "Eq (3.2)", 1e-14);
  for (int n = 0; n <= n_max; ++n)
    for (int m = 0; m <= n_max; ++m) {
      double sum = 0.0;
      double size = 0.0;
      for (int k = 0; k <= n_max; ++k) {
        sum += x.real(n, k) * y.real(k, m);
        size += std::abs(x.real(n, k) * y.real(k, m));
      }
      const std::string where = at_level(n) + " m=" + std::to_string(m);
      consider(dense, size > 0.0 ? std::abs(xy.real(n, m) - sum) / size : std::abs(xy.real(n, m)), where);
      consider(transpose, std::abs(xy.real(n, m) - yx.real(m, n)) / std::max(size, 1.0), where);
    }

  std::vector<double> potential;
  for (int n = 0; n <= n_max; ++n) potential.push_back(n + 0.25 * u());
  const OscillatorParams params;
  const FrequencyGrid grid(potential);
  const BandAmplitudeArray dx = time_derivative(MotionRepresentation(x, grid, params));
  const BandAmplitudeArray dy = time_derivative(MotionRepresentation(y, grid, params));
  const BandAmplitudeArray lhs_x = multiply(dx, y.with_band(3));
  const BandAmplitudeArray lhs_y = multiply(x.with_band(2), dy);
  Check product = worst_of("properties.product-rule", "Eq (3.31)", 1e-14);
  for (int n = 0; n <= n_max; ++n)
    for (int m = std::max(0, n - 5); m <= std::min(n_max, n + 5); ++m) {
      const complex direct = complex{0.0, grid(n, m)} * xy(n, m);
      const complex split = lhs_x(n, m) + lhs_y(n, m);
      consider(product, std::abs(direct - split) / std::max(1.0, std::abs(direct)),
               at_level(n) + " m=" + std::to_string(m));
    }
  return {dense, transpose, product};
}

// ---- subcommands ----

inline ordered_json config_json(const RunConfig& cfg) {
  ordered_json j = {{"subcommand", cfg.subcommand}, {"force", cfg.force},     {"order", cfg.order},
                    {"n_max", cfg.n_max},           {"lambda", cfg.lambda},   {"basis", cfg.basis},
                    {"mass", cfg.mass},             {"omega0", cfg.omega0},   {"hbar", cfg.hbar},
                    {"format", cfg.format}};
  if (cfg.subcommand == "verify") {
    j["check"] = cfg.check;
    j["seed"] = cfg.seed;
  }
  if (cfg.subcommand == "classical") {
    if (cfg.amplitude)
      j["amplitude"] = *cfg.amplitude;
    else
      j["level"] = cfg.level;
  }
  return j;
}

inline void add_solution_tables(const PerturbSolution& sol, double lambda, Report& report) {
  ordered_json amplitudes = ordered_json::object();
  ordered_json frequencies = ordered_json::object();
  ordered_json potentials = ordered_json::object();
  for (int k = 0; k <= sol.order(); ++k) {
    for (int n = 0; n <= sol.n_max(); ++n) {
      for (int alpha = 0; alpha <= sol.band_max() && n - alpha >= 0; ++alpha) {
        const double a = sol.a(k, n, n - alpha);
        amplitudes[index_key("a" + std::to_string(k), {n, n - alpha})] = a;
        report.rows.push_back({"a", n, alpha, k, a});
      }
    }
    for (int n = 0; n <= sol.n_max(); ++n) {
      potentials[index_key("Omega" + std::to_string(k), {n})] = sol.potential(k, n);
      for (int alpha = 1; alpha <= sol.band_max() && n - alpha >= 0; ++alpha) {
        const double w = sol.omega(k, n, n - alpha);
        frequencies[index_key("w" + std::to_string(k), {n, n - alpha})] = w;
        report.rows.push_back({"omega", n, alpha, k, w});
      }
    }
  }
  const int cap = std::min(sol.order(), sol.total_order());
  const EnergyMatrix w = energy_matrix(sol, cap);
  ordered_json energies = ordered_json::object();
  for (int n = 0; n <= sol.n_max(); ++n) {
    double value = 0.0;
    for (int t = 0; t <= cap; ++t) {
      const double c = w.total(t, n, n);
      energies[index_key("W" + std::to_string(t), {n})] = c;
      report.rows.push_back({"W", n, 0, t, c});
      value += std::pow(lambda, t) * c;
    }
    energies[index_key("W", {n})] = value;
    report.rows.push_back({"W_at_lambda", n, 0, std::nullopt, value});
  }
  report.results["amplitudes"] = amplitudes;
  report.results["frequencies"] = frequencies;
  report.results["frequency_potential"] = potentials;
  report.results["energies"] = energies;
}

inline Report run_solve(const RunConfig& cfg) {
  Report report;
  const PerturbSolution sol = solve_perturbative(cfg.params(), cfg.order, cfg.n_max);
  report.results["total_order"] = sol.total_order();
  report.results["band_max"] = sol.band_max();
  add_solution_tables(sol, cfg.lambda, report);
  report.checks.push_back(check_recursions(sol));
  report.checks.push_back(check_quantum_condition(sol));
  return report;
}

inline Report run_sho(const RunConfig& cfg) {
  if (cfg.lambda_given && cfg.lambda != 0.0) throw UsageError("sho requires --lambda 0");
  OscillatorParams params = cfg.params();
  params.lambda = 0.0;
  Report report;
  const PerturbSolution sol = sho_solve(params, cfg.n_max);
  const MotionRepresentation motion = assemble_motion(sol, 0.0);
  const std::vector<double> qc = quantum_condition_residual(motion);
  const std::vector<complex> comm = commutator_diagonal(motion);
  ordered_json amplitudes = ordered_json::object();
  ordered_json energies = ordered_json::object();
  ordered_json residuals = ordered_json::object();
  ordered_json commutator = ordered_json::object();
  for (int n = 0; n <= cfg.n_max; ++n) {
    if (n >= 1) {
      const double x = motion.amplitudes.real(n, n - 1);
      amplitudes[index_key("X", {n, n - 1})] = x;
      report.rows.push_back({"X", n, 1, 0, x});
    }
    const double energy = (n + 0.5) * params.hbar * params.omega0;
    energies[index_key("W", {n})] = energy;
    report.rows.push_back({"W", n, 0, 0, energy});
    residuals[index_key("qc", {n})] = qc[static_cast<std::size_t>(n)];
    commutator[index_key("commutator_imag", {n})] = comm[static_cast<std::size_t>(n)].imag();
  }
  report.results["amplitudes"] = amplitudes;
  report.results["frequency"] = params.omega0;
  report.results["energies"] = energies;
  report.results["quantum_condition_residual"] = residuals;
  report.results["commutator"] = commutator;

  Check q = worst_of("qc", "Eq (2.16)", 1e-12);
  for (int n = 0; n <= cfg.n_max - 2; ++n)
    consider(q, std::abs(qc[static_cast<std::size_t>(n)]) / params.planck(), at_level(n));
  report.checks.push_back(q);
  report.checks.push_back(check_sho_commutator(params, cfg.n_max));
  return report;
}

inline Report run_verify(const RunConfig& cfg) {
  static const std::vector<std::string> known = {"all",    "qc",     "commutator", "offdiag", "recursion",
                                                 "closed-form", "energy", "parity", "structure", "ritz",
                                                 "properties"};
  if (std::find(known.begin(), known.end(), cfg.check) == known.end())
    throw UsageError("unknown check '" + cfg.check + "'");
  const bool all = cfg.check == "all";
  const bool quadratic = cfg.force == 2;
  auto wants = [&](const char* name, bool applicable) {
    if (cfg.check == name && !applicable)
      throw UsageError(std::string("check '") + name + "' does not apply to force exponent " +
                       std::to_string(cfg.force) + " at order " + std::to_string(cfg.order));
    return (all && applicable) || cfg.check == name;
  };

  Report report;
  const PerturbSolution sol = solve_perturbative(cfg.params(), cfg.order, cfg.n_max);
  if (wants("qc", true)) report.checks.push_back(check_quantum_condition(sol));
  if (wants("commutator", true)) {
    report.checks.push_back(check_sho_commutator(cfg.params(), cfg.n_max));
    report.checks.push_back(check_commutator_chain(sol, cfg.lambda));
  }
  if (wants("offdiag", true))
    for (Check& c : check_offdiagonal(sol)) report.checks.push_back(c);
  if (wants("recursion", true)) report.checks.push_back(check_recursions(sol));
  if (wants("closed-form", quadratic)) report.checks.push_back(check_closed_forms(sol));
  if (wants("energy", quadratic && cfg.order == 2)) report.checks.push_back(check_energy(sol));
  if (wants("parity", !quadratic)) report.checks.push_back(check_parity(sol));
  if (wants("structure", quadratic)) report.checks.push_back(check_structure(sol));
  if (wants("ritz", true)) report.checks.push_back(check_ritz(sol));
  if (wants("properties", true))
    for (Check& c : check_properties(cfg.seed)) report.checks.push_back(c);

  ordered_json summary = ordered_json::object();
  for (const Check& c : report.checks) summary[c.name] = c.pass() ? "pass" : "fail";
  report.results["summary"] = summary;
  return report;
}

inline Report run_classical(const RunConfig& cfg) {
  const OscillatorParams params = cfg.params();
  if (cfg.level < 0.0) throw UsageError("--level must be non-negative");
  const ClassicalSolution sol =
      cfg.amplitude ? classical_solve(params, cfg.order, ClassicalSeed::with_amplitude(*cfg.amplitude))
                    : classical_at_level(params, cfg.order, cfg.level);
  Report report;
  const int p = params.force_exponent;
  ordered_json coefficients = ordered_json::object();
  for (int k = 0; k <= sol.order(); ++k)
    for (int alpha = 0; alpha <= sol.harmonic_max(); ++alpha) {
      if (leading_power(p, alpha) + k > sol.total_order()) continue;
      const double a = sol.a(k, alpha);
      coefficients[index_key("a" + std::to_string(k), {alpha})] = a;
      report.rows.push_back({"a", std::nullopt, alpha, k, a});
    }
  ordered_json frequency = ordered_json::object();
  for (int k = 0; k <= sol.order(); ++k) {
    frequency[index_key("w", {k})] = sol.omega(k);
    report.rows.push_back({"omega", std::nullopt, 1, k, sol.omega(k)});
  }
  const double action = action_integral(sol, params);
  const double residual = ode_residual(sol, params.lambda, 256);
  report.results["coefficients"] = coefficients;
  report.results["frequency"] = frequency;
  report.results["frequency_at_lambda"] = sol.frequency(params.lambda);
  report.results["action"] = action;
  report.results["ode_residual"] = residual;
  report.rows.push_back({"J", std::nullopt, std::nullopt, std::nullopt, action});
  report.rows.push_back({"ode_residual", std::nullopt, std::nullopt, std::nullopt, residual});

  Check balance = worst_of("harmonic-balance", "Eqs (2.28)-(2.31)", 1e-12);
  for (int k = 0; k <= sol.order(); ++k)
    for (int alpha = 0; alpha <= sol.harmonic_max(); ++alpha) {
      if (leading_power(p, alpha) + k > sol.total_order()) continue;
      consider(balance, harmonic_balance_residual(sol, alpha, k),
               "alpha=" + std::to_string(alpha) + " order=" + std::to_string(k));
    }
  report.checks.push_back(balance);

  if (!cfg.amplitude && p == 2 && cfg.level >= 3.0 && cfg.level == std::floor(cfg.level)) {
    const int n = static_cast<int>(cfg.level);
    ordered_json ratios = ordered_json::object();
    Check corr = worst_of("correspondence", "Eq (3.27)", 1e-3);
    const double r1 = sol.a(0, 1) / closed_form_amplitude(0, n, 1, params);
    const double r2 = sol.a(0, 2) / closed_form_amplitude(0, n, 2, params);
    ratios["a1"] = r1;
    ratios["a2"] = r2;
    consider(corr, std::abs(r1 - 1.0), "a1");
    consider(corr, std::abs(r2 - 1.0), "a2");
    report.checks.push_back(corr);
    if (sol.order() >= 2) {
      const double r3 = sol.omega(2) / closed_form_frequency(2, n, 1, params);
      ratios["w2"] = r3;
      Check freq = worst_of("correspondence.w2", "Eq (3.40)", 1e-2);
      consider(freq, std::abs(r3 - 1.0), "w2");
      report.checks.push_back(freq);
    }
    report.results["correspondence"] = ratios;
  }
  return report;
}

inline Report run_oracle(const RunConfig& cfg) {
  const OscillatorParams params = cfg.params();
  if (cfg.basis < 20) throw UsageError("--basis must be at least 20");
  const int levels = std::min(cfg.n_max, cfg.basis - 11);
  const SpectrumResult spectrum = oracle_spectrum(params, cfg.basis, std::min(6, levels + 1));
  const MotionRepresentation exact = spectrum.motion(params);
  const std::vector<double> trk = quantum_condition_residual(exact);
  const PerturbSolution sol = solve_perturbative(params, cfg.order, std::max(levels, cfg.order + 3));

  Report report;
  ordered_json energies = ordered_json::object();
  ordered_json amplitudes = ordered_json::object();
  ordered_json gaps = ordered_json::object();
  ordered_json plateau = ordered_json::object();
  ordered_json sum_rule = ordered_json::object();
  const EnergyMatrix w = energy_matrix(sol, std::min(sol.order(), sol.total_order()));
  for (int n = 0; n <= levels; ++n) {
    energies[index_key("E", {n})] = spectrum.energy(n);
    report.rows.push_back({"E", n, 0, std::nullopt, spectrum.energy(n)});
    double pert = 0.0;
    for (int t = 0; t <= w.order_cap(); ++t) pert += std::pow(params.lambda, t) * w.total(t, n, n);
    gaps[index_key("gap", {n})] = spectrum.energy(n) - pert;
    report.rows.push_back({"gap", n, 0, std::nullopt, spectrum.energy(n) - pert});
    for (int alpha = 0; alpha <= 3 && n - alpha >= 0; ++alpha) {
      amplitudes[index_key("X", {n, n - alpha})] = spectrum.amplitude(n, n - alpha);
      report.rows.push_back({"X", n, alpha, std::nullopt, spectrum.amplitude(n, n - alpha)});
    }
    sum_rule[index_key("trk", {n})] = trk[static_cast<std::size_t>(n)];
  }
  for (std::size_t n = 0; n < spectrum.plateau.size(); ++n)
    plateau[index_key("dE", {static_cast<int>(n)})] = spectrum.plateau[n];

  const std::vector<double> grid = default_lambda_grid(params.lambda);
  auto exact_at = [&](double l) {
    OscillatorParams q = params;
    q.lambda = l;
    return diagonalize(build_hamiltonian(q, cfg.basis));
  };
  std::vector<SpectrumResult> spectra;
  for (double l : grid) spectra.push_back(exact_at(l));
  auto fit_of = [&](auto&& value) {
    std::size_t i = 0;
    return lambda_series_fit([&](double) { return value(spectra[i++]); }, grid, 3);
  };
  const LambdaFit fw = fit_of([&](const SpectrumResult& s) { return (s.energy(1) - s.energy(0)) / params.hbar; });
  const LambdaFit fx11 = fit_of([](const SpectrumResult& s) { return s.amplitude(1, 1); });
  const LambdaFit fx20 = fit_of([](const SpectrumResult& s) { return s.amplitude(2, 0); });
  ordered_json fits = ordered_json::object();
  auto fit_json = [&](const std::string& name, const LambdaFit& f) {
    ordered_json coeffs = ordered_json::array();
    for (double c : f.coefficients) coeffs.push_back(c);
    fits[name] = {{"coefficients", coeffs}, {"condition_number", f.condition_number}, {"warning", f.warning}};
    for (std::size_t j = 0; j < f.coefficients.size(); ++j)
      report.rows.push_back({"fit_" + name, std::nullopt, std::nullopt, static_cast<int>(j), f.coefficients[j]});
  };
  fit_json("w(1,0)", fw);
  fit_json("X(1,1)", fx11);
  fit_json("X(2,0)", fx20);

  report.results["energies"] = energies;
  report.results["perturbative_gap"] = gaps;
  report.results["amplitudes"] = amplitudes;
  report.results["plateau"] = plateau;
  report.results["sum_rule"] = sum_rule;
  report.results["fits"] = fits;

  Check sum = worst_of("sum-rule", "Eq (2.16)", 1e-8);
  for (int n = 0; n <= std::min(5, levels); ++n)
    consider(sum, std::abs(trk[static_cast<std::size_t>(n)]) / params.planck(), at_level(n));
  report.checks.push_back(sum);
  Check stable = worst_of("plateau", "basis growth", spectrum.plateau_threshold);
  for (std::size_t n = 0; n < spectrum.plateau.size(); ++n) consider(stable, spectrum.plateau[n], at_level(static_cast<int>(n)));
  report.checks.push_back(stable);
  if (params.force_exponent == 2 && sol.order() >= 2) {
    Check fit = worst_of("series-fit", "Eqs (3.21), (3.25), (3.40)", 1e-2);
    consider(fit, relative_error(fw.coefficients[2], sol.omega(2, 1, 0)), "w(1,0) lambda^2");
    consider(fit, relative_error(fx11.coefficients[1], sol.a(0, 1, 1)), "X(1,1) lambda^1");
    consider(fit, relative_error(fx20.coefficients[1], 0.5 * sol.a(0, 2, 0)), "X(2,0) lambda^1");
    report.checks.push_back(fit);
  }
  return report;
}

// ---- entry point ----

inline std::filesystem::path resolve_output(const std::string& output) {
  std::filesystem::path path(output);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("MATMECH_OUTPUT_DIR"); dir && *dir) path = std::filesystem::path(dir) / path;
  }
  return path;
}

inline void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--force", cfg.force, "anharmonic force exponent p (2 or 3)")->check(CLI::IsMember({2, 3}));
  sub->add_option("--order", cfg.order, "perturbative order K (0..2)");
  sub->add_option("--n-max", cfg.n_max, "highest level reported");
  sub->add_option("--lambda", cfg.lambda, "coupling lambda");
  sub->add_option("--basis", cfg.basis, "oracle basis size N");
  sub->add_option("--mass", cfg.mass, "mass m");
  sub->add_option("--omega0", cfg.omega0, "base frequency w0");
  sub->add_option("--hbar", cfg.hbar, "reduced quantum of action");
  sub->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--output", cfg.output, "output file (relative paths resolve against MATMECH_OUTPUT_DIR)");
}

/// Runs one command. Exit codes: 0 success, 1 verification failure, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Transition-amplitude calculus for anharmonic oscillators", "matmech"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  CLI::App* solve = app.add_subcommand("solve", "perturbative amplitudes, frequencies and energies");
  CLI::App* verify = app.add_subcommand("verify", "check solver invariants; exit 1 on violation");
  CLI::App* classical = app.add_subcommand("classical", "classical Fourier solution and correspondence");
  CLI::App* oracle = app.add_subcommand("oracle", "truncated-basis diagonalization and series fits");
  CLI::App* sho = app.add_subcommand("sho", "exact harmonic-oscillator route");
  for (CLI::App* sub : {solve, verify, classical, oracle, sho}) add_common(sub, cfg);
  verify->add_option("--check", cfg.check, "which invariant to check (all, qc, commutator, offdiag, recursion, "
                                           "closed-form, energy, parity, structure, ritz, properties)");
  verify->add_option("--seed", cfg.seed, "seed for the random property checks");
  classical->add_option("--level", cfg.level, "quantize at action J = level h");
  classical->add_option("--amplitude", cfg.amplitude, "prescribe the leading amplitude instead of the action");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  for (CLI::App* sub : {solve, verify, classical, oracle, sho})
    if (sub->parsed()) {
      cfg.subcommand = sub->get_name();
      cfg.lambda_given = sub->count("--lambda") > 0;
    }

  Report report;
  try {
    if (cfg.order < 0 || cfg.order > 2) throw UsageError("--order must be 0, 1 or 2");
    if (cfg.subcommand == "sho") {
      if (cfg.lambda_given && cfg.lambda != 0.0) throw UsageError("sho is the lambda = 0 route; drop --lambda");
      cfg.lambda = 0.0;
    }
    cfg.params().validate();
    if (cfg.subcommand == "solve") report = run_solve(cfg);
    if (cfg.subcommand == "verify") report = run_verify(cfg);
    if (cfg.subcommand == "classical") report = run_classical(cfg);
    if (cfg.subcommand == "oracle") report = run_oracle(cfg);
    if (cfg.subcommand == "sho") report = run_sho(cfg);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::invalid_input:
      case ErrorKind::dimension:
      case ErrorKind::unsupported_force:
      case ErrorKind::unimplemented_order:
      case ErrorKind::misuse:
      case ErrorKind::underdetermined:
        err << "usage error: " << e.what() << "\n";
        return 2;
      default:
        err << "error: " << e.what() << "\n";
        return 1;
    }
  }
  report.config = config_json(cfg);

  const std::string text = cfg.format == "csv" ? to_csv(report) : to_json(report);
  if (cfg.output.empty()) {
    out << text;
  } else {
    const std::filesystem::path path = resolve_output(cfg.output);
    std::ofstream file(path, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << path.string() << "\n";
      return 2;
    }
    file << text;
  }

  int status = 0;
  for (const Check& c : report.checks) {
    if (c.pass()) continue;
    err << "verification failed: " << c.label << " residual at " << c.where << " is " << format_number(c.residual)
        << " (tolerance " << format_number(c.tolerance) << ")\n";
    status = 1;
  }
  return status;
}

}  // namespace matmech::cli
