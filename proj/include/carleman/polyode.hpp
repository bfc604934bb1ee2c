// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "carleman/tensor.hpp"

namespace carleman {

/// dx/dt = F0 + F1 x + F2 x^[2] + ... + Fk x^[k], x(0) = x0.
///
/// F0 is stored as an n x 1 matrix so every degree shares one carrier;
/// coefficient(i) is n x n^i.
class PolynomialODE {
 public:
  /// Validates dimensions, degree >= 1 and finiteness of x0.
  PolynomialODE(std::vector<SparseMatrix> coefficients, DenseVector x0);

  Index dim() const noexcept { return x0_.size(); }
  int degree() const noexcept { return static_cast<int>(coefficients_.size()) - 1; }
  const SparseMatrix& coefficient(int i) const { return coefficients_.at(static_cast<Index>(i)); }
  const std::vector<SparseMatrix>& coefficients() const noexcept { return coefficients_; }
  const DenseVector& x0() const noexcept { return x0_; }

  bool has_forcing() const noexcept { return !coefficients_.front().empty(); }
  /// F0 as a length-n vector.
  DenseVector forcing() const;
  /// Max row/column sparsity over all coefficient matrices.
  Index sparsity() const;

  PolynomialODE with_initial_state(DenseVector x0) const;

  friend bool operator==(const PolynomialODE&, const PolynomialODE&) = default;

 private:
  std::vector<SparseMatrix> coefficients_;
  DenseVector x0_;
};

/// Solution samples x(t_j).
struct Trajectory {
  std::vector<double> times;
  std::vector<DenseVector> states;

  /// Throws InvalidArgument unless times are strictly increasing and sizes agree.
  void validate() const;
  /// Linear interpolation; t outside [times.front(), times.back()] is rejected.
  DenseVector sample(double t) const;
};

// ---------------------------------------------------------------------------
// ODE spec JSON
//
// { "n": int, "k": int,
//   "F": [ {"degree": i, "rows": n, "cols": n^i, "triplets": [[r, c, v], ...]}, ... ],
//   "x0": [reals] }
//
// Degrees missing from "F" are zero matrices.
// ---------------------------------------------------------------------------

PolynomialODE parse_ode_spec(std::string_view text);
PolynomialODE load_ode_spec(const std::filesystem::path& path);
nlohmann::json to_json(const PolynomialODE& ode);
void save_ode_spec(const PolynomialODE& ode, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Evaluation and reference integration
// ---------------------------------------------------------------------------

/// F0 + sum_i F_i x^[i].
DenseVector evaluate_rhs(const PolynomialODE& ode, const DenseVector& x);

/// Classical fixed-step RK4 on [0, T] with `steps` steps; returns steps + 1
/// samples including t = 0 and t = T. Throws NumericalError carrying the
/// last finite time on blow-up.
Trajectory direct_integrate(const PolynomialODE& ode, double T, Index steps);

/// Default step count of the reference integrator.
inline constexpr Index kDefaultOracleSteps = 10'000;

/// CSV `t,x1,...,xn` with 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace carleman
