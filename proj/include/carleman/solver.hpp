// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "carleman/carleman_system.hpp"
#include "carleman/polyode.hpp"

namespace carleman {

/// Forward-Euler time-stepping of a CarlemanSystem written as one linear system
/// L Z = B over Z = (z^0, ..., z^{m+p}):
///
///   row block 0:         z^0                           = z_in
///   row block j=1..m:    -(I + A_N h) z^{j-1} + z^j    = h b
///   row block j=m+1..m+p: -z^{j-1} + z^j               = 0
///
/// The solution block z^j approximates z(j h) for j <= m; padding blocks
/// repeat z^m.
struct BlockEulerSystem {
  Index steps = 0;    ///< m
  Index padding = 0;  ///< p
  double step_size = 0.0;  ///< h = T / m
  double horizon = 0.0;
  int level = 0;
  Index base_dim = 0;       ///< n
  Index carleman_dim = 0;   ///< n_c
  SparseMatrix matrix;      ///< L, (m+p+1) n_c square
  DenseVector rhs;          ///< B

  Index num_blocks() const noexcept { return steps + padding + 1; }
};

/// Per-step Carleman states with the leading n components extracted.
struct CarlemanSolution {
  Index steps = 0;
  Index padding = 0;
  int level = 0;
  Index base_dim = 0;
  std::vector<double> times;       ///< j h for j <= m; padding blocks carry T
  std::vector<DenseVector> blocks;  ///< z^j, each of dim n_c
  std::vector<DenseVector> extract; ///< leading n entries of z^j

  /// Solution samples j = 0..m as a Trajectory.
  Trajectory trajectory() const;
};

/// z^{j+1} = (I + A_N h) z^j + h b, h = T/m.
CarlemanSolution euler_integrate(const CarlemanSystem& sys, double T, Index m);

/// Classical RK4 on the same linear ODE; isolates truncation error from time
/// discretization error in convergence studies.
CarlemanSolution rk4_integrate(const CarlemanSystem& sys, double T, Index m);

BlockEulerSystem assemble_block(const CarlemanSystem& sys, double T, Index m, Index p);

enum class SolveMode {
  substitution,  ///< exact block forward substitution
  gmres,         ///< restarted GMRES, tolerance 1e-10
};

/// Solves L Z = B; throws NumericalError if ||L Z - B|| / ||B|| > 1e-12
/// (substitution) or 1e-10 (gmres).
CarlemanSolution solve_block(const BlockEulerSystem& bes, SolveMode mode = SolveMode::substitution);

/// Residual ||L Z - B|| / ||B|| for a stacked solution.
double block_residual(const BlockEulerSystem& bes, const CarlemanSolution& sol);

struct SolutionError {
  std::vector<double> times;
  std::vector<double> abs_l2;   ///< ||x_extract(t) - x_ref(t)||
  double max_time_error = 0.0;
  double eps_normalized = 0.0;  ///< max_j ||x(T)/||x(T)|| - z1^j/||z1^j|||, j = m..m+p
};

/// Compares a Carleman solution with a reference trajectory, linearly
/// interpolating the reference onto the solution grid.
SolutionError solution_error(const CarlemanSolution& sol, const Trajectory& ref);

/// ||Z_g||^2 / ||Z||^2 with Z_g the first-block entries of z^m..z^{m+p}.
double measured_p(const CarlemanSolution& sol, Index m, Index p);

/// Smallest m with h ||A_N||_2 <= 0.1.
Index default_steps(const CarlemanSystem& sys, double T);

/// Scalars of the |B> preparation: B_m = ||z_in||^2 + m h^2 ||b||^2.
struct StatePreparation {
  double z_in_norm = 0.0;
  double hb_norm = 0.0;
  double normalization = 0.0;
};
StatePreparation state_preparation(const CarlemanSystem& sys, double T, Index m);

}  // namespace carleman
