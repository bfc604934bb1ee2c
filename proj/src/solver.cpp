// SPDX-License-Identifier: Apache-2.0
#include "carleman/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <unsupported/Eigen/IterativeSolvers>

#include "carleman/errors.hpp"

namespace carleman {

namespace {

void check_horizon(double T, Index m) {
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("horizon T must be positive and finite");
  if (m == 0) throw InvalidArgument("step count m must be >= 1");
}

CarlemanSolution make_solution(const CarlemanSystem& sys, Index m, Index p) {
  CarlemanSolution sol;
  sol.steps = m;
  sol.padding = p;
  sol.level = sys.level;
  sol.base_dim = sys.base_dim;
  sol.times.reserve(m + p + 1);
  sol.blocks.reserve(m + p + 1);
  return sol;
}

void push_block(CarlemanSolution& sol, double t, DenseVector z) {
  sol.extract.push_back(z.segment(0, sol.base_dim));
  sol.blocks.push_back(std::move(z));
  sol.times.push_back(t);
}

double grid_time(double T, Index j, Index m) {
  return j >= m ? T : T * static_cast<double>(j) / static_cast<double>(m);
}

}  // namespace

Trajectory CarlemanSolution::trajectory() const {
  Trajectory traj;
  for (Index j = 0; j <= steps && j < times.size(); ++j) {
    traj.times.push_back(times[j]);
    traj.states.push_back(extract[j]);
  }
  return traj;
}

CarlemanSolution euler_integrate(const CarlemanSystem& sys, double T, Index m) {
  check_horizon(T, m);
  const double h = T / static_cast<double>(m);
  const Index nc = sys.dim();
  CarlemanSolution sol = make_solution(sys, m, 0);
  DenseVector z = sys.initial_state;
  DenseVector az(nc);
  push_block(sol, 0.0, z);
  for (Index j = 1; j <= m; ++j) {
    sys.generator.multiply(z.span(), az.span());
    for (Index r = 0; r < nc; ++r) z[r] += h * (az[r] + sys.forcing[r]);
    if (!z.all_finite()) throw NumericalError("Euler iterate became non-finite", grid_time(T, j - 1, m));
    push_block(sol, grid_time(T, j, m), z);
  }
  return sol;
}

CarlemanSolution rk4_integrate(const CarlemanSystem& sys, double T, Index m) {
  check_horizon(T, m);
  const double h = T / static_cast<double>(m);
  const Index nc = sys.dim();
  CarlemanSolution sol = make_solution(sys, m, 0);
  DenseVector z = sys.initial_state;
  DenseVector k1(nc), k2(nc), k3(nc), k4(nc), tmp(nc);
  auto rhs = [&](const DenseVector& x, DenseVector& out) {
    sys.generator.multiply(x.span(), out.span());
    out += sys.forcing;
  };
  push_block(sol, 0.0, z);
  for (Index j = 1; j <= m; ++j) {
    rhs(z, k1);
    for (Index r = 0; r < nc; ++r) tmp[r] = z[r] + 0.5 * h * k1[r];
    rhs(tmp, k2);
    for (Index r = 0; r < nc; ++r) tmp[r] = z[r] + 0.5 * h * k2[r];
    rhs(tmp, k3);
    for (Index r = 0; r < nc; ++r) tmp[r] = z[r] + h * k3[r];
    rhs(tmp, k4);
    for (Index r = 0; r < nc; ++r) z[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
    if (!z.all_finite()) throw NumericalError("RK4 iterate became non-finite", grid_time(T, j - 1, m));
    push_block(sol, grid_time(T, j, m), z);
  }
  return sol;
}

BlockEulerSystem assemble_block(const CarlemanSystem& sys, double T, Index m, Index p) {
  check_horizon(T, m);
  BlockEulerSystem bes;
  bes.steps = m;
  bes.padding = p;
  bes.horizon = T;
  bes.step_size = T / static_cast<double>(m);
  bes.level = sys.level;
  bes.base_dim = sys.base_dim;
  bes.carleman_dim = sys.dim();

  const Index nc = sys.dim();
  const Index blocks = checked_mul(1, m + p + 1);
  const Index total = checked_mul(blocks, nc);
  check_capacity(total, "block Euler right-hand side");
  const Index per_step = nc + sys.generator.nnz() + nc;
  check_capacity(checked_mul(blocks, per_step), "block Euler matrix");

  const double h = bes.step_size;
  // I + h A_N, negated for the subdiagonal.
  const SparseMatrix step = (SparseMatrix::identity(nc) + sys.generator.scaled(h)).scaled(-1.0);
  const SparseMatrix minus_identity = SparseMatrix::identity(nc).scaled(-1.0);
  const SparseMatrix identity = SparseMatrix::identity(nc);

  TripletList list(total, total);
  list.reserve(checked_mul(blocks, per_step));
  for (Index j = 0; j < blocks; ++j) {
    list.add_block(j * nc, j * nc, identity);
    if (j == 0) continue;
    list.add_block(j * nc, (j - 1) * nc, j <= m ? step : minus_identity);
  }
  bes.matrix = std::move(list).build();

  bes.rhs = DenseVector(total);
  for (Index r = 0; r < nc; ++r) bes.rhs[r] = sys.initial_state[r];
  for (Index j = 1; j <= m; ++j) {
    for (Index r = 0; r < nc; ++r) bes.rhs[j * nc + r] = h * sys.forcing[r];
  }
  return bes;
}

namespace {

DenseVector forward_substitution(const SparseMatrix& L, const DenseVector& b) {
  const auto rp = L.row_offsets();
  const auto ci = L.col_indices();
  const auto v = L.values();
  DenseVector x(L.rows());
  for (Index r = 0; r < L.rows(); ++r) {
    double acc = b[r];
    double diag = 0.0;
    for (Index e = rp[r]; e < rp[r + 1]; ++e) {
      if (ci[e] < r) {
        acc -= v[e] * x[ci[e]];
      } else if (ci[e] == r) {
        diag = v[e];
      } else {
        throw InvalidArgument("forward substitution requires a lower-triangular matrix");
      }
    }
    if (diag == 0.0) throw NumericalError("zero pivot in forward substitution");
    x[r] = acc / diag;
  }
  return x;
}

DenseVector gmres_solve(const SparseMatrix& L, const DenseVector& b) {
  using EigenCsr = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(L.nnz());
  for (const auto& t : L.entries()) {
    trips.emplace_back(static_cast<int>(t.row), static_cast<int>(t.col), t.value);
  }
  EigenCsr A(static_cast<Eigen::Index>(L.rows()), static_cast<Eigen::Index>(L.cols()));
  A.setFromTriplets(trips.begin(), trips.end());

  Eigen::GMRES<EigenCsr, Eigen::IncompleteLUT<double>> solver;
  solver.setTolerance(1e-10);
  solver.set_restart(200);
  solver.setMaxIterations(std::max<Eigen::Index>(1000, 10 * static_cast<Eigen::Index>(L.rows())));
  solver.compute(A);
  Eigen::Map<const Eigen::VectorXd> rhs(b.values().data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("GMRES did not reach tolerance 1e-10", solver.error());
  }
  return DenseVector(std::vector<double>(x.data(), x.data() + x.size()));
}

}  // namespace

CarlemanSolution solve_block(const BlockEulerSystem& bes, SolveMode mode) {
  const DenseVector Z = mode == SolveMode::substitution ? forward_substitution(bes.matrix, bes.rhs)
                                                        : gmres_solve(bes.matrix, bes.rhs);
  if (!Z.all_finite()) throw NumericalError("block solve produced non-finite entries");

  CarlemanSolution sol;
  sol.steps = bes.steps;
  sol.padding = bes.padding;
  sol.level = bes.level;
  sol.base_dim = bes.base_dim;
  for (Index j = 0; j < bes.num_blocks(); ++j) {
    push_block(sol, grid_time(bes.horizon, j, bes.steps), Z.segment(j * bes.carleman_dim, bes.carleman_dim));
  }

  const double residual = block_residual(bes, sol);
  const double limit = mode == SolveMode::substitution ? 1e-12 : 1e-10;
  if (!(residual <= limit)) {
    throw NumericalError("block solve residual " + std::to_string(residual) + " exceeds tolerance");
  }
  return sol;
}

double block_residual(const BlockEulerSystem& bes, const CarlemanSolution& sol) {
  if (sol.blocks.size() != bes.num_blocks()) throw DimensionError("solution block count does not match system");
  std::vector<double> stacked;
  stacked.reserve(bes.rhs.size());
  for (const auto& z : sol.blocks) stacked.insert(stacked.end(), z.begin(), z.end());
  DenseVector lz(bes.rhs.size());
  bes.matrix.multiply(stacked, lz.span());
  const double bnorm = bes.rhs.norm();
  const double r = distance(lz, bes.rhs);
  return bnorm > 0.0 ? r / bnorm : r;
}

SolutionError solution_error(const CarlemanSolution& sol, const Trajectory& ref) {
  ref.validate();
  SolutionError err;
  const Index m = sol.steps;
  for (Index j = 0; j <= m && j < sol.extract.size(); ++j) {
    const double e = distance(sol.extract[j], ref.sample(sol.times[j]));
    err.times.push_back(sol.times[j]);
    err.abs_l2.push_back(e);
    err.max_time_error = std::max(err.max_time_error, e);
  }

  const DenseVector& xT = ref.states.back();
  const double xT_norm = xT.norm();
  for (Index j = m; j < sol.extract.size(); ++j) {
    const double zn = sol.extract[j].norm();
    if (xT_norm == 0.0 || zn == 0.0) {
      err.eps_normalized = std::max(err.eps_normalized, distance(xT, sol.extract[j]));
      continue;
    }
    err.eps_normalized =
        std::max(err.eps_normalized, distance((1.0 / xT_norm) * xT, (1.0 / zn) * sol.extract[j]));
  }
  return err;
}

double measured_p(const CarlemanSolution& sol, Index m, Index p) {
  if (m + p + 1 > sol.blocks.size()) throw InvalidArgument("measured_p window exceeds solution length");
  double good = 0.0;
  double total = 0.0;
  for (Index j = 0; j < sol.blocks.size(); ++j) {
    total += sol.blocks[j].squared_norm();
    if (j >= m && j <= m + p) good += sol.extract[j].squared_norm();
  }
  if (total == 0.0) throw NumericalError("zero solution norm in measured_p");
  return good / total;
}

Index default_steps(const CarlemanSystem& sys, double T) {
  if (!(T > 0.0)) throw InvalidArgument("horizon T must be positive");
  const double a = spectral_norm(sys.generator);
  const double m = std::ceil(T * a / 0.1);
  return std::max<Index>(1, static_cast<Index>(m));
}

StatePreparation state_preparation(const CarlemanSystem& sys, double T, Index m) {
  check_horizon(T, m);
  const double h = T / static_cast<double>(m);
  StatePreparation sp;
  sp.z_in_norm = sys.initial_state.norm();
  sp.hb_norm = h * sys.forcing.norm();
  sp.normalization = sp.z_in_norm * sp.z_in_norm + static_cast<double>(m) * sp.hb_norm * sp.hb_norm;
  return sp;
}

}  // namespace carleman
