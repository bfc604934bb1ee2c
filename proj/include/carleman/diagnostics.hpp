// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carleman/polyode.hpp"

namespace carleman {

/// Largest real part among the eigenvalues of a square matrix. Diagonal
/// matrices are read off directly, symmetric ones use a self-adjoint solver,
/// and general matrices up to max_dense_dim use a dense eigensolver. Larger
/// non-diagonal inputs throw InvalidArgument; pass the value explicitly.
double max_real_eigenvalue(const SparseMatrix& a, Index max_dense_dim = 64);

/// (||x0|| ||F2|| + ||F0|| / ||x0||) / |re_lambda1| for a quadratic system.
double compute_R2(const PolynomialODE& ode, double re_lambda1);

/// ((k-1) sum_{j>=2} ||Fj|| S + ||F0|| / S) / |re_lambda1_tilde|,
/// S = sqrt(sum_{i=1..k-1} ||x0||^{2i}).
double compute_Rk(const PolynomialODE& ode, double re_lambda1_tilde);

/// (k-1) S sum_{i>=2} ||Fi|| / |Re lambda1| for F0 = 0. Re lambda1 is
/// computed from F1 unless supplied.
double compute_Rk0(const PolynomialODE& ode, std::optional<double> re_lambda1 = std::nullopt);

struct GammaRescaling {
  double gamma = 0.0;
  double r_plus = 0.0;
  double r_minus = 0.0;
  PolynomialODE rescaled;
  std::vector<std::string> warnings;
};

/// Rescales x -> gamma x so that ||F2'|| + ||F0'|| < |Re lambda1| and
/// ||x0'|| < 1. Throws InvalidArgument when the discriminant
/// (Re lambda1)^2 - 4 ||F2|| ||F0|| is negative; R2 >= 1 only warns.
GammaRescaling rescale_gamma(const PolynomialODE& ode, std::optional<double> re_lambda1 = std::nullopt);

struct DecayRatios {
  double q = 0.0;
  double q_k = 0.0;
};

/// q = ||x0|| / ||xT||; q_k is the same ratio for the lifted vectors
/// (x, x^[2], ..., x^[k-1]).
DecayRatios decay_ratios(const DenseVector& x0, const DenseVector& xT, int k);

/// (p+1) / (9 (m+p+1) N q^2).
double p_measure_bound(Index m, Index p, int N, double q);

/// s_k T^2 q_k / eps times log factors in T, n and 1/eps, each taken to the
/// first power and floored at 1.
double complexity_expression(Index s_k, double T, double q_k, double eps, int k, Index n);

/// ||L||_2 ||L^-1||_2. Triangular L uses power iteration with triangular
/// solves; other matrices up to dense_limit rows use a dense SVD.
double condition_estimate(const SparseMatrix& L, Index dense_limit = 2000);

/// Re of the dominant eigenvalue of the lifted F~1. Equals Re lambda1 when
/// F0 = 0; otherwise a dense eigensolve on F~1 up to 256 rows.
double lifted_re_lambda1(const PolynomialODE& ode, std::optional<double> re_lambda1 = std::nullopt);

struct DiagnosticsOptions {
  int level = 3;                     ///< N used for n_c, P bound and the block system
  double horizon = 1.0;              ///< T
  double eps = 1e-2;
  std::optional<Index> steps;        ///< m; default h ||A_N|| <= 0.1
  std::optional<Index> padding;      ///< p; default m
  std::optional<double> re_lambda1;  ///< overrides the eigensolve
  Index oracle_steps = kDefaultOracleSteps;
  Index condition_max_nnz = 2'000'000;  ///< skip cond_estimate above this block size
};

struct DiagnosticsReport {
  double re_lambda1 = 0.0;
  std::optional<double> re_lambda1_tilde;
  std::optional<double> r2;
  std::optional<double> rk;
  std::optional<double> rk0;
  std::optional<double> gamma;
  double q = 0.0;
  double q_k = 0.0;
  Index s = 0;
  Index s_k = 0;        ///< measured sparsity of F~1, F~2 (s when k <= 2)
  Index s_k_bound = 0;  ///< s k (k-1) / 2
  Index n_c = 0;
  int level = 0;
  Index steps = 0;
  Index padding = 0;
  std::optional<double> cond_estimate;
  double p_measure_bound = 0.0;
  double complexity_expr = 0.0;
  std::vector<std::string> warnings;
};

DiagnosticsReport diagnose(const PolynomialODE& ode, const DiagnosticsOptions& options = {});

nlohmann::json to_json(const DiagnosticsReport& r);

}  // namespace carleman
