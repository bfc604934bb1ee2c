// SPDX-License-Identifier: Apache-2.0
#include "carleman/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "carleman/carleman_system.hpp"
#include "carleman/errors.hpp"
#include "carleman/quadratize.hpp"
#include "carleman/solver.hpp"

namespace carleman {

namespace {

Eigen::MatrixXd to_dense(const SparseMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  for (const auto& t : a.entries()) d(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
  return d;
}

void require_dissipative(double re_lambda, const char* what) {
  if (!std::isfinite(re_lambda)) throw InvalidArgument(std::string(what) + " must be finite");
  if (re_lambda >= 0.0) {
    throw DissipationError(std::string(what) + " = " + std::to_string(re_lambda) + " is not negative");
  }
}

double x0_norm_checked(const PolynomialODE& ode) {
  const double x = ode.x0().norm();
  if (x == 0.0) throw InvalidArgument("x0 = 0: the ratio is undefined");
  return x;
}

// sqrt(sum_{i=1..k-1} r^{2i})
double lifted_norm(double r, int k) {
  double s = 0.0;
  double p = 1.0;
  for (int i = 1; i <= k - 1; ++i) {
    p *= r * r;
    s += p;
  }
  return std::sqrt(s);
}

double nonlinear_norm_sum(const PolynomialODE& ode) {
  double s = 0.0;
  for (int j = 2; j <= ode.degree(); ++j) s += spectral_norm(ode.coefficient(j));
  return s;
}

// x -> L^-1 x for lower triangular L, or U^-1 x for upper triangular U.
void triangular_solve(const SparseMatrix& t, bool lower, std::span<const double> b, std::span<double> x) {
  const auto rp = t.row_offsets();
  const auto ci = t.col_indices();
  const auto v = t.values();
  const Index n = t.rows();
  for (Index step = 0; step < n; ++step) {
    const Index r = lower ? step : n - 1 - step;
    double acc = b[r];
    double diag = 0.0;
    for (Index e = rp[r]; e < rp[r + 1]; ++e) {
      if (ci[e] == r) {
        diag = v[e];
      } else {
        acc -= v[e] * x[ci[e]];
      }
    }
    if (diag == 0.0) throw NumericalError("singular triangular matrix in condition_estimate");
    x[r] = acc / diag;
  }
}

}  // namespace

double max_real_eigenvalue(const SparseMatrix& a, Index max_dense_dim) {
  if (a.rows() != a.cols()) throw DimensionError("eigenvalues need a square matrix");
  if (a.rows() == 0) throw InvalidArgument("eigenvalues of an empty matrix");
  if (a.is_diagonal()) {
    double best = -std::numeric_limits<double>::infinity();
    for (Index r = 0; r < a.rows(); ++r) best = std::max(best, a.at(r, r));
    return best;
  }
  if (a.rows() > max_dense_dim) {
    throw InvalidArgument("matrix of dimension " + std::to_string(a.rows()) +
                          " is too large for a dense eigensolve; supply Re lambda1 explicitly");
  }
  const Eigen::MatrixXd d = to_dense(a);
  if (a.is_symmetric(0.0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolve failed");
    return es.eigenvalues().maxCoeff();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(d, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolve failed");
  return es.eigenvalues().real().maxCoeff();
}

double compute_R2(const PolynomialODE& ode, double re_lambda1) {
  if (ode.degree() != 2) throw InvalidArgument("compute_R2 requires a quadratic system (k = 2)");
  require_dissipative(re_lambda1, "Re lambda1");
  const double x0 = x0_norm_checked(ode);
  const double f0 = spectral_norm(ode.coefficient(0));
  const double f2 = spectral_norm(ode.coefficient(2));
  return (x0 * f2 + f0 / x0) / std::abs(re_lambda1);
}

double compute_Rk(const PolynomialODE& ode, double re_lambda1_tilde) {
  const int k = ode.degree();
  if (k < 2) throw InvalidArgument("compute_Rk requires k >= 2");
  require_dissipative(re_lambda1_tilde, "Re lambda1~");
  const double s = lifted_norm(x0_norm_checked(ode), k);
  const double f0 = spectral_norm(ode.coefficient(0));
  return ((k - 1) * nonlinear_norm_sum(ode) * s + f0 / s) / std::abs(re_lambda1_tilde);
}

double compute_Rk0(const PolynomialODE& ode, std::optional<double> re_lambda1) {
  const int k = ode.degree();
  if (k < 2) throw InvalidArgument("compute_Rk0 requires k >= 2");
  if (ode.has_forcing()) throw InvalidArgument("compute_Rk0 requires F0 = 0");
  const double lambda = re_lambda1 ? *re_lambda1 : max_real_eigenvalue(ode.coefficient(1));
  require_dissipative(lambda, "Re lambda1");
  const double s = lifted_norm(x0_norm_checked(ode), k);
  return (k - 1) * s * nonlinear_norm_sum(ode) / std::abs(lambda);
}

GammaRescaling rescale_gamma(const PolynomialODE& ode, std::optional<double> re_lambda1) {
  if (ode.degree() != 2) throw InvalidArgument("rescale_gamma requires a quadratic system (k = 2)");
  const double lambda = re_lambda1 ? *re_lambda1 : max_real_eigenvalue(ode.coefficient(1));
  require_dissipative(lambda, "Re lambda1");
  const double x0 = x0_norm_checked(ode);
  const double f0 = spectral_norm(ode.coefficient(0));
  const double f2 = spectral_norm(ode.coefficient(2));
  if (f2 == 0.0) throw InvalidArgument("rescale_gamma requires F2 != 0");
  const double disc = lambda * lambda - 4.0 * f2 * f0;
  if (disc < 0.0) {
    throw InvalidArgument("discriminant (Re lambda1)^2 - 4 ||F2|| ||F0|| is negative; no rescaling exists");
  }

  std::vector<std::string> warnings;
  const double r2 = compute_R2(ode, lambda);
  if (r2 >= 1.0) warnings.push_back("R2 = " + std::to_string(r2) + " >= 1; convergence is not guaranteed");

  const double root = std::sqrt(disc);
  const double r_plus = (-lambda + root) / (2.0 * f2);
  const double r_minus = (-lambda - root) / (2.0 * f2);
  const double gamma = 1.0 / std::sqrt(x0 * r_plus);

  std::vector<SparseMatrix> coeffs{ode.coefficient(0).scaled(gamma), ode.coefficient(1),
                                   ode.coefficient(2).scaled(1.0 / gamma)};
  PolynomialODE rescaled(std::move(coeffs), gamma * ode.x0());

  const double new_sum = spectral_norm(rescaled.coefficient(2)) + spectral_norm(rescaled.coefficient(0));
  if (!(new_sum < std::abs(lambda))) {
    warnings.push_back("rescaled ||F2|| + ||F0|| = " + std::to_string(new_sum) + " is not below |Re lambda1|");
  }
  if (!(rescaled.x0().norm() < 1.0)) {
    warnings.push_back("rescaled ||x0|| = " + std::to_string(rescaled.x0().norm()) + " is not below 1");
  }
  return GammaRescaling{gamma, r_plus, r_minus, std::move(rescaled), std::move(warnings)};
}

DecayRatios decay_ratios(const DenseVector& x0, const DenseVector& xT, int k) {
  const double nT = xT.norm();
  if (nT == 0.0) throw InvalidArgument("x(T) = 0: decay ratio is undefined");
  const double n0 = x0.norm();
  DecayRatios d;
  d.q = n0 / nT;
  d.q_k = k >= 2 ? lifted_norm(n0, k) / lifted_norm(nT, k) : d.q;
  return d;
}

double p_measure_bound(Index m, Index p, int N, double q) {
  if (m == 0 || N < 1 || !(q > 0.0)) throw InvalidArgument("p_measure_bound needs m >= 1, N >= 1 and q > 0");
  return static_cast<double>(p + 1) / (9.0 * static_cast<double>(m + p + 1) * N * q * q);
}

double complexity_expression(Index s_k, double T, double q_k, double eps, int k, Index n) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  const double lead = static_cast<double>(s_k) * T * T * q_k / eps;
  const double log_t = std::max(1.0, std::log(T));
  const double log_n = std::max(1.0, (k - 1) * std::log(static_cast<double>(n)));
  const double log_eps = std::max(1.0, std::log(1.0 / eps));
  return lead * log_t * log_n * log_eps;
}

double condition_estimate(const SparseMatrix& L, Index dense_limit) {
  if (L.rows() != L.cols()) throw DimensionError("condition_estimate needs a square matrix");
  if (L.rows() == 0) throw InvalidArgument("condition_estimate of an empty matrix");

  if (L.is_lower_triangular()) {
    for (Index r = 0; r < L.rows(); ++r) {
      if (L.at(r, r) == 0.0) throw NumericalError("singular matrix: zero on the diagonal");
    }
    PowerIterationOptions opts;
    opts.tol = 1e-6;
    double norm = 0.0;
    try {
      norm = spectral_norm(L, opts);
    } catch (const ConvergenceError& e) {
      norm = e.last_estimate();
    }
    const SparseMatrix Lt = L.transpose();
    std::vector<double> tmp(L.rows());
    // (L^-1)^T L^-1 = L^-T L^-1
    const LinearOperator inv_gram = [&](std::span<const double> x, std::span<double> y) {
      triangular_solve(L, true, x, tmp);
      triangular_solve(Lt, false, tmp, y);
    };
    double inv_sq = 0.0;
    try {
      inv_sq = dominant_psd_eigenvalue(inv_gram, L.rows(), opts);
    } catch (const ConvergenceError& e) {
      inv_sq = e.last_estimate();
    }
    if (!std::isfinite(inv_sq)) throw NumericalError("matrix is numerically singular");
    return norm * std::sqrt(inv_sq);
  }

  if (L.rows() > dense_limit) {
    throw InvalidArgument("condition_estimate: non-triangular matrix too large for a dense SVD");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_dense(L));
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || smin <= sv(0) * 1e-15) throw NumericalError("matrix is singular");
  return sv(0) / smin;
}

double lifted_re_lambda1(const PolynomialODE& ode, std::optional<double> re_lambda1) {
  // F~1 = F1 for k = 2; for F0 = 0 its block upper-triangular spectrum peaks at Re lambda1.
  if (!ode.has_forcing() || ode.degree() <= 2) {
    return re_lambda1 ? *re_lambda1 : max_real_eigenvalue(ode.coefficient(1));
  }
  const QuadraticODE q = quadratize(ode);
  if (q.lift_dim > 256) {
    throw InvalidArgument("lifted dimension " + std::to_string(q.lift_dim) +
                          " is too large for a dense eigensolve of F~1; supply Re lambda1~ explicitly");
  }
  return max_real_eigenvalue(q.ode.coefficient(1), 256);
}

DiagnosticsReport diagnose(const PolynomialODE& ode, const DiagnosticsOptions& options) {
  if (options.level < 1) throw InvalidArgument("truncation level N must be >= 1");
  if (!(options.horizon > 0.0)) throw InvalidArgument("horizon T must be positive");
  const int k = ode.degree();
  const Index n = ode.dim();

  DiagnosticsReport r;
  r.level = options.level;
  r.re_lambda1 = options.re_lambda1 ? *options.re_lambda1 : max_real_eigenvalue(ode.coefficient(1));
  if (r.re_lambda1 >= 0.0) {
    r.warnings.push_back("Re lambda1 = " + std::to_string(r.re_lambda1) +
                         " is not negative; dissipative ratios are omitted");
  }

  auto attempt = [&r](const char* name, auto&& fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const Error& e) {
      r.warnings.push_back(std::string(name) + ": " + e.what());
      return std::nullopt;
    }
  };

  if (k >= 2 && r.re_lambda1 < 0.0) {
    if (k == 2) r.r2 = attempt("R2", [&] { return compute_R2(ode, r.re_lambda1); });
    r.re_lambda1_tilde = attempt("Re lambda1~", [&] { return lifted_re_lambda1(ode, r.re_lambda1); });
    if (r.re_lambda1_tilde) r.rk = attempt("Rk", [&] { return compute_Rk(ode, *r.re_lambda1_tilde); });
    if (!ode.has_forcing()) r.rk0 = attempt("Rk0", [&] { return compute_Rk0(ode, r.re_lambda1); });
    if (k == 2) {
      r.gamma = attempt("gamma", [&] {
        GammaRescaling g = rescale_gamma(ode, r.re_lambda1);
        for (auto& w : g.warnings) r.warnings.push_back("gamma: " + w);
        return g.gamma;
      });
    }
    for (const auto& [name, value] : {std::pair{"R2", r.r2}, std::pair{"Rk", r.rk}, std::pair{"Rk0", r.rk0}}) {
      if (value && *value >= 1.0) {
        r.warnings.push_back(std::string(name) + " = " + std::to_string(*value) +
                             " >= 1; convergence is not guaranteed");
      }
    }
  }

  const Trajectory ref = direct_integrate(ode, options.horizon, options.oracle_steps);
  const DecayRatios d = decay_ratios(ode.x0(), ref.states.back(), std::max(k, 2));
  r.q = d.q;
  r.q_k = d.q_k;

  r.s = ode.sparsity();
  r.s_k_bound = r.s * static_cast<Index>(k) * static_cast<Index>(k - 1) / 2;
  if (k > 2) {
    const QuadraticODE lifted = quadratize(ode);
    r.s_k = std::max(lifted.ode.coefficient(1).sparsity(), lifted.ode.coefficient(2).sparsity());
  } else {
    r.s_k = r.s;
  }
  r.n_c = carleman_dimension(n, options.level);

  const CarlemanSystem sys = assemble_truncated(ode, options.level);
  for (const auto& w : sys.warnings) r.warnings.push_back(w);
  r.steps = options.steps ? *options.steps : default_steps(sys, options.horizon);
  r.padding = options.padding ? *options.padding : r.steps;
  r.p_measure_bound = p_measure_bound(r.steps, r.padding, options.level, r.q);
  r.complexity_expr = complexity_expression(std::max<Index>(r.s_k, 1), options.horizon, r.q_k, options.eps,
                                            std::max(k, 2), n);

  const Index block_nnz = (r.steps + r.padding + 1) * (2 * sys.dim() + sys.generator.nnz());
  if (block_nnz <= options.condition_max_nnz) {
    r.cond_estimate = attempt("cond_estimate", [&] {
      return condition_estimate(assemble_block(sys, options.horizon, r.steps, r.padding).matrix);
    });
  } else {
    r.warnings.push_back("cond_estimate skipped: block system has about " + std::to_string(block_nnz) +
                         " nonzeros");
  }
  return r;
}

nlohmann::json to_json(const DiagnosticsReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json { return v ? nlohmann::json(*v) : nullptr; };
  return {{"re_lambda1", r.re_lambda1},
          {"re_lambda1_tilde", opt(r.re_lambda1_tilde)},
          {"r2", opt(r.r2)},
          {"rk", opt(r.rk)},
          {"rk0", opt(r.rk0)},
          {"gamma", opt(r.gamma)},
          {"q", r.q},
          {"q_k", r.q_k},
          {"s", r.s},
          {"s_k", r.s_k},
          {"s_k_bound", r.s_k_bound},
          {"n_c", r.n_c},
          {"N", r.level},
          {"m", r.steps},
          {"p", r.padding},
          {"cond_estimate", opt(r.cond_estimate)},
          {"p_measure_bound", r.p_measure_bound},
          {"complexity_expr", r.complexity_expr},
          {"warnings", r.warnings}};
}

}  // namespace carleman
