// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "carleman/carleman_system.hpp"
#include "carleman/diagnostics.hpp"
#include "carleman/errors.hpp"
#include "carleman/models.hpp"
#include "carleman/quadratize.hpp"
#include "carleman/solver.hpp"
#include "oracles.hpp"

using namespace carleman;

namespace {

PolynomialODE quadratic(double f0, double f1, double f2, double x0) {
  std::vector<SparseMatrix> c{SparseMatrix::from_triplets(1, 1, {{0, 0, f0}}),
                              SparseMatrix::from_triplets(1, 1, {{0, 0, f1}}),
                              SparseMatrix::from_triplets(1, 1, {{0, 0, f2}})};
  return PolynomialODE(c, DenseVector{x0});
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("R2 direct substitution") {
    CHECK(compute_R2(quadratic(0.0, -1.0, 0.5, 1.0), -1.0) == doctest::Approx(0.5));
    CHECK(compute_R2(scalar_logistic(0.5), -1.0) == doctest::Approx(0.5));
  }

  TEST_CASE("R2 against independent dense norms") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const PolynomialODE ode = random_polynomial_ode(3, 2, seed);
      const double lam = max_real_eigenvalue(ode.coefficient(1));
      const double x0 = oracle::dense(ode.x0()).norm();
      const double expect =
          (x0 * oracle::norm2(ode.coefficient(2)) + oracle::norm2(ode.coefficient(0)) / x0) / std::abs(lam);
      CHECK(compute_R2(ode, lam) == doctest::Approx(expect).epsilon(1e-8));
    }
  }

  TEST_CASE("dissipation and zero-state errors") {
    CHECK_THROWS_AS(compute_R2(scalar_logistic(0.5), 0.1), DissipationError);
    CHECK_THROWS_AS(compute_R2(scalar_logistic(0.0), -1.0), InvalidArgument);
    CHECK_THROWS_AS(compute_Rk0(quadratic(0.1, -1.0, 0.5, 0.5)), InvalidArgument);
  }

  TEST_CASE("Rk hand computation on a scalar cubic with unit x0") {
    std::vector<SparseMatrix> c{SparseMatrix(1, 1), SparseMatrix::from_triplets(1, 1, {{0, 0, -2.0}}),
                                SparseMatrix::from_triplets(1, 1, {{0, 0, 0.3}}),
                                SparseMatrix::from_triplets(1, 1, {{0, 0, -0.4}})};
    const PolynomialODE ode(c, DenseVector{1.0});
    CHECK(compute_Rk(ode, -2.0) == doctest::Approx(2.0 * 0.7 * std::sqrt(2.0) / 2.0));
  }

  TEST_CASE("Rk0 for x' = -x - x^3") {
    const double a = 0.6;
    CHECK(compute_Rk0(scalar_cubic(a, -1.0, -1.0)) == doctest::Approx(2.0 * std::sqrt(a * a + std::pow(a, 4))));
  }

  TEST_CASE("gamma rescaling with F0 = 0") {
    const PolynomialODE ode = quadratic(0.0, -1.5, 0.5, 0.8);
    const GammaRescaling g = rescale_gamma(ode);
    CHECK(g.r_plus == doctest::Approx(1.5 / 0.5));
    CHECK(g.gamma == doctest::Approx(std::sqrt(0.5 / (0.8 * 1.5))));
  }

  TEST_CASE("gamma rescaling negative discriminant") {
    CHECK_THROWS_AS(rescale_gamma(quadratic(1.0, -1.0, 1.0, 0.5)), InvalidArgument);
  }

  TEST_CASE("gamma rescaling warns on R2 >= 1") {
    const GammaRescaling g = rescale_gamma(quadratic(0.0, -1.0, 1.0, 2.0));
    CHECK_FALSE(g.warnings.empty());
  }

  TEST_CASE("decay ratios") {
    const DenseVector x{0.3, 0.4};
    const DecayRatios same = decay_ratios(x, x, 3);
    CHECK(same.q == doctest::Approx(1.0));
    CHECK(same.q_k == doctest::Approx(1.0));
    const DecayRatios k2 = decay_ratios(x, DenseVector{0.1, 0.0}, 2);
    CHECK(k2.q == doctest::Approx(k2.q_k));
    CHECK_THROWS_AS(decay_ratios(x, DenseVector(2), 3), InvalidArgument);
  }

  TEST_CASE("P bound substitution and N scaling") {
    CHECK(p_measure_bound(10, 10, 1, 1.0) == doctest::Approx(11.0 / (9.0 * 21.0)));
    CHECK(p_measure_bound(100000, 100000, 1, 1.0) == doctest::Approx(1.0 / 18.0).epsilon(1e-4));
    CHECK(p_measure_bound(50, 50, 4, 1.3) == doctest::Approx(p_measure_bound(50, 50, 2, 1.3) / 2.0));
  }

  TEST_CASE("complexity expression structure") {
    const double base = complexity_expression(3, 2.0, 1.5, 0.01, 2, 10);
    const double doubled = complexity_expression(3, 4.0, 1.5, 0.01, 2, 10);
    CHECK(doubled / base == doctest::Approx(4.0 * std::log(4.0) / 1.0));
    // With every log factor floored at 1 only s T^2 q / eps remains.
    CHECK(complexity_expression(3, 1.0, 1.5, 0.5, 2, 2) == doctest::Approx(3.0 * 1.5 / 0.5));
    CHECK_THROWS_AS(complexity_expression(1, 1.0, 1.0, 1.5, 2, 2), InvalidArgument);
  }

  TEST_CASE("condition estimate trivial cases") {
    CHECK(condition_estimate(SparseMatrix::identity(5)) == doctest::Approx(1.0));
    const std::vector<double> d{1.0, 10.0};
    CHECK(condition_estimate(SparseMatrix::diagonal(d)) == doctest::Approx(10.0).epsilon(1e-3));
    CHECK_THROWS_AS(condition_estimate(SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}})), NumericalError);
  }

  TEST_CASE("condition estimate of a small block system within 10% of dense SVD") {
    const CarlemanSystem sys = assemble_truncated(scalar_logistic(0.5), 2);
    const BlockEulerSystem bes = assemble_block(sys, 1.0, 20, 20);
    const Eigen::MatrixXd L = oracle::dense(bes.matrix);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(L);
    const auto& sv = svd.singularValues();
    const double expect = sv(0) / sv(sv.size() - 1);
    CHECK(condition_estimate(bes.matrix) == doctest::Approx(expect).epsilon(0.1));
  }

  TEST_CASE("max real eigenvalue paths") {
    const std::vector<double> d{-3.0, -0.5};
    CHECK(max_real_eigenvalue(SparseMatrix::diagonal(d)) == -0.5);
    const SparseMatrix rot = SparseMatrix::from_triplets(2, 2, {{0, 0, -1.0}, {0, 1, 2.0}, {1, 0, -2.0}, {1, 1, -1.0}});
    CHECK(max_real_eigenvalue(rot) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(max_real_eigenvalue(SparseMatrix::identity(100) + kron(SparseMatrix::identity(50),
                                                                           SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}}))),
                    InvalidArgument);
  }

  TEST_CASE("lifted eigenvalue equals Re lambda1 without forcing") {
    RandomODEOptions o;
    o.forcing = false;
    const PolynomialODE ode = random_polynomial_ode(2, 3, 4, o);
    const double lam = max_real_eigenvalue(ode.coefficient(1));
    const QuadraticODE q = quadratize(ode);
    CHECK(max_real_eigenvalue(q.ode.coefficient(1), 256) == doctest::Approx(lam).epsilon(1e-10));
    CHECK(lifted_re_lambda1(ode) == doctest::Approx(lam));
  }

  TEST_CASE("diagnose report invariants on the benchmark") {
    DiagnosticsOptions o;
    o.level = 2;
    const DiagnosticsReport r = diagnose(build_reaction_diffusion(rd_preset("fig1")), o);
    CHECK(r.re_lambda1 < 0.0);
    REQUIRE(r.rk0.has_value());
    REQUIRE(r.rk.has_value());
    CHECK(*r.rk == doctest::Approx(*r.rk0));
    CHECK_FALSE(r.r2.has_value());
    CHECK(r.s == 3);
    CHECK(r.s_k <= r.s_k_bound);
    CHECK(r.q >= 1.0);
    CHECK(r.n_c == 110);
    CHECK(r.complexity_expr > 0.0);
    CHECK(std::isfinite(r.complexity_expr));
    const auto j = to_json(r);
    for (const char* key : {"re_lambda1", "r2", "rk", "rk0", "gamma", "q", "q_k", "s", "s_k", "n_c", "cond_estimate",
                            "p_measure_bound", "complexity_expr"}) {
      CHECK(j.contains(key));
    }
  }
}
