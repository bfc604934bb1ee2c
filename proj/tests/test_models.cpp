// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "carleman/diagnostics.hpp"
#include "carleman/errors.hpp"
#include "carleman/models.hpp"
#include "oracles.hpp"

using namespace carleman;

TEST_SUITE("models") {
  TEST_CASE("benchmark coefficients with beta = 1") {
    RDParams p = rd_preset("fig1");
    p.expanded_reaction = false;
    const PolynomialODE ode = build_reaction_diffusion(p);
    const SparseMatrix& f1 = ode.coefficient(1);
    CHECK(ode.degree() == 3);
    CHECK_FALSE(ode.has_forcing());
    CHECK(f1.at(0, 0) == doctest::Approx(0.25 - 1.0));
    CHECK(f1.at(4, 4) == doctest::Approx(0.25 - 2.0));
    CHECK(f1.at(4, 5) == doctest::Approx(1.0));
    CHECK(f1.is_symmetric(1e-15));
    CHECK(f1.sparsity() == 3);
    CHECK(ode.coefficient(2).row_sparsity() == 1);
    CHECK(ode.coefficient(3).row_sparsity() == 1);
    CHECK(ode.coefficient(2).at(3, 3 * 10 + 3) == doctest::Approx(1.25));
    CHECK(ode.coefficient(3).at(3, 3 * 100 + 3 * 10 + 3) == -1.0);
  }

  TEST_CASE("expanded reaction flips the linear sign") {
    const PolynomialODE ode = build_reaction_diffusion(rd_preset("fig1"));
    CHECK(ode.coefficient(1).at(4, 4) == doctest::Approx(-0.25 - 2.0));
    CHECK(linear_decay_from_reaction(rd_preset("fig1")) == doctest::Approx(-0.25));
    RDParams verbatim = rd_preset("fig1");
    verbatim.expanded_reaction = false;
    CHECK(linear_decay_from_reaction(verbatim) == doctest::Approx(0.25));
  }

  TEST_CASE("constant state: diffusion cancels and reaction is cubic") {
    const PolynomialODE ode = build_reaction_diffusion(rd_preset("fig1"));
    const double c = 0.4;
    const DenseVector rhs = evaluate_rhs(ode, DenseVector(10, c));
    for (Index i = 0; i < 10; ++i) CHECK(rhs[i] == doctest::Approx(c * (1.0 - c) * (c - 0.25)));
  }

  TEST_CASE("spatially constant data stays constant") {
    RDParams p = rd_preset("fig1");
    const PolynomialODE ode = build_reaction_diffusion(p).with_initial_state(DenseVector(10, 0.1));
    const Trajectory t = direct_integrate(ode, 1.0, 500);
    for (Index i = 1; i < 10; ++i) CHECK(t.states.back()[i] == doctest::Approx(t.states.back()[0]).epsilon(1e-13));
  }

  TEST_CASE("plateau conventions") {
    RDParams p = rd_preset("fig1");
    const DenseVector inclusive = build_reaction_diffusion(p).x0();
    CHECK(inclusive[0] == 0.03);
    CHECK(inclusive[2] == 0.03);
    CHECK(inclusive[3] == 0.0);
    p.inclusive_origin = false;
    const DenseVector strict = build_reaction_diffusion(p).x0();
    CHECK(strict[0] == 0.0);
    CHECK(strict[1] == 0.03);
  }

  TEST_CASE("Allee extinction: norm decreases") {
    const PolynomialODE ode = build_reaction_diffusion(rd_preset("fig1"));
    const Trajectory t = direct_integrate(ode, 1.0, 1000);
    for (Index j = 1; j < t.states.size(); ++j) CHECK(t.states[j].norm() < t.states[j - 1].norm());
  }

  TEST_CASE("two-point grid matches the analytic 2x2 spectrum") {
    RDParams p;
    p.n = 2;
    p.y_star = 0.5;
    p.kappa = 0.3;  // beta = 0.3
    // F1 = [[s - b, b], [b, s - b]] with s = -a: eigenvalues s and s - 2b.
    CHECK(linear_decay_from_reaction(p) == doctest::Approx(-0.25));
    const Eigen::MatrixXd f1 = oracle::dense(build_reaction_diffusion(p).coefficient(1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f1);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-0.25 - 0.6));
  }

  TEST_CASE("vanishing diffusion exposes a positive verbatim spectrum") {
    RDParams p = rd_preset("fig1");
    p.expanded_reaction = false;
    p.kappa = 1e-12;
    CHECK(linear_decay_from_reaction(p) == doctest::Approx(0.25));
  }

  TEST_CASE("parameter validation") {
    RDParams p;
    p.allee = 0.7;
    CHECK_THROWS_AS(build_reaction_diffusion(p), InvalidArgument);
    p = RDParams{};
    p.n = 1;
    CHECK_THROWS_AS(build_reaction_diffusion(p), InvalidArgument);
    p = RDParams{};
    p.y_star = 2.0;
    CHECK_THROWS_AS(build_reaction_diffusion(p), InvalidArgument);
    CHECK_THROWS_AS(rd_preset("nope"), InvalidArgument);
  }

  TEST_CASE("random systems are reproducible") {
    CHECK(random_polynomial_ode(2, 3, 5) == random_polynomial_ode(2, 3, 5));
    CHECK_FALSE(random_polynomial_ode(2, 3, 5) == random_polynomial_ode(2, 3, 6));
  }
}
