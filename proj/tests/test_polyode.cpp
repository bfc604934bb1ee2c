// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "carleman/errors.hpp"
#include "carleman/models.hpp"
#include "carleman/polyode.hpp"
#include "oracles.hpp"

using namespace carleman;

namespace {

const char* kLogisticSpec = R"({
  "n": 1, "k": 2,
  "F": [ {"degree": 1, "rows": 1, "cols": 1, "triplets": [[0, 0, -1.0]]},
         {"degree": 2, "rows": 1, "cols": 1, "triplets": [[0, 0, 1.0]]} ],
  "x0": [0.5]
})";

}  // namespace

TEST_SUITE("polyode") {
  TEST_CASE("constructor validates coefficient shapes") {
    std::vector<SparseMatrix> bad{SparseMatrix(2, 1), SparseMatrix(2, 2), SparseMatrix(2, 3)};
    try {
      PolynomialODE ode(bad, DenseVector(2));
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      CHECK(std::string(e.what()).find("F[2]") != std::string::npos);
    }
    CHECK_THROWS_AS(PolynomialODE({SparseMatrix(1, 1)}, DenseVector{1.0}), InvalidArgument);
    CHECK_THROWS_AS(PolynomialODE({SparseMatrix(1, 1), SparseMatrix(1, 1)}, DenseVector{std::nan("")}),
                    InvalidArgument);
  }

  TEST_CASE("parse logistic spec") {
    const PolynomialODE ode = parse_ode_spec(kLogisticSpec);
    CHECK(ode.dim() == 1);
    CHECK(ode.degree() == 2);
    CHECK_FALSE(ode.has_forcing());
    CHECK(ode.coefficient(2).at(0, 0) == 1.0);
    CHECK(evaluate_rhs(ode, DenseVector{0.5})[0] == doctest::Approx(-0.25));
  }

  TEST_CASE("parse errors carry a line number") {
    const std::string broken = "{\n  \"n\": 1,\n  \"k\": 2,\n  \"F\": [ oops ]\n}";
    try {
      parse_ode_spec(broken);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }

  TEST_CASE("dimension mismatch in spec names the coefficient") {
    const std::string spec = R"({"n": 2, "k": 2,
      "F": [{"degree": 2, "rows": 2, "cols": 3, "triplets": []}], "x0": [1, 0]})";
    try {
      parse_ode_spec(spec);
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      CHECK(std::string(e.what()).find("F[2]") != std::string::npos);
    }
  }

  TEST_CASE("JSON round trip") {
    const PolynomialODE ode = random_polynomial_ode(2, 3, 17);
    const auto path = std::filesystem::temp_directory_path() / "carleman_roundtrip.json";
    save_ode_spec(ode, path);
    CHECK(load_ode_spec(path) == ode);
    std::filesystem::remove(path);
  }

  TEST_CASE("evaluate_rhs matches the dense oracle") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const PolynomialODE ode = random_polynomial_ode(3, 3, seed);
      const DenseVector x{0.2, -0.4, 0.7};
      const Eigen::VectorXd expect = oracle::rhs(ode, oracle::dense(x));
      CHECK((oracle::dense(evaluate_rhs(ode, x)) - expect).norm() < 1e-13);
    }
  }

  TEST_CASE("RK4 reference reproduces the logistic closed form") {
    // x' = -x + x^2, x(0) = 1/2  =>  x(t) = 1 / (1 + e^t)
    const Trajectory traj = direct_integrate(scalar_logistic(0.5), 2.0, 2000);
    CHECK(traj.times.size() == 2001);
    CHECK(traj.times.back() == 2.0);
    for (Index j = 0; j < traj.times.size(); j += 250) {
      CHECK(traj.states[j][0] == doctest::Approx(1.0 / (1.0 + std::exp(traj.times[j]))).epsilon(1e-11));
    }
  }

  TEST_CASE("RK4 reference is fourth order") {
    const PolynomialODE ode = scalar_logistic(0.5);
    const double exact = 1.0 / (1.0 + std::exp(1.0));
    const double e1 = std::abs(direct_integrate(ode, 1.0, 20).states.back()[0] - exact);
    const double e2 = std::abs(direct_integrate(ode, 1.0, 40).states.back()[0] - exact);
    CHECK(e1 / e2 >= 12.0);
    CHECK(e1 / e2 <= 20.0);
  }

  TEST_CASE("blow-up reports the last finite time") {
    // x' = x^2 with x0 = 1 blows up at t = 1.
    std::vector<SparseMatrix> coeffs{SparseMatrix(1, 1), SparseMatrix(1, 1),
                                     SparseMatrix::from_triplets(1, 1, {{0, 0, 1.0}})};
    const PolynomialODE ode(coeffs, DenseVector{1.0});
    try {
      direct_integrate(ode, 5.0, 1000);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(e.last_finite_time() > 0.5);
      CHECK(e.last_finite_time() < 5.0);
    }
  }

  TEST_CASE("trajectory sampling interpolates linearly") {
    Trajectory t;
    t.times = {0.0, 1.0};
    t.states = {DenseVector{0.0}, DenseVector{2.0}};
    CHECK(t.sample(0.25)[0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(t.sample(1.5), InvalidArgument);
  }

  TEST_CASE("trajectory CSV header") {
    Trajectory t;
    t.times = {0.0};
    t.states = {DenseVector{1.0, 2.0}};
    std::ostringstream os;
    write_trajectory_csv(t, os);
    CHECK(os.str().rfind("t,x1,x2\n", 0) == 0);
  }
}
