// SPDX-License-Identifier: Apache-2.0
#include "carleman/models.hpp"

#include <cmath>
#include <random>

#include "carleman/diagnostics.hpp"
#include "carleman/errors.hpp"

namespace carleman {

void RDParams::validate() const {
  if (n < 2) throw InvalidArgument("reaction-diffusion needs n >= 2 grid points");
  if (!(length > 0.0)) throw InvalidArgument("domain length must be positive");
  if (!(allee >= 0.0 && allee <= 0.5)) throw InvalidArgument("Allee parameter a must lie in [0, 1/2]");
  if (!(y_star > 0.0 && y_star < length)) throw InvalidArgument("y_star must lie in (0, L)");
  if (!(diffusion() > 0.0)) throw InvalidArgument("kappa must be positive");
  if (!std::isfinite(u_in)) throw InvalidArgument("u_in must be finite");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon T must be positive");
}

RDParams rd_preset(std::string_view name) {
  RDParams p;
  if (name == "fig1") return p;
  if (name == "fig2") {
    p.u_in = 0.5;
    return p;
  }
  if (name == "fig2-text") {
    p.u_in = 0.3;
    return p;
  }
  throw InvalidArgument("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> rd_preset_names() { return {"fig1", "fig2", "fig2-text"}; }

PolynomialODE build_reaction_diffusion(const RDParams& p) {
  p.validate();
  const Index n = p.n;
  const double beta = p.diffusion() / (p.dy() * p.dy());
  const double a = p.allee;
  const double s = p.expanded_reaction ? -a : a;

  TripletList f1(n, n);
  for (Index i = 0; i < n; ++i) {
    const bool edge = i == 0 || i == n - 1;
    f1.add(i, i, s - (edge ? beta : 2.0 * beta));
    if (i > 0) f1.add(i, i - 1, beta);
    if (i + 1 < n) f1.add(i, i + 1, beta);
  }
  TripletList f2(n, n * n);
  TripletList f3(n, checked_pow(n, 3));
  for (Index i = 0; i < n; ++i) {
    f2.add(i, i * n + i, 1.0 + a);
    f3.add(i, i * n * n + i * n + i, -1.0);
  }

  DenseVector x0(n);
  for (Index i = 0; i < n; ++i) {
    const double y = static_cast<double>(i) * p.dy();
    const bool lower_ok = p.inclusive_origin ? y >= 0.0 : y > 0.0;
    if (lower_ok && y < p.y_star) x0[i] = p.u_in;
  }

  std::vector<SparseMatrix> coeffs;
  coeffs.emplace_back(n, 1);
  coeffs.push_back(std::move(f1).build());
  coeffs.push_back(std::move(f2).build());
  coeffs.push_back(std::move(f3).build());
  return PolynomialODE(std::move(coeffs), std::move(x0));
}

double linear_decay_from_reaction(const RDParams& p) {
  return max_real_eigenvalue(build_reaction_diffusion(p).coefficient(1));
}

PolynomialODE scalar_cubic(double x0, double lambda, double c) {
  std::vector<SparseMatrix> coeffs{SparseMatrix(1, 1), SparseMatrix::from_triplets(1, 1, {{0, 0, lambda}}),
                                   SparseMatrix(1, 1), SparseMatrix::from_triplets(1, 1, {{0, 0, c}})};
  return PolynomialODE(std::move(coeffs), DenseVector{x0});
}

PolynomialODE scalar_logistic(double x0) {
  std::vector<SparseMatrix> coeffs{SparseMatrix(1, 1), SparseMatrix::from_triplets(1, 1, {{0, 0, -1.0}}),
                                   SparseMatrix::from_triplets(1, 1, {{0, 0, 1.0}})};
  return PolynomialODE(std::move(coeffs), DenseVector{x0});
}

PolynomialODE linear_decay(Index n, double rate, double x0) {
  std::vector<double> diag(n, -rate);
  std::vector<SparseMatrix> coeffs{SparseMatrix(n, 1), SparseMatrix::diagonal(diag)};
  return PolynomialODE(std::move(coeffs), DenseVector(n, x0));
}

PolynomialODE random_polynomial_ode(Index n, int k, std::uint64_t seed, const RandomODEOptions& opts) {
  if (n == 0 || k < 1) throw InvalidArgument("random_polynomial_ode needs n >= 1 and k >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<SparseMatrix> coeffs;
  TripletList f0(n, 1);
  if (opts.forcing) {
    for (Index r = 0; r < n; ++r) {
      if (coin(rng) < opts.density) f0.add(r, 0, opts.entry_scale * unit(rng));
    }
  }
  coeffs.push_back(std::move(f0).build());

  TripletList f1(n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const double noise = coin(rng) < opts.density ? opts.linear_noise * unit(rng) : 0.0;
      f1.add(r, c, (r == c ? opts.linear_shift : 0.0) + noise);
    }
  }
  coeffs.push_back(std::move(f1).build());

  for (int j = 2; j <= k; ++j) {
    const Index cols = checked_pow(n, static_cast<Index>(j));
    TripletList fj(n, cols);
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < cols; ++c) {
        if (coin(rng) < opts.density) fj.add(r, c, opts.entry_scale * unit(rng));
      }
    }
    coeffs.push_back(std::move(fj).build());
  }

  DenseVector x0(n);
  for (Index r = 0; r < n; ++r) x0[r] = opts.x0_scale * unit(rng);
  return PolynomialODE(std::move(coeffs), std::move(x0));
}

}  // namespace carleman
