// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carleman/polyode.hpp"

namespace carleman {

/// 1-D reaction-diffusion with an Allee reaction u(1-u)(u-a), zero-flux
/// Neumann boundaries and a finite-difference grid y_i = i dy, dy = L/(n-1).
struct RDParams {
  Index n = 10;
  double length = 1.0;
  double allee = 0.25;
  std::optional<double> kappa;  ///< default dy^2, so beta = 1
  double u_in = 0.03;
  double y_star = 0.3;
  double horizon = 1.0;
  /// Linear reaction coefficient -a from expanding u(1-u)(u-a). When false
  /// the diagonal is built from +a instead.
  bool expanded_reaction = true;
  /// Plateau covers 0 <= y < y_star; when false only 0 < y < y_star.
  bool inclusive_origin = true;

  double dy() const { return length / static_cast<double>(n - 1); }
  double diffusion() const { return kappa ? *kappa : dy() * dy(); }
  /// Throws InvalidArgument on n < 2, a outside [0, 1/2], y_star outside
  /// (0, L) or kappa <= 0.
  void validate() const;
};

/// Named presets: "fig1" (u_in 0.03), "fig2" (u_in 0.5), "fig2-text" (u_in 0.3).
RDParams rd_preset(std::string_view name);
std::vector<std::string> rd_preset_names();

/// k = 3, F0 = 0. F1 tridiagonal with off-diagonals beta = kappa/dy^2,
/// F2(i, i n + i) = 1 + a and F3(i, i n^2 + i n + i) = -1 (0-based).
PolynomialODE build_reaction_diffusion(const RDParams& p);

/// Max eigenvalue of the symmetric tridiagonal F1.
double linear_decay_from_reaction(const RDParams& p);

/// dx/dt = lambda x + c x^3, scalar.
PolynomialODE scalar_cubic(double x0 = 0.5, double lambda = -1.0, double c = -1.0);

/// dx/dt = -x + x^2, x0 = 0.5.
PolynomialODE scalar_logistic(double x0 = 0.5);

/// dx/dt = -x, for time-discretization checks on an exactly linear problem.
PolynomialODE linear_decay(Index n = 2, double rate = 1.0, double x0 = 1.0);

struct RandomODEOptions {
  double linear_shift = -1.0;   ///< F1 = shift I + noise
  double linear_noise = 0.1;
  double entry_scale = 0.3;     ///< nonlinear and forcing entries ~ U(-scale, scale)
  double density = 1.0;         ///< fraction of stored entries per coefficient
  bool forcing = true;
  double x0_scale = 0.3;
};

/// Seeded random system of dimension n and degree k.
PolynomialODE random_polynomial_ode(Index n, int k, std::uint64_t seed, const RandomODEOptions& opts = {});

}  // namespace carleman
