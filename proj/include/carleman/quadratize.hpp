// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "carleman/polyode.hpp"

namespace carleman {

/// Quadratic lift of a degree-k system over x~ = (x, x^[2], ..., x^[k-1]).
struct QuadraticODE {
  PolynomialODE ode;   ///< degree 2, dimension lift_dim
  Index lift_dim = 0;  ///< (n^k - n) / (n - 1)
  std::vector<Index> segment_offsets;  ///< start of x^[i], i = 1..k-1, plus the total at the end
  Index source_dim = 0;
  int source_degree = 0;
};

/// Builds F~0, F~1 and F~2 from transfer matrices. Row block i of F~1 holds
/// A^i_l for l <= k-1; row block i of F~2 holds A^i_{k+m-1} on the
/// x~_m (x) x~_{k-1} columns for m = 1..i. Requires k >= 2.
QuadraticODE quadratize(const PolynomialODE& ode);

/// Concatenation (x, x^[2], ..., x^[k-1]).
DenseVector lift_state(const DenseVector& x, int k);

struct ConsistencyReport {
  int trials = 0;
  double max_discrepancy = 0.0;           ///< absolute, leading n components
  double max_relative_discrepancy = 0.0;  ///< relative to the reference norm
  double max_segment_discrepancy = 0.0;   ///< relative, all lifted segments
  bool passed = false;                    ///< relative deviations <= 1e-10
};

/// For random x compares the quadratic right-hand side at lift_state(x)
/// against evaluate_rhs(ode, x) on the leading segment, and every segment
/// against the product-rule derivative of x^[i].
ConsistencyReport rhs_consistency_check(const PolynomialODE& ode, const QuadraticODE& q, int trials,
                                        std::uint64_t seed = 7);

struct EquivalenceReport {
  int level = 0;         ///< N for the quadratic path
  int direct_level = 0;  ///< N (k - 1)
  double horizon = 0.0;
  double step = 0.0;
  Index steps = 0;
  Index quadratic_dim = 0;
  Index direct_dim = 0;
  double max_discrepancy = 0.0;  ///< max over steps of the l2 gap on the leading n components
};

/// Forward-Euler integrates the CL of quadratize(ode) at N and the direct CL
/// at N(k-1) with the same step h and compares the leading n components.
EquivalenceReport equivalence_check(const PolynomialODE& ode, int N, double T, double h);

nlohmann::json to_json(const ConsistencyReport& r);
nlohmann::json to_json(const EquivalenceReport& r);

}  // namespace carleman
