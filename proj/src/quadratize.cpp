// SPDX-License-Identifier: Apache-2.0
#include "carleman/quadratize.hpp"

#include <cmath>
#include <random>

#include "carleman/carleman_system.hpp"
#include "carleman/errors.hpp"

namespace carleman {

QuadraticODE quadratize(const PolynomialODE& ode) {
  const int k = ode.degree();
  if (k < 2) throw InvalidArgument("quadratize requires degree k >= 2");
  const Index n = ode.dim();

  std::vector<Index> offsets{0};
  for (int i = 1; i <= k - 1; ++i) offsets.push_back(offsets.back() + checked_pow(n, static_cast<Index>(i)));
  const Index nq = offsets.back();
  const Index nq2 = checked_mul(nq, nq);
  const Index last_offset = offsets[static_cast<Index>(k - 2)];
  const Index last_dim = checked_pow(n, static_cast<Index>(k - 1));

  TripletList f1(nq, nq);
  TripletList f2(nq, nq2);
  for (int i = 1; i <= k - 1; ++i) {
    const Index row_offset = offsets[static_cast<Index>(i - 1)];
    for (int j = 0; j <= k; ++j) {
      const int target = i + j - 1;
      if (target < 1) continue;  // A^1_0 is the forcing term
      if (ode.coefficient(j).empty()) continue;
      const SparseMatrix a = transfer_matrix(ode, i, j);
      if (target <= k - 1) {
        f1.add_block(row_offset, offsets[static_cast<Index>(target - 1)], a);
        continue;
      }
      // x^[target] = x~_m (x) x~_{k-1}; column u * n^{k-1} + v of A maps to
      // (offset_m + u) * nq + offset_{k-1} + v in the x~ (x) x~ layout.
      const int m = target - (k - 1);
      const Index m_offset = offsets[static_cast<Index>(m - 1)];
      check_capacity(f2.size() + a.nnz(), "quadratized F2");
      for (const auto& t : a.entries()) {
        const Index u = t.col / last_dim;
        const Index v = t.col % last_dim;
        f2.add(row_offset + t.row, (m_offset + u) * nq + last_offset + v, t.value);
      }
    }
  }

  DenseVector f0(nq);
  const DenseVector forcing = ode.forcing();
  for (Index r = 0; r < n; ++r) f0[r] = forcing[r];

  std::vector<SparseMatrix> coeffs;
  coeffs.push_back(SparseMatrix::column(f0));
  coeffs.push_back(std::move(f1).build());
  coeffs.push_back(std::move(f2).build());
  return QuadraticODE{PolynomialODE(std::move(coeffs), lift_state(ode.x0(), k)), nq, std::move(offsets), n, k};
}

DenseVector lift_state(const DenseVector& x, int k) {
  if (k < 2) throw InvalidArgument("lift_state requires k >= 2");
  std::vector<double> out;
  DenseVector power{1.0};
  for (int i = 1; i <= k - 1; ++i) {
    power = kron_vec(x, power);
    out.insert(out.end(), power.begin(), power.end());
  }
  return DenseVector(std::move(out));
}

namespace {

/// d/dt x^[i] = sum_p x (x) .. (x) f (x) .. (x) x with f in slot p.
DenseVector power_derivative(const DenseVector& x, const DenseVector& f, int i) {
  DenseVector total(checked_pow(x.size(), static_cast<Index>(i)));
  for (int p = 1; p <= i; ++p) {
    DenseVector term{1.0};
    for (int slot = 1; slot <= i; ++slot) term = kron_vec(term, slot == p ? f : x);
    total += term;
  }
  return total;
}

}  // namespace

ConsistencyReport rhs_consistency_check(const PolynomialODE& ode, const QuadraticODE& q, int trials,
                                        std::uint64_t seed) {
  ConsistencyReport report;
  report.trials = trials;
  std::mt19937_64 rng(seed);
  const Index n = ode.dim();
  const int k = ode.degree();
  for (int t = 0; t < trials; ++t) {
    DenseVector x(n);
    for (Index r = 0; r < n; ++r) x[r] = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
    const DenseVector lifted_rhs = evaluate_rhs(q.ode, lift_state(x, k));
    const DenseVector reference = evaluate_rhs(ode, x);

    const double abs_dev = distance(lifted_rhs.segment(0, n), reference);
    const double scale = std::max(reference.norm(), 1.0);
    report.max_discrepancy = std::max(report.max_discrepancy, abs_dev);
    report.max_relative_discrepancy = std::max(report.max_relative_discrepancy, abs_dev / scale);

    for (int i = 1; i <= k - 1; ++i) {
      const Index off = q.segment_offsets[static_cast<Index>(i - 1)];
      const Index len = q.segment_offsets[static_cast<Index>(i)] - off;
      const DenseVector expect = power_derivative(x, reference, i);
      const double dev = distance(lifted_rhs.segment(off, len), expect) / std::max(expect.norm(), 1.0);
      report.max_segment_discrepancy = std::max(report.max_segment_discrepancy, dev);
    }
  }
  report.passed = report.max_relative_discrepancy <= 1e-10 && report.max_segment_discrepancy <= 1e-10;
  return report;
}

EquivalenceReport equivalence_check(const PolynomialODE& ode, int N, double T, double h) {
  const int k = ode.degree();
  if (k < 2) throw InvalidArgument("equivalence_check requires k >= 2");
  if (N < 1) throw InvalidArgument("truncation level N must be >= 1");
  if (!(T > 0.0) || !(h > 0.0)) throw InvalidArgument("T and h must be positive");

  const QuadraticODE q = quadratize(ode);
  const CarlemanSystem quad = assemble_truncated(q.ode, N);
  const CarlemanSystem direct = assemble_truncated(ode, N * (k - 1));

  EquivalenceReport report;
  report.level = N;
  report.direct_level = N * (k - 1);
  report.horizon = T;
  report.step = h;
  report.steps = static_cast<Index>(std::llround(T / h));
  if (report.steps == 0) report.steps = 1;
  report.quadratic_dim = quad.dim();
  report.direct_dim = direct.dim();

  const Index n = ode.dim();
  DenseVector zq = quad.initial_state;
  DenseVector zd = direct.initial_state;
  DenseVector tq(zq.size());
  DenseVector td(zd.size());
  auto gap = [&] {
    double s = 0.0;
    for (Index r = 0; r < n; ++r) s += (zq[r] - zd[r]) * (zq[r] - zd[r]);
    return std::sqrt(s);
  };
  report.max_discrepancy = gap();
  for (Index s = 0; s < report.steps; ++s) {
    quad.generator.multiply(zq.span(), tq.span());
    direct.generator.multiply(zd.span(), td.span());
    for (Index r = 0; r < zq.size(); ++r) zq[r] += h * (tq[r] + quad.forcing[r]);
    for (Index r = 0; r < zd.size(); ++r) zd[r] += h * (td[r] + direct.forcing[r]);
    if (!zq.all_finite() || !zd.all_finite()) {
      throw NumericalError("Euler iterate became non-finite in equivalence_check",
                           static_cast<double>(s) * h);
    }
    report.max_discrepancy = std::max(report.max_discrepancy, gap());
  }
  return report;
}

nlohmann::json to_json(const ConsistencyReport& r) {
  return {{"trials", r.trials},
          {"max_discrepancy", r.max_discrepancy},
          {"max_relative_discrepancy", r.max_relative_discrepancy},
          {"max_segment_discrepancy", r.max_segment_discrepancy},
          {"passed", r.passed}};
}

nlohmann::json to_json(const EquivalenceReport& r) {
  return {{"max_discrepancy", r.max_discrepancy},
          {"trials", 1},
          {"N", r.level},
          {"N_direct", r.direct_level},
          {"T", r.horizon},
          {"h", r.step},
          {"steps", r.steps},
          {"quadratic_dim", r.quadratic_dim},
          {"direct_dim", r.direct_dim}};
}

}  // namespace carleman
