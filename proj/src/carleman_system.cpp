// SPDX-License-Identifier: Apache-2.0
#include "carleman/carleman_system.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "carleman/errors.hpp"

namespace carleman {

namespace {

void check_transfer_indices(const PolynomialODE& ode, int i, int j) {
  if (i < 1) throw InvalidArgument("transfer matrix row level i must be >= 1");
  if (j < 0 || j > ode.degree()) throw InvalidArgument("transfer matrix degree j must lie in 0..k");
}

}  // namespace

Index carleman_dimension(Index n, int N) {
  Index total = 0;
  for (int i = 1; i <= N; ++i) total += checked_pow(n, static_cast<Index>(i));
  return total;
}

DenseVector CarlemanSystem::block(const DenseVector& z, int i) const {
  if (i < 1 || i > level) throw InvalidArgument("block index outside 1..N");
  return z.segment(block_offsets[static_cast<Index>(i - 1)], block_dims[static_cast<Index>(i - 1)]);
}

SparseMatrix transfer_matrix(const PolynomialODE& ode, int i, int j) {
  check_transfer_indices(ode, i, j);
  const Index n = ode.dim();
  const auto level = static_cast<Index>(i);
  const Index rows = checked_pow(n, level);
  const Index cols = checked_pow(n, level + static_cast<Index>(j) - 1);
  const SparseMatrix& f = ode.coefficient(j);
  if (f.empty()) return SparseMatrix(rows, cols);
  if (i == 1) return f;

  SparseMatrix sum(rows, cols);
  for (Index p = 1; p <= level; ++p) {
    SparseMatrix term = f;
    if (p > 1) term = kron(identity_power(n, p - 1), term);
    if (p < level) term = kron(term, identity_power(n, level - p));
    sum = sum + term;
  }
  return sum;
}

SparseMatrix transfer_matrix_recursive(const PolynomialODE& ode, int i, int j) {
  check_transfer_indices(ode, i, j);
  if (i == 1) return ode.coefficient(j);
  const Index n = ode.dim();
  const SparseMatrix lower = transfer_matrix_recursive(ode, i - 1, j);
  return kron(lower, SparseMatrix::identity(n)) +
         kron(identity_power(n, static_cast<Index>(i - 1)), ode.coefficient(j));
}

CarlemanSystem assemble_truncated(const PolynomialODE& ode, int N) {
  if (N < 1) throw InvalidArgument("truncation level N must be >= 1");
  const Index n = ode.dim();
  const int k = ode.degree();

  CarlemanSystem sys;
  sys.level = N;
  sys.base_dim = n;
  sys.block_offsets.push_back(0);
  for (int i = 1; i <= N; ++i) {
    sys.block_dims.push_back(checked_pow(n, static_cast<Index>(i)));
    sys.block_offsets.push_back(sys.block_offsets.back() + sys.block_dims.back());
  }
  const Index nc = sys.dim();
  check_capacity(nc, "Carleman state");
  if (k >= 2 && N < k - 1) {
    sys.warnings.push_back("truncation level N = " + std::to_string(N) + " is below k - 1 = " +
                           std::to_string(k - 1) + "; some block rows keep no nonlinear terms");
  }

  TripletList list(nc, nc);
  for (int i = 1; i <= N; ++i) {
    for (int j = 0; j <= k; ++j) {
      const int target = i + j - 1;
      if (target < 1 || target > N) continue;  // forcing slot or beyond the closure
      if (ode.coefficient(j).empty()) continue;
      list.add_block(sys.block_offsets[static_cast<Index>(i - 1)], sys.block_offsets[static_cast<Index>(target - 1)],
                     transfer_matrix(ode, i, j));
    }
  }
  sys.generator = std::move(list).build();

  sys.forcing = DenseVector(nc);
  const DenseVector f0 = ode.forcing();
  for (Index r = 0; r < n; ++r) sys.forcing[r] = f0[r];

  sys.initial_state = DenseVector(nc);
  DenseVector power{1.0};
  for (int i = 1; i <= N; ++i) {
    power = kron_vec(ode.x0(), power);
    std::copy(power.begin(), power.end(),
              sys.initial_state.begin() + static_cast<std::ptrdiff_t>(sys.block_offsets[static_cast<Index>(i - 1)]));
  }
  return sys;
}

DenseVector carleman_rhs(const CarlemanSystem& sys, const DenseVector& z) {
  if (z.size() != sys.dim()) throw DimensionError("Carleman state dimension mismatch");
  DenseVector out = sys.generator * z;
  out += sys.forcing;
  return out;
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (const auto& t : a.entries()) out << t.row + 1 << ' ' << t.col + 1 << ' ' << t.value << '\n';
}

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty MatrixMarket stream", 0);
  ++lineno;
  if (line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0) {
    throw ParseError("unsupported MatrixMarket header", lineno);
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream size_line(line);
  Index rows = 0, cols = 0, nnz = 0;
  if (!(size_line >> rows >> cols >> nnz)) throw ParseError("bad MatrixMarket size line", lineno);
  TripletList list(rows, cols);
  for (Index e = 0; e < nnz; ++e) {
    if (!std::getline(in, line)) throw ParseError("MatrixMarket stream ended early", lineno);
    ++lineno;
    std::istringstream entry(line);
    Index r = 0, c = 0;
    double v = 0.0;
    if (!(entry >> r >> c >> v) || r == 0 || c == 0) throw ParseError("bad MatrixMarket entry", lineno);
    list.add(r - 1, c - 1, v);
  }
  return std::move(list).build();
}

}  // namespace carleman
