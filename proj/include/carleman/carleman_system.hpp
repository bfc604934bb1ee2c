// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "carleman/polyode.hpp"
#include "carleman/tensor.hpp"

namespace carleman {

/// Truncated Carleman linearization dz/dt = A_N z + b over z = (x, x^[2], ..., x^[N]).
struct CarlemanSystem {
  int level = 0;        ///< truncation level N
  Index base_dim = 0;   ///< n
  std::vector<Index> block_dims;     ///< n^1 .. n^N
  std::vector<Index> block_offsets;  ///< start of block i (0-based), plus the total at the end
  SparseMatrix generator;  ///< A_N, block upper-Hessenberg
  DenseVector forcing;     ///< b = (F0, 0, ..., 0)
  DenseVector initial_state;  ///< (x0, x0^[2], ..., x0^[N])
  std::vector<std::string> warnings;

  Index dim() const noexcept { return block_offsets.empty() ? 0 : block_offsets.back(); }
  /// Block i (1-based) of z.
  DenseVector block(const DenseVector& z, int i) const;
};

/// A^i_{i+j-1} = sum_{p=1..i} I^[p-1] (x) F_j (x) I^[i-p], of dims n^i x n^{i+j-1}.
SparseMatrix transfer_matrix(const PolynomialODE& ode, int i, int j);

/// Same matrix via A^{i-1}_{i+j-2} (x) I + I^[i-1] (x) F_j; cross-check path.
SparseMatrix transfer_matrix_recursive(const PolynomialODE& ode, int i, int j);

/// Null-closure truncation at level N: block row i holds A^i_{i+j-1} at block
/// column i+j-1 for every j with i+j-1 <= N. The i=1, j=0 term is the forcing.
CarlemanSystem assemble_truncated(const PolynomialODE& ode, int N);

/// A_N z + b.
DenseVector carleman_rhs(const CarlemanSystem& sys, const DenseVector& z);

/// sum_{i=1..N} n^i.
Index carleman_dimension(Index n, int N);

// MatrixMarket coordinate real general, 1-based indices.
void write_matrix_market(const SparseMatrix& a, std::ostream& out);
SparseMatrix read_matrix_market(std::istream& in);

}  // namespace carleman
