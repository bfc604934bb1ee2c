// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace carleman {

using Index = std::size_t;

// ---------------------------------------------------------------------------
// Capacity guard
// ---------------------------------------------------------------------------

/// Default ceiling on stored elements (vector length or matrix nonzeros).
inline constexpr Index kDefaultMaxEntries = 50'000'000;

/// Current ceiling. Initialized from CARLEMAN_MAX_ENTRIES when set.
Index max_entries();
void set_max_entries(Index limit);

/// a*b, throwing CapacityError on overflow of the index type.
Index checked_mul(Index a, Index b);
/// base^exp with the same overflow check.
Index checked_pow(Index base, Index exp);
/// Throws CapacityError when count exceeds max_entries().
void check_capacity(Index count, const char* what);

// ---------------------------------------------------------------------------
// DenseVector
// ---------------------------------------------------------------------------

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(Index dim, double fill = 0.0);
  explicit DenseVector(std::vector<double> values);
  DenseVector(std::initializer_list<double> values);

  Index size() const noexcept { return values_.size(); }
  double& operator[](Index i) { return values_[i]; }
  double operator[](Index i) const { return values_[i]; }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool all_finite() const noexcept;
  double norm() const noexcept;
  double squared_norm() const noexcept;

  /// Copy of entries [offset, offset + count).
  DenseVector segment(Index offset, Index count) const;

  DenseVector& operator+=(const DenseVector& other);
  DenseVector& operator-=(const DenseVector& other);
  DenseVector& operator*=(double s);

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> values_;
};

DenseVector operator+(DenseVector a, const DenseVector& b);
DenseVector operator-(DenseVector a, const DenseVector& b);
DenseVector operator*(double s, DenseVector a);

/// ||a - b||_2.
double distance(const DenseVector& a, const DenseVector& b);
double dot(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// SparseMatrix
// ---------------------------------------------------------------------------

struct Triplet {
  Index row;
  Index col;
  double value;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Immutable real sparse matrix in canonical compressed-row form: column
/// indices sorted within each row, no duplicates, no stored zeros.
class SparseMatrix {
 public:
  /// rows x cols zero matrix.
  SparseMatrix(Index rows = 0, Index cols = 0);

  /// Sums duplicate coordinates and drops exact zeros. Throws
  /// DimensionError on out-of-range indices and InvalidArgument on
  /// non-finite values.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> entries);
  static SparseMatrix identity(Index n);
  static SparseMatrix diagonal(std::span<const double> values);
  /// n x 1 column holding v.
  static SparseMatrix column(const DenseVector& v);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<const Index> row_offsets() const noexcept { return row_ptr_; }
  std::span<const Index> col_indices() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Triplets in row-major order.
  std::vector<Triplet> entries() const;
  /// Stored value at (r, c), zero if absent.
  double at(Index r, Index c) const;

  /// Max nonzeros in any row.
  Index row_sparsity() const;
  /// Max nonzeros in any column.
  Index col_sparsity() const;
  /// max(row_sparsity, col_sparsity), the s-sparsity of the analysis.
  Index sparsity() const { return std::max(row_sparsity(), col_sparsity()); }

  bool is_diagonal() const;
  bool is_lower_triangular() const;
  bool is_symmetric(double tol = 0.0) const;

  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y) const;
  DenseVector operator*(const DenseVector& x) const;
  /// y = A^T x.
  void transpose_multiply(std::span<const double> x, std::span<double> y) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double s) const;

  friend SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b);
  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  friend SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);
  friend class TripletList;

  SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
               std::vector<double> values);

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// Accumulates coordinate entries and block placements before compression.
class TripletList {
 public:
  TripletList(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  void add(Index r, Index c, double v);
  /// Adds scale * block with its (0,0) entry at (row_offset, col_offset).
  void add_block(Index row_offset, Index col_offset, const SparseMatrix& block, double scale = 1.0);
  void reserve(Index n) { entries_.reserve(n); }
  Index size() const noexcept { return entries_.size(); }

  SparseMatrix build() &&;

 private:
  Index rows_;
  Index cols_;
  std::vector<Triplet> entries_;
};

// ---------------------------------------------------------------------------
// Kronecker algebra
// ---------------------------------------------------------------------------

/// Row-major Kronecker product: entry (ia*rb + ib, ja*cb + jb) = a(ia,ja) * b(ib,jb).
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);
/// (x1 y1, x1 y2, ..., xn ym).
DenseVector kron_vec(const DenseVector& x, const DenseVector& y);
/// x^[i]; x^[0] is the length-1 vector (1).
DenseVector kron_power_vec(const DenseVector& x, Index i);
/// I_n^[i] = I_{n^i}.
SparseMatrix identity_power(Index n, Index i);

// ---------------------------------------------------------------------------
// Spectral norm
// ---------------------------------------------------------------------------

struct PowerIterationOptions {
  double tol = 1e-10;
  Index max_iterations = 10'000;
  std::uint64_t seed = 0x5eed'ca71'e3a0'0001ULL;
};

/// Linear map y = op(x) on R^dim.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Largest eigenvalue of a symmetric positive semidefinite operator by power
/// iteration from a seeded start vector. Stops when an Aitken-style tail
/// estimate of the remaining change falls below tol relative to the estimate.
double dominant_psd_eigenvalue(const LinearOperator& op, Index dim,
                               const PowerIterationOptions& opts = {});

/// Gram matrices up to this size are solved densely in spectral_norm.
inline constexpr Index kDenseGramLimit = 256;

/// sigma_max(A). Exact for diagonal matrices and for min(rows, cols) <=
/// kDenseGramLimit (dense eigensolve of the smaller Gram matrix); power
/// iteration on A^T A otherwise.
double spectral_norm(const SparseMatrix& a, const PowerIterationOptions& opts = {});

}  // namespace carleman
