// SPDX-License-Identifier: Apache-2.0
#include "carleman/tensor.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "carleman/errors.hpp"

namespace carleman {

namespace {

Index initial_max_entries() {
  if (const char* env = std::getenv("CARLEMAN_MAX_ENTRIES")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<Index>(v);
  }
  return kDefaultMaxEntries;
}

std::atomic<Index>& max_entries_slot() {
  static std::atomic<Index> slot{initial_max_entries()};
  return slot;
}

void check_finite(double v) {
  if (!std::isfinite(v)) throw InvalidArgument("non-finite matrix entry");
}

}  // namespace

Index max_entries() { return max_entries_slot().load(std::memory_order_relaxed); }

void set_max_entries(Index limit) { max_entries_slot().store(limit, std::memory_order_relaxed); }

Index checked_mul(Index a, Index b) {
  if (a != 0 && b > std::numeric_limits<Index>::max() / a) {
    throw CapacityError("dimension overflow: " + std::to_string(a) + " * " + std::to_string(b) +
                        " exceeds the index range");
  }
  return a * b;
}

Index checked_pow(Index base, Index exp) {
  Index r = 1;
  for (Index e = 0; e < exp; ++e) r = checked_mul(r, base);
  return r;
}

void check_capacity(Index count, const char* what) {
  if (count > max_entries()) {
    throw CapacityError(std::string(what) + " needs " + std::to_string(count) +
                        " entries, above the ceiling of " + std::to_string(max_entries()) +
                        " (set CARLEMAN_MAX_ENTRIES to raise it)");
  }
}

// ---------------------------------------------------------------------------
// DenseVector
// ---------------------------------------------------------------------------

DenseVector::DenseVector(Index dim, double fill) {
  check_capacity(dim, "vector");
  values_.assign(dim, fill);
}

DenseVector::DenseVector(std::vector<double> values) : values_(std::move(values)) {}

DenseVector::DenseVector(std::initializer_list<double> values) : values_(values) {}

bool DenseVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double DenseVector::squared_norm() const noexcept { return dot(values_, values_); }

double DenseVector::norm() const noexcept {
  // Scaled accumulation keeps tiny/huge Kronecker powers from under/overflowing.
  double scale = 0.0;
  for (double v : values_) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double sum = 0.0;
  for (double v : values_) {
    const double t = v / scale;
    sum += t * t;
  }
  return scale * std::sqrt(sum);
}

DenseVector DenseVector::segment(Index offset, Index count) const {
  if (offset + count > values_.size()) throw DimensionError("segment out of range");
  return DenseVector(std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(offset),
                                         values_.begin() + static_cast<std::ptrdiff_t>(offset + count)));
}

DenseVector& DenseVector::operator+=(const DenseVector& other) {
  if (other.size() != size()) throw DimensionError("vector size mismatch in +=");
  for (Index i = 0; i < size(); ++i) values_[i] += other.values_[i];
  return *this;
}

DenseVector& DenseVector::operator-=(const DenseVector& other) {
  if (other.size() != size()) throw DimensionError("vector size mismatch in -=");
  for (Index i = 0; i < size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

DenseVector& DenseVector::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

DenseVector operator+(DenseVector a, const DenseVector& b) { return a += b; }
DenseVector operator-(DenseVector a, const DenseVector& b) { return a -= b; }
DenseVector operator*(double s, DenseVector a) { return a *= s; }

double distance(const DenseVector& a, const DenseVector& b) { return (a - b).norm(); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("vector size mismatch in dot");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// ---------------------------------------------------------------------------
// SparseMatrix
// ---------------------------------------------------------------------------

SparseMatrix::SparseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
                           std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> entries) {
  TripletList list(rows, cols);
  list.reserve(entries.size());
  for (const auto& t : entries) list.add(t.row, t.col, t.value);
  return std::move(list).build();
}

SparseMatrix SparseMatrix::identity(Index n) {
  check_capacity(n, "identity matrix");
  std::vector<Index> ptr(n + 1);
  std::iota(ptr.begin(), ptr.end(), Index{0});
  std::vector<Index> idx(n);
  std::iota(idx.begin(), idx.end(), Index{0});
  return SparseMatrix(n, n, std::move(ptr), std::move(idx), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> values) {
  TripletList list(values.size(), values.size());
  for (Index i = 0; i < values.size(); ++i) list.add(i, i, values[i]);
  return std::move(list).build();
}

SparseMatrix SparseMatrix::column(const DenseVector& v) {
  TripletList list(v.size(), 1);
  for (Index i = 0; i < v.size(); ++i) list.add(i, 0, v[i]);
  return std::move(list).build();
}

std::vector<Triplet> SparseMatrix::entries() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, col_idx_[k], values_[k]});
  }
  return out;
}

double SparseMatrix::at(Index r, Index c) const {
  if (r >= rows_ || c >= cols_) throw DimensionError("index out of range");
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values_[static_cast<Index>(it - col_idx_.begin())];
}

Index SparseMatrix::row_sparsity() const {
  Index best = 0;
  for (Index r = 0; r < rows_; ++r) best = std::max(best, row_ptr_[r + 1] - row_ptr_[r]);
  return best;
}

Index SparseMatrix::col_sparsity() const {
  std::vector<Index> counts(cols_, 0);
  for (Index c : col_idx_) ++counts[c];
  return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

bool SparseMatrix::is_diagonal() const {
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_idx_[k] != r) return false;
    }
  }
  return true;
}

bool SparseMatrix::is_lower_triangular() const {
  for (Index r = 0; r < rows_; ++r) {
    if (row_ptr_[r + 1] > row_ptr_[r] && col_idx_[row_ptr_[r + 1] - 1] > r) return false;
  }
  return true;
}

bool SparseMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (std::abs(values_[k] - at(col_idx_[k], r)) > tol) return false;
    }
  }
  return true;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_) throw DimensionError("matrix-vector size mismatch");
  for (Index r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[col_idx_[k]];
    y[r] = acc;
  }
}

DenseVector SparseMatrix::operator*(const DenseVector& x) const {
  DenseVector y(rows_);
  multiply(x.span(), y.span());
  return y;
}

void SparseMatrix::transpose_multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != rows_ || y.size() != cols_) throw DimensionError("matrix-vector size mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (Index r = 0; r < rows_; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_idx_[k]] += values_[k] * xr;
  }
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Index> ptr(cols_ + 1, 0);
  for (Index c : col_idx_) ++ptr[c + 1];
  std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
  std::vector<Index> idx(nnz());
  std::vector<double> val(nnz());
  std::vector<Index> next(ptr.begin(), ptr.end() - 1);
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const Index dst = next[col_idx_[k]]++;
      idx[dst] = r;
      val[dst] = values_[k];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix SparseMatrix::scaled(double s) const {
  if (!std::isfinite(s)) throw InvalidArgument("non-finite scale factor");
  if (s == 0.0) return SparseMatrix(rows_, cols_);
  std::vector<double> val(values_);
  for (double& v : val) v *= s;
  return SparseMatrix(rows_, cols_, row_ptr_, col_idx_, std::move(val));
}

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionError("matrix size mismatch in +");
  std::vector<Index> ptr(a.rows_ + 1, 0);
  std::vector<Index> idx;
  std::vector<double> val;
  idx.reserve(a.nnz() + b.nnz());
  val.reserve(a.nnz() + b.nnz());
  for (Index r = 0; r < a.rows_; ++r) {
    Index i = a.row_ptr_[r];
    Index j = b.row_ptr_[r];
    const Index ie = a.row_ptr_[r + 1];
    const Index je = b.row_ptr_[r + 1];
    while (i < ie || j < je) {
      Index c;
      double v;
      if (j == je || (i < ie && a.col_idx_[i] < b.col_idx_[j])) {
        c = a.col_idx_[i];
        v = a.values_[i++];
      } else if (i == ie || b.col_idx_[j] < a.col_idx_[i]) {
        c = b.col_idx_[j];
        v = b.values_[j++];
      } else {
        c = a.col_idx_[i];
        v = a.values_[i++] + b.values_[j++];
      }
      if (v != 0.0) {
        idx.push_back(c);
        val.push_back(v);
      }
    }
    ptr[r + 1] = idx.size();
  }
  check_capacity(idx.size(), "matrix sum");
  return SparseMatrix(a.rows_, a.cols_, std::move(ptr), std::move(idx), std::move(val));
}

// ---------------------------------------------------------------------------
// TripletList
// ---------------------------------------------------------------------------

void TripletList::add(Index r, Index c, double v) {
  if (r >= rows_ || c >= cols_) {
    throw DimensionError("entry (" + std::to_string(r) + ", " + std::to_string(c) + ") outside " +
                         std::to_string(rows_) + " x " + std::to_string(cols_));
  }
  check_finite(v);
  if (v == 0.0) return;
  entries_.push_back({r, c, v});
}

void TripletList::add_block(Index row_offset, Index col_offset, const SparseMatrix& block, double scale) {
  if (row_offset + block.rows() > rows_ || col_offset + block.cols() > cols_) {
    throw DimensionError("block placement exceeds target dimensions");
  }
  check_capacity(entries_.size() + block.nnz(), "block assembly");
  for (Index r = 0; r < block.rows(); ++r) {
    for (Index k = block.row_ptr_[r]; k < block.row_ptr_[r + 1]; ++k) {
      const double v = scale * block.values_[k];
      if (v != 0.0) entries_.push_back({row_offset + r, col_offset + block.col_idx_[k], v});
    }
  }
}

SparseMatrix TripletList::build() && {
  std::sort(entries_.begin(), entries_.end(),
            [](const Triplet& x, const Triplet& y) { return x.row != y.row ? x.row < y.row : x.col < y.col; });
  std::vector<Index> ptr(rows_ + 1, 0);
  std::vector<Index> idx;
  std::vector<double> val;
  idx.reserve(entries_.size());
  val.reserve(entries_.size());
  for (Index k = 0; k < entries_.size();) {
    const Index r = entries_[k].row;
    const Index c = entries_[k].col;
    double sum = 0.0;
    while (k < entries_.size() && entries_[k].row == r && entries_[k].col == c) sum += entries_[k++].value;
    if (sum != 0.0) {
      idx.push_back(c);
      val.push_back(sum);
      ++ptr[r + 1];
    }
  }
  std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
  entries_.clear();
  return SparseMatrix(rows_, cols_, std::move(ptr), std::move(idx), std::move(val));
}

// ---------------------------------------------------------------------------
// Kronecker algebra
// ---------------------------------------------------------------------------

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  const Index rows = checked_mul(a.rows(), b.rows());
  const Index cols = checked_mul(a.cols(), b.cols());
  const Index nnz = checked_mul(a.nnz(), b.nnz());
  check_capacity(nnz, "Kronecker product");
  check_capacity(rows, "Kronecker product rows");

  std::vector<Index> ptr(rows + 1, 0);
  std::vector<Index> idx(nnz);
  std::vector<double> val(nnz);
  Index pos = 0;
  // Row ia*rb + ib visits a's row ia column-major over b's row ib, so columns
  // ja*cb + jb come out sorted.
  for (Index ia = 0; ia < a.rows(); ++ia) {
    for (Index ib = 0; ib < b.rows(); ++ib) {
      for (Index ka = a.row_ptr_[ia]; ka < a.row_ptr_[ia + 1]; ++ka) {
        const Index base = a.col_idx_[ka] * b.cols();
        const double av = a.values_[ka];
        for (Index kb = b.row_ptr_[ib]; kb < b.row_ptr_[ib + 1]; ++kb) {
          idx[pos] = base + b.col_idx_[kb];
          val[pos] = av * b.values_[kb];
          ++pos;
        }
      }
      ptr[ia * b.rows() + ib + 1] = pos;
    }
  }
  return SparseMatrix(rows, cols, std::move(ptr), std::move(idx), std::move(val));
}

DenseVector kron_vec(const DenseVector& x, const DenseVector& y) {
  const Index dim = checked_mul(x.size(), y.size());
  DenseVector out(dim);
  Index pos = 0;
  for (double xi : x) {
    for (double yj : y) out[pos++] = xi * yj;
  }
  return out;
}

DenseVector kron_power_vec(const DenseVector& x, Index i) {
  check_capacity(checked_pow(x.size(), i), "Kronecker power");
  DenseVector out{1.0};
  for (Index p = 0; p < i; ++p) out = kron_vec(x, out);
  return out;
}

SparseMatrix identity_power(Index n, Index i) { return SparseMatrix::identity(checked_pow(n, i)); }

// ---------------------------------------------------------------------------
// Power iteration
// ---------------------------------------------------------------------------

double dominant_psd_eigenvalue(const LinearOperator& op, Index dim, const PowerIterationOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("power iteration tolerance must be positive");
  if (dim == 0) return 0.0;

  std::mt19937_64 rng(opts.seed);
  std::vector<double> v(dim);
  std::vector<double> w(dim);
  // Uniform on [-1, 1) from the raw 53 high bits; independent of the
  // standard library's distribution implementations.
  for (double& e : v) e = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;

  auto normalize = [](std::vector<double>& u) {
    double s = 0.0;
    for (double e : u) s += e * e;
    s = std::sqrt(s);
    if (s > 0.0) {
      for (double& e : u) e /= s;
    }
    return s;
  };
  normalize(v);

  constexpr double kRoundoff = 8.0 * std::numeric_limits<double>::epsilon();
  double mu = 0.0;
  double prev_delta = std::numeric_limits<double>::infinity();
  // A single quiet step can come from a start vector near a lower eigenvector;
  // demand two in a row.
  int quiet = 0;
  for (Index it = 0; it < opts.max_iterations; ++it) {
    op(v, w);
    const double next = dot(v, w);
    const double wn = normalize(w);
    if (wn == 0.0) return 0.0;
    if (!std::isfinite(wn)) throw NumericalError("power iteration produced a non-finite iterate");
    v.swap(w);

    const double delta = std::abs(next - mu);
    mu = next;
    if (it > 0) {
      const double rate = std::min(delta / prev_delta, 1.0);
      const bool settled =
          delta <= kRoundoff * mu || (rate < 1.0 && delta * rate / (1.0 - rate) <= opts.tol * mu);
      quiet = settled ? quiet + 1 : 0;
      if (quiet >= 2) return mu;
    }
    prev_delta = delta;
  }
  throw ConvergenceError("power iteration did not converge within " + std::to_string(opts.max_iterations) +
                             " iterations",
                         mu);
}

double spectral_norm(const SparseMatrix& a, const PowerIterationOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("spectral_norm tolerance must be positive");
  if (a.empty()) return 0.0;
  if (a.is_diagonal()) {
    double best = 0.0;
    for (double v : a.values()) best = std::max(best, std::abs(v));
    return best;
  }
  const Index side = std::min(a.rows(), a.cols());
  if (side <= kDenseGramLimit) {
    // Small Gram matrix: exact symmetric eigensolve on the narrow side.
    const auto d = static_cast<Eigen::Index>(side);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    const bool by_rows = a.rows() <= a.cols();
    const SparseMatrix t = a.transpose();
    const SparseMatrix& outer = by_rows ? t : a;  // rows of `outer` index the contracted side
    for (Index r = 0; r < outer.rows(); ++r) {
      const auto rp = outer.row_offsets();
      const auto ci = outer.col_indices();
      const auto v = outer.values();
      for (Index e = rp[r]; e < rp[r + 1]; ++e) {
        for (Index f = rp[r]; f < rp[r + 1]; ++f) {
          g(static_cast<Eigen::Index>(ci[e]), static_cast<Eigen::Index>(ci[f])) += v[e] * v[f];
        }
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("Gram eigensolve failed in spectral_norm");
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }

  std::vector<double> tmp(a.rows());
  const LinearOperator gram = [&a, &tmp](std::span<const double> x, std::span<double> y) {
    a.multiply(x, tmp);
    a.transpose_multiply(tmp, y);
  };
  // Relative error in sigma is half that of sigma^2.
  PowerIterationOptions inner = opts;
  inner.tol = 2.0 * opts.tol;
  try {
    return std::sqrt(dominant_psd_eigenvalue(gram, a.cols(), inner));
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(e.what(), std::sqrt(e.last_estimate()));
  }
}

}  // namespace carleman
