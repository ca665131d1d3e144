#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "kls/core/error.hpp"

namespace kls {

using Index = std::size_t;

/// Dense vector of doubles. Thin value type over std::vector so that lengths
/// are part of the contract of every kernel that takes one.
class Vector {
 public:
  Vector() = default;
  explicit Vector(Index n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> init) : data_(init) {}
  explicit Vector(std::vector<double> data) : data_(std::move(data)) {}
  explicit Vector(std::span<const double> s) : data_(s.begin(), s.end()) {}

  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  double& operator[](Index i) noexcept { return data_[i]; }
  double operator[](Index i) const noexcept { return data_[i]; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  operator std::span<double>() noexcept { return data_; }
  operator std::span<const double>() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  void resize(Index n, double fill = 0.0) { data_.resize(n, fill); }
  void push_back(double v) { data_.push_back(v); }
  const std::vector<double>& std() const noexcept { return data_; }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

/// Read-only view of a contiguous range of columns of a column-major matrix.
struct ConstColBlock {
  const double* ptr = nullptr;
  Index rows = 0;
  Index cols = 0;

  std::span<const double> col(Index j) const { return {ptr + j * rows, rows}; }
  double operator()(Index i, Index j) const { return ptr[j * rows + i]; }
};

/// Mutable view of a contiguous range of columns.
struct ColBlock {
  double* ptr = nullptr;
  Index rows = 0;
  Index cols = 0;

  std::span<double> col(Index j) const { return {ptr + j * rows, rows}; }
  double& operator()(Index i, Index j) const { return ptr[j * rows + i]; }
  operator ConstColBlock() const { return {ptr, rows, cols}; }
};

inline ConstColBlock as_block(std::span<const double> v) { return {v.data(), v.size(), 1}; }
inline ColBlock as_block(std::span<double> v) { return {v.data(), v.size(), 1}; }

/// Column-major dense matrix. Columns can be appended in O(rows) amortized,
/// which is how bases grow in left-looking factorizations.
class DenseColMat {
 public:
  DenseColMat() = default;
  DenseColMat(Index rows, Index cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseColMat identity(Index n) {
    DenseColMat I(n, n);
    for (Index i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  /// Builds from row-major nested initializer lists (convenient in tests).
  static DenseColMat from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const Index m = rows.size();
    const Index n = m ? rows.begin()->size() : 0;
    DenseColMat A(m, n);
    Index i = 0;
    for (const auto& r : rows) {
      detail::require_dims(r.size() == n, "from_rows: ragged rows");
      Index j = 0;
      for (double v : r) A(i, j++) = v;
      ++i;
    }
    return A;
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  double& operator()(Index i, Index j) noexcept {
    assert(i < rows_ && j < cols_);
    return data_[j * rows_ + i];
  }
  double operator()(Index i, Index j) const noexcept {
    assert(i < rows_ && j < cols_);
    return data_[j * rows_ + i];
  }

  std::span<double> col(Index j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(Index j) const { return {data_.data() + j * rows_, rows_}; }

  ColBlock block(Index first, Index count) {
    assert(first + count <= cols_);
    return {data_.data() + first * rows_, rows_, count};
  }
  ConstColBlock block(Index first, Index count) const {
    assert(first + count <= cols_);
    return {data_.data() + first * rows_, rows_, count};
  }
  ColBlock view() { return block(0, cols_); }
  ConstColBlock view() const { return block(0, cols_); }
  operator ConstColBlock() const { return view(); }

  void append_col(std::span<const double> c) {
    detail::require_dims(c.size() == rows_ || (cols_ == 0 && rows_ == 0), "append_col: length mismatch");
    if (cols_ == 0 && rows_ == 0) rows_ = c.size();
    data_.insert(data_.end(), c.begin(), c.end());
    ++cols_;
  }
  void resize_cols(Index cols) {
    data_.resize(rows_ * cols, 0.0);
    cols_ = cols;
  }
  void reserve_cols(Index cols) { data_.reserve(rows_ * cols); }

  /// Copy of the leading r x c corner.
  DenseColMat leading(Index r, Index c) const {
    assert(r <= rows_ && c <= cols_);
    DenseColMat out(r, c);
    for (Index j = 0; j < c; ++j)
      std::copy_n(data_.data() + j * rows_, r, out.data() + j * r);
    return out;
  }

  DenseColMat transpose() const {
    DenseColMat T(cols_, rows_);
    for (Index j = 0; j < cols_; ++j)
      for (Index i = 0; i < rows_; ++i) T(j, i) = (*this)(i, j);
    return T;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const DenseColMat&, const DenseColMat&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

/// Upper triangular factor stored packed by columns; column j holds rows 0..j.
/// Strictly-lower entries are not stored and read as zero.
class UpperTri {
 public:
  UpperTri() = default;
  explicit UpperTri(Index n) : n_(n), data_(n * (n + 1) / 2, 0.0) {}

  Index order() const noexcept { return n_; }

  double operator()(Index i, Index j) const noexcept {
    return i <= j ? data_[j * (j + 1) / 2 + i] : 0.0;
  }
  double& at(Index i, Index j) {
    detail::require_dims(i <= j && j < n_, "UpperTri::at: entry below diagonal");
    return data_[j * (j + 1) / 2 + i];
  }
  std::span<const double> col(Index j) const { return {data_.data() + j * (j + 1) / 2, j + 1}; }

  /// Appends column n (length n+1), growing the order by one.
  void append_col(std::span<const double> c) {
    detail::require_dims(c.size() == n_ + 1, "UpperTri::append_col: length must be order+1");
    data_.insert(data_.end(), c.begin(), c.end());
    ++n_;
  }

  DenseColMat dense() const {
    DenseColMat D(n_, n_);
    for (Index j = 0; j < n_; ++j)
      for (Index i = 0; i <= j; ++i) D(i, j) = (*this)(i, j);
    return D;
  }

 private:
  Index n_ = 0;
  std::vector<double> data_;
};

/// C = A * B, plain triple loop (no ledger; used for small dense work and checks).
inline DenseColMat matmul(ConstColBlock A, ConstColBlock B) {
  detail::require_dims(A.cols == B.rows, "matmul: inner dimension mismatch");
  DenseColMat C(A.rows, B.cols);
  for (Index j = 0; j < B.cols; ++j)
    for (Index k = 0; k < A.cols; ++k) {
      const double b = B(k, j);
      if (b == 0.0) continue;
      for (Index i = 0; i < A.rows; ++i) C(i, j) += A(i, k) * b;
    }
  return C;
}

/// C = A' * B without ledger accounting.
inline DenseColMat matmul_tn(ConstColBlock A, ConstColBlock B) {
  detail::require_dims(A.rows == B.rows, "matmul_tn: row mismatch");
  DenseColMat C(A.cols, B.cols);
  for (Index j = 0; j < B.cols; ++j)
    for (Index i = 0; i < A.cols; ++i) {
      double s = 0.0;
      const double* a = A.ptr + i * A.rows;
      const double* b = B.ptr + j * B.rows;
      for (Index k = 0; k < A.rows; ++k) s += a[k] * b[k];
      C(i, j) = s;
    }
  return C;
}

inline DenseColMat operator-(const DenseColMat& A, const DenseColMat& B) {
  detail::require_dims(A.rows() == B.rows() && A.cols() == B.cols(), "operator-: shape mismatch");
  DenseColMat C = A;
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i) C(i, j) -= B(i, j);
  return C;
}

}  // namespace kls
