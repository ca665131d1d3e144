#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "kls/core/dense.hpp"
#include "kls/core/error.hpp"
#include "kls/core/ledger.hpp"
#include "kls/core/random.hpp"

namespace kls {

/// Abstract matrix-vector action y = A x.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  /// y = A' x.
  virtual void apply_transpose(std::span<const double> x, std::span<double> y) const = 0;
  /// Exact ||A||_F when the operator knows it cheaply.
  virtual std::optional<double> exact_frobenius_norm() const { return std::nullopt; }

  Vector operator*(std::span<const double> x) const {
    Vector y(rows());
    apply(x, y);
    return y;
  }
};

/// Applies op and counts it in the ledger.
inline void apply_op(const LinearOperator& op, std::span<const double> x, std::span<double> y,
                     SyncLedger* ledger = nullptr) {
  detail::require_dims(x.size() == op.cols() && y.size() == op.rows(), "apply_op: shape mismatch");
  op.apply(x, y);
  if (ledger) ledger->record_operator();
}

/// Compressed sparse row matrix. Column indices are sorted and unique within
/// each row.
class CsrMatrix final : public LinearOperator {
 public:
  CsrMatrix() = default;
  CsrMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), offsets_(rows + 1, 0) {}

  /// Builds from (row, col, value) triplets; duplicates are summed and
  /// explicit zeros are kept.
  static CsrMatrix from_triplets(Index rows, Index cols, std::vector<std::tuple<Index, Index, double>> t) {
    for (const auto& [i, j, v] : t) detail::require_dims(i < rows && j < cols, "from_triplets: index out of range");
    std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    CsrMatrix A(rows, cols);
    for (Index k = 0; k < t.size();) {
      auto [i, j, v] = t[k];
      double sum = v;
      Index k2 = k + 1;
      while (k2 < t.size() && std::get<0>(t[k2]) == i && std::get<1>(t[k2]) == j) sum += std::get<2>(t[k2++]);
      A.indices_.push_back(j);
      A.values_.push_back(sum);
      ++A.offsets_[i + 1];
      k = k2;
    }
    std::partial_sum(A.offsets_.begin(), A.offsets_.end(), A.offsets_.begin());
    return A;
  }

  static CsrMatrix from_dense(const DenseColMat& D) {
    std::vector<std::tuple<Index, Index, double>> t;
    for (Index j = 0; j < D.cols(); ++j)
      for (Index i = 0; i < D.rows(); ++i)
        if (D(i, j) != 0.0) t.emplace_back(i, j, D(i, j));
    return from_triplets(D.rows(), D.cols(), std::move(t));
  }

  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  Index nnz() const noexcept { return values_.size(); }
  const std::vector<Index>& offsets() const noexcept { return offsets_; }
  const std::vector<Index>& indices() const noexcept { return indices_; }
  const std::vector<double>& values() const noexcept { return values_; }

  void apply(std::span<const double> x, std::span<double> y) const override {
    for (Index i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * x[indices_[k]];
      y[i] = s;
    }
  }

  void apply_transpose(std::span<const double> x, std::span<double> y) const override {
    std::fill(y.begin(), y.end(), 0.0);
    for (Index i = 0; i < rows_; ++i)
      for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) y[indices_[k]] += values_[k] * x[i];
  }

  std::optional<double> exact_frobenius_norm() const override {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
  }

  /// Entry (i, j), zero when not stored.
  double at(Index i, Index j) const {
    auto b = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    auto e = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    auto it = std::lower_bound(b, e, j);
    return (it != e && *it == j) ? values_[static_cast<Index>(it - indices_.begin())] : 0.0;
  }

  CsrMatrix transpose() const {
    std::vector<std::tuple<Index, Index, double>> t;
    t.reserve(nnz());
    for (Index i = 0; i < rows_; ++i)
      for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) t.emplace_back(indices_[k], i, values_[k]);
    return from_triplets(cols_, rows_, std::move(t));
  }

  DenseColMat to_dense() const {
    DenseColMat D(rows_, cols_);
    for (Index i = 0; i < rows_; ++i)
      for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) D(i, indices_[k]) = values_[k];
    return D;
  }

  /// Half-bandwidths (lower, upper).
  std::pair<Index, Index> bandwidth() const {
    Index kl = 0, ku = 0;
    for (Index i = 0; i < rows_; ++i)
      for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) {
        const Index j = indices_[k];
        if (j < i) kl = std::max(kl, i - j);
        else ku = std::max(ku, j - i);
      }
    return {kl, ku};
  }

  friend bool operator==(const CsrMatrix& a, const CsrMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.offsets_ == b.offsets_ && a.indices_ == b.indices_ &&
           a.values_ == b.values_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<Index> indices_;
  std::vector<double> values_;
};

/// Dense matrix as an operator.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(DenseColMat a) : a_(std::move(a)) {}

  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  const DenseColMat& matrix() const noexcept { return a_; }

  void apply(std::span<const double> x, std::span<double> y) const override {
    std::fill(y.begin(), y.end(), 0.0);
    for (Index j = 0; j < a_.cols(); ++j) {
      const double xj = x[j];
      if (xj == 0.0) continue;
      for (Index i = 0; i < a_.rows(); ++i) y[i] += a_(i, j) * xj;
    }
  }
  void apply_transpose(std::span<const double> x, std::span<double> y) const override {
    for (Index j = 0; j < a_.cols(); ++j) {
      double s = 0.0;
      for (Index i = 0; i < a_.rows(); ++i) s += a_(i, j) * x[i];
      y[j] = s;
    }
  }
  std::optional<double> exact_frobenius_norm() const override { return a_.frobenius_norm(); }

 private:
  DenseColMat a_;
};

/// ||A||_F: exact when the operator provides it, otherwise estimated once by
/// probing `samples` random unit columns: ||A||_F^2 ~ (n/s) sum ||A e_j||^2.
inline double operator_frobenius_norm(const LinearOperator& op, Index samples = 64, std::uint64_t seed = 7) {
  if (auto f = op.exact_frobenius_norm()) return *f;
  const Index n = op.cols();
  std::vector<Index> cols(n);
  std::iota(cols.begin(), cols.end(), Index{0});
  if (samples < n) {
    Rng rng(seed);
    for (Index i = 0; i < samples; ++i) {
      const Index j = i + static_cast<Index>(rng.bits() % (n - i));
      std::swap(cols[i], cols[j]);
    }
    cols.resize(samples);
  }
  Vector e(n), y(op.rows());
  double s = 0.0;
  for (Index j : cols) {
    e[j] = 1.0;
    op.apply(e, y);
    e[j] = 0.0;
    for (double v : y) s += v * v;
  }
  return std::sqrt(s * static_cast<double>(n) / static_cast<double>(cols.size()));
}

/// Dense copy of an operator, column by column.
inline DenseColMat assemble_dense(const LinearOperator& op) {
  DenseColMat D(op.rows(), op.cols());
  Vector e(op.cols());
  for (Index j = 0; j < op.cols(); ++j) {
    e[j] = 1.0;
    op.apply(e, D.col(j));
    e[j] = 0.0;
  }
  return D;
}

}  // namespace kls
