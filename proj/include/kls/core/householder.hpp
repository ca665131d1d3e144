#pragma once

#include <cmath>
#include <vector>

#include "kls/core/dense.hpp"
#include "kls/core/ledger.hpp"

namespace kls {

/// Householder QR with the orthogonal factor kept implicit as reflectors
/// H_j = I - tau_j v_j v_j' (v_j(j) = 1, zero above j). R is returned with a
/// non-negative diagonal; the sign flips are folded into q().
class HouseholderQR {
 public:
  HouseholderQR() = default;

  Index rows() const noexcept { return v_.rows(); }
  Index cols() const noexcept { return v_.cols(); }
  const UpperTri& r() const noexcept { return r_; }

  /// First k columns of Q (k <= rows), signs matched to r().
  DenseColMat q(Index k) const {
    const Index m = rows(), n = cols();
    detail::require_dims(k <= m, "HouseholderQR::q: too many columns");
    DenseColMat Q(m, k);
    for (Index j = 0; j < k; ++j) Q(j, j) = 1.0;
    for (Index jj = n; jj-- > 0;) apply_reflector(jj, Q.view());
    for (Index j = 0; j < std::min(k, n); ++j)
      if (sign_[j] < 0)
        for (Index i = 0; i < m; ++i) Q(i, j) = -Q(i, j);
    return Q;
  }
  DenseColMat q() const { return q(cols()); }

  /// y <- Q' y (full m x m Q, without the sign fix).
  void apply_qt(std::span<double> y) const {
    for (Index j = 0; j < cols(); ++j) apply_reflector(j, as_block(y));
  }

  friend HouseholderQR householder_qr(const DenseColMat& A, SyncLedger* ledger);

 private:
  void apply_reflector(Index j, ColBlock X) const {
    if (tau_[j] == 0.0) return;
    const Index m = rows();
    for (Index c = 0; c < X.cols; ++c) {
      double* x = X.ptr + c * X.rows;
      double s = x[j];
      for (Index i = j + 1; i < m; ++i) s += v_(i, j) * x[i];
      s *= tau_[j];
      x[j] -= s;
      for (Index i = j + 1; i < m; ++i) x[i] -= s * v_(i, j);
    }
  }

  DenseColMat v_;
  std::vector<double> tau_;
  std::vector<int> sign_;
  UpperTri r_;
};

/// Level-2 Householder QR of an m x n matrix, m >= n. Rank deficiency gives a
/// zero diagonal in R rather than an error.
inline HouseholderQR householder_qr(const DenseColMat& A, SyncLedger* ledger = nullptr) {
  const Index m = A.rows(), n = A.cols();
  detail::require_dims(m >= n, "householder_qr: requires rows >= cols");
  HouseholderQR f;
  f.v_ = A;
  f.tau_.assign(n, 0.0);
  f.sign_.assign(n, 1);
  DenseColMat& W = f.v_;
  std::vector<double> diag(n, 0.0);
  std::vector<double> w(n);

  for (Index j = 0; j < n; ++j) {
    double ss = 0.0;
    for (Index i = j; i < m; ++i) ss += W(i, j) * W(i, j);
    if (ledger) ledger->record(KernelClass::MvDot, m - j, 1, 1);
    const double normx = std::sqrt(ss);
    const double alpha = W(j, j);
    if (normx == 0.0) {
      f.tau_[j] = 0.0;
      diag[j] = 0.0;
      for (Index i = j + 1; i < m; ++i) W(i, j) = 0.0;
      continue;
    }
    const double beta = alpha >= 0.0 ? -normx : normx;
    const double v0 = alpha - beta;
    for (Index i = j + 1; i < m; ++i) W(i, j) /= v0;
    f.tau_[j] = (beta - alpha) / beta;
    diag[j] = beta;
    W(j, j) = beta;

    const Index trailing = n - j - 1;
    if (trailing == 0) continue;
    if (ledger) {
      ledger->record(KernelClass::MvTransMv, m - j, 1, trailing);
      ledger->record(KernelClass::MvTimesMatAddMv, m - j, 1, trailing);
    }
    for (Index c = j + 1; c < n; ++c) {
      double s = W(j, c);
      for (Index i = j + 1; i < m; ++i) s += W(i, j) * W(i, c);
      w[c] = s * f.tau_[j];
    }
    for (Index c = j + 1; c < n; ++c) {
      W(j, c) -= w[c];
      for (Index i = j + 1; i < m; ++i) W(i, c) -= w[c] * W(i, j);
    }
  }

  f.r_ = UpperTri(0);
  std::vector<double> col;
  for (Index j = 0; j < n; ++j) {
    f.sign_[j] = diag[j] < 0.0 ? -1 : 1;
    col.assign(j + 1, 0.0);
    for (Index i = 0; i < j; ++i) col[i] = W(i, j);
    col[j] = diag[j];
    f.r_.append_col(col);
  }
  // Row j of R changes sign with column j of Q.
  UpperTri R(0);
  for (Index j = 0; j < n; ++j) {
    col.assign(j + 1, 0.0);
    for (Index i = 0; i <= j; ++i) col[i] = f.sign_[i] * f.r_(i, j);
    R.append_col(col);
  }
  f.r_ = std::move(R);
  return f;
}

}  // namespace kls
