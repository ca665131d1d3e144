#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "kls/core/dense.hpp"
#include "kls/core/kernels.hpp"
#include "kls/eigen_match.hpp"
#include "kls/operator.hpp"
#include "kls/problems.hpp"
#include "kls/scheme.hpp"

// Stability metrics. None of these touch a ledger: measuring a run must not
// change its counts.

namespace kls {

struct StabilityReport {
  Scheme scheme{};
  Index step = 0;
  double kappa_input = 0.0;
  double loo = 0.0;
  double rre = 0.0;
  Index n_forward_converged = 0;
  Index invariant_dim = 0;
};

namespace detail {

/// Contribution of column j to ||I - Q'Q||_F^2: (1 - q_j'q_j)^2 plus twice
/// the squared off-diagonal products with earlier columns.
inline double loo_column_sq(ConstColBlock Q, Index j) {
  double s = 0.0;
  for (Index i = 0; i < j; ++i) {
    const double g = dot_raw(Q.ptr + i * Q.rows, Q.ptr + j * Q.rows, Q.rows);
    s += 2.0 * g * g;
  }
  const double d = 1.0 - dot_raw(Q.ptr + j * Q.rows, Q.ptr + j * Q.rows, Q.rows);
  return s + d * d;
}

}  // namespace detail

/// ||I - Q'Q||_F.
inline double loss_of_orthogonality(ConstColBlock Q) {
  double s = 0.0;
  for (Index j = 0; j < Q.cols; ++j) s += detail::loo_column_sq(Q, j);
  return std::sqrt(s);
}

/// LOO of a growing basis, updated in O(mj) per new column.
class IncrementalLoo {
 public:
  /// Accounts for every column of Q not seen yet.
  double update(ConstColBlock Q) {
    for (; seen_ < Q.cols; ++seen_) sum_ += detail::loo_column_sq(Q, seen_);
    return value();
  }
  double value() const { return std::sqrt(sum_); }

 private:
  Index seen_ = 0;
  double sum_ = 0.0;
};

/// ||A - QR||_F / ||A||_F.
inline double representation_error_qr(const DenseColMat& A, ConstColBlock Q, const UpperTri& R) {
  detail::require_dims(A.rows() == Q.rows && A.cols() == Q.cols && R.order() == A.cols(),
                       "representation_error_qr: shape mismatch");
  double s = 0.0;
  std::vector<double> col(A.rows());
  for (Index j = 0; j < A.cols(); ++j) {
    for (Index i = 0; i < A.rows(); ++i) col[i] = A(i, j);
    for (Index k = 0; k <= j; ++k) {
      const double r = R(k, j);
      const double* q = Q.ptr + k * Q.rows;
      for (Index i = 0; i < A.rows(); ++i) col[i] -= q[i] * r;
    }
    for (double v : col) s += v * v;
  }
  const double na = A.frobenius_norm();
  return na > 0.0 ? std::sqrt(s) / na : std::sqrt(s);
}

namespace detail {

/// ||A q_j - Q_{1:j+1..} h_j||^2 for Hessenberg column j (rows beyond the
/// basis width are treated as zero, which is exact after a happy breakdown).
inline double arnoldi_column_residual_sq(const LinearOperator& op, ConstColBlock Q, const DenseColMat& H, Index j) {
  Vector r(op.rows());
  op.apply(Q.col(j), r);
  const Index rows = std::min(H.rows(), Q.cols);
  for (Index i = 0; i < rows; ++i) {
    const double h = H(i, j);
    if (h == 0.0) continue;
    const double* q = Q.ptr + i * Q.rows;
    for (Index k = 0; k < r.size(); ++k) r[k] -= q[k] * h;
  }
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

}  // namespace detail

/// ||A Q_{1:n} - Q_{1:n+1} Hbar||_F / ||A||_F with Hbar (n+1) x n.
inline double representation_error_arnoldi(const LinearOperator& op, ConstColBlock Q, const DenseColMat& H,
                                           std::optional<double> norm_a = std::nullopt) {
  detail::require_dims(Q.rows == op.rows() && Q.cols >= H.cols() && H.rows() == H.cols() + 1,
                       "representation_error_arnoldi: shape mismatch");
  double s = 0.0;
  for (Index j = 0; j < H.cols(); ++j) s += detail::arnoldi_column_residual_sq(op, Q, H, j);
  const double na = norm_a ? *norm_a : operator_frobenius_norm(op);
  return std::sqrt(s) / na;
}

/// Arnoldi RRE accumulated column by column as columns of H complete.
class IncrementalRre {
 public:
  IncrementalRre(const LinearOperator& op, double norm_a) : op_(&op), norm_a_(norm_a) {}
  double update(ConstColBlock Q, const DenseColMat& H) {
    for (; seen_ < H.cols(); ++seen_) sum_ += detail::arnoldi_column_residual_sq(*op_, Q, H, seen_);
    return value();
  }
  double value() const { return std::sqrt(sum_) / norm_a_; }

 private:
  const LinearOperator* op_;
  double norm_a_;
  Index seen_ = 0;
  double sum_ = 0.0;
};

/// Number of computed Schur diagonal values matching a closed-form
/// eigenvalue within tol (greedy, multiplicity-aware).
struct ForwardCount {
  Index count = 0;
  bool over_multiplicity = false;
};

inline ForwardCount forward_error_count(const std::vector<std::complex<double>>& schur_diagonal,
                                        const ManteuffelSpec& spec, double tol) {
  const auto rep = match_eigenvalues(schur_diagonal, manteuffel_eigenvalues(spec), tol);
  return {rep.converged, rep.over_multiplicity};
}

}  // namespace kls
