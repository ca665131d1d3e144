#pragma once

#include <cmath>
#include <span>

#include "kls/core/dense.hpp"
#include "kls/core/ledger.hpp"

// Multivector kernels. Each one reports its class to the run's ledger; all
// reductions sum sequentially in index order so results are reproducible
// bit for bit.

namespace kls {

namespace detail {
inline double dot_raw(const double* x, const double* y, Index n) {
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}
}  // namespace detail

/// x'y. One global reduction.
inline double dot(std::span<const double> x, std::span<const double> y, SyncLedger* ledger = nullptr) {
  detail::require_dims(x.size() == y.size(), "dot: length mismatch");
  if (ledger) ledger->record(KernelClass::MvDot, x.size(), 1, 1);
  return detail::dot_raw(x.data(), y.data(), x.size());
}

/// ||x||_2 through dot. One global reduction.
inline double norm2(std::span<const double> x, SyncLedger* ledger = nullptr) {
  return std::sqrt(dot(x, x, ledger));
}

/// B'X as a cols(B) x cols(X) block. Exactly one global reduction however
/// wide X is, including the degenerate empty-B case.
inline DenseColMat mv_trans_mv(ConstColBlock B, ConstColBlock X, SyncLedger* ledger = nullptr) {
  detail::require_dims(B.rows == X.rows, "mv_trans_mv: row mismatch");
  if (ledger) ledger->record(KernelClass::MvTransMv, B.rows, B.cols, X.cols);
  DenseColMat G(B.cols, X.cols);
  for (Index j = 0; j < X.cols; ++j)
    for (Index i = 0; i < B.cols; ++i) G(i, j) = detail::dot_raw(B.ptr + i * B.rows, X.ptr + j * X.rows, B.rows);
  return G;
}

/// Y <- scale*Y + sign*B*S. No reduction.
inline void mv_times_mat_add_mv(ColBlock Y, ConstColBlock B, ConstColBlock S, double sign, double scale,
                                SyncLedger* ledger = nullptr) {
  detail::require_dims(Y.rows == B.rows && S.rows == B.cols && S.cols == Y.cols,
                       "mv_times_mat_add_mv: shape mismatch");
  if (ledger) ledger->record(KernelClass::MvTimesMatAddMv, B.rows, B.cols, Y.cols);
  for (Index j = 0; j < Y.cols; ++j) {
    double* y = Y.ptr + j * Y.rows;
    if (scale != 1.0)
      for (Index i = 0; i < Y.rows; ++i) y[i] *= scale;
    for (Index k = 0; k < B.cols; ++k) {
      const double c = sign * S(k, j);
      if (c == 0.0) continue;
      const double* b = B.ptr + k * B.rows;
      for (Index i = 0; i < Y.rows; ++i) y[i] += c * b[i];
    }
  }
}

/// Vector form: y <- scale*y + sign*B*s.
inline void mv_times_mat_add_mv(std::span<double> y, ConstColBlock B, std::span<const double> s, double sign,
                                double scale, SyncLedger* ledger = nullptr) {
  mv_times_mat_add_mv(as_block(y), B, ConstColBlock{s.data(), s.size(), 1}, sign, scale, ledger);
}

/// Value-returning form matching the kernel's mathematical signature.
inline DenseColMat mv_times_mat_add_mv(const DenseColMat& Y, ConstColBlock B, ConstColBlock S, double sign,
                                       double scale, SyncLedger* ledger = nullptr) {
  DenseColMat out = Y;
  mv_times_mat_add_mv(out.view(), B, S, sign, scale, ledger);
  return out;
}

/// x <- a*x. Local, no reduction.
inline void scale_in_place(std::span<double> x, double a, SyncLedger* ledger = nullptr) {
  for (double& v : x) v *= a;
  if (ledger) ledger->add_flops(x.size());
}

}  // namespace kls
