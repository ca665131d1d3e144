#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <tuple>
#include <vector>

#include "kls/core/dense.hpp"
#include "kls/core/error.hpp"
#include "kls/operator.hpp"

namespace kls {

/// LU with partial pivoting of a square banded matrix (kl sub-, ku
/// superdiagonals), LAPACK gbtrf layout: fill-in widens U to kl+ku.
class BandLU {
 public:
  explicit BandLU(const CsrMatrix& A) : n_(A.rows()) {
    detail::require_dims(A.rows() == A.cols(), "BandLU: matrix must be square");
    std::tie(kl_, ku_) = A.bandwidth();
    kv_ = kl_ + ku_;
    ld_ = 2 * kl_ + ku_ + 1;
    ab_.assign(ld_ * n_, 0.0);
    for (Index i = 0; i < n_; ++i)
      for (Index p = A.offsets()[i]; p < A.offsets()[i + 1]; ++p) at(i, A.indices()[p]) = A.values()[p];
    factor();
  }

  Index order() const noexcept { return n_; }

  /// x = A^{-1} b in place.
  void solve(std::span<double> b) const {
    for (Index j = 0; j < n_; ++j) {
      const Index km = std::min(kl_, n_ - 1 - j);
      if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
      for (Index r = j + 1; r <= j + km; ++r) b[r] -= at(r, j) * b[j];
    }
    for (Index j = n_; j-- > 0;) {
      b[j] /= at(j, j);
      const Index lo = j > kv_ ? j - kv_ : 0;
      for (Index r = lo; r < j; ++r) b[r] -= at(r, j) * b[j];
    }
  }

  /// x = A^{-T} b in place.
  void solve_transpose(std::span<double> b) const {
    for (Index j = 0; j < n_; ++j) {
      double s = b[j];
      const Index lo = j > kv_ ? j - kv_ : 0;
      for (Index r = lo; r < j; ++r) s -= at(r, j) * b[r];
      b[j] = s / at(j, j);
    }
    for (Index j = n_ - 1; j-- > 0;) {
      const Index km = std::min(kl_, n_ - 1 - j);
      double s = b[j];
      for (Index r = j + 1; r <= j + km; ++r) s -= at(r, j) * b[r];
      b[j] = s;
      if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
    }
  }

 private:
  double& at(Index i, Index j) { return ab_[j * ld_ + (kv_ + i - j)]; }
  double at(Index i, Index j) const { return ab_[j * ld_ + (kv_ + i - j)]; }

  void factor() {
    piv_.assign(n_, 0);
    Index ju = 0;
    for (Index j = 0; j < n_; ++j) {
      const Index km = std::min(kl_, n_ - 1 - j);
      Index p = j;
      double best = std::abs(at(j, j));
      for (Index r = j + 1; r <= j + km; ++r)
        if (std::abs(at(r, j)) > best) {
          best = std::abs(at(r, j));
          p = r;
        }
      piv_[j] = p;
      if (best == 0.0) throw BreakdownError("BandLU: matrix is singular");
      ju = std::max(ju, std::min(p + ku_, n_ - 1));
      if (p != j)
        for (Index c = j; c <= ju; ++c) std::swap(at(p, c), at(j, c));
      const double d = at(j, j);
      for (Index r = j + 1; r <= j + km; ++r) at(r, j) /= d;
      for (Index c = j + 1; c <= ju; ++c) {
        const double u = at(j, c);
        if (u == 0.0) continue;
        for (Index r = j + 1; r <= j + km; ++r) at(r, c) -= at(r, j) * u;
      }
    }
  }

  Index n_ = 0, kl_ = 0, ku_ = 0, kv_ = 0, ld_ = 0;
  std::vector<double> ab_;
  std::vector<Index> piv_;
};

}  // namespace kls
