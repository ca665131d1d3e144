#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "kls/core/dense.hpp"
#include "kls/core/error.hpp"
#include "kls/core/kernels.hpp"
#include "kls/core/ledger.hpp"
#include "kls/operator.hpp"
#include "kls/ortho_schemes.hpp"
#include "kls/scheme.hpp"

// Arnoldi expansion A Q_{1:n} = Q_{1:n+1} Hbar with any orthogonalization
// scheme.
//
// Calling convention, identical for every scheme: start(b), then n calls to
// step(), then finalize() gives n Hessenberg columns. The delayed schemes
// only normalize b in their first step() and complete column j-1 during
// step j; finalize() completes the last one.

namespace kls {

class Arnoldi {
 public:
  Arnoldi(const LinearOperator& op, Scheme scheme, SyncLedger* ledger = nullptr, OrthoOptions opt = {})
      : op_(&op), scheme_(scheme), ledger_(ledger), opt_(opt), m_(op.rows()), q_(op.rows(), 0) {
    detail::require_dims(op.rows() == op.cols(), "Arnoldi: operator must be square");
  }

  Scheme scheme() const noexcept { return scheme_; }
  Index rows() const noexcept { return m_; }

  /// Fresh expansion from b (need not be normalized).
  void start(std::span<const double> b) {
    detail::require_dims(b.size() == m_, "Arnoldi::start: length mismatch");
    reset();
    if (lagged()) {
      w_ = Vector(b);
      k_ = Vector();
      return;
    }
    if (scheme_ == Scheme::Householder) {
      hh_start(b);
      return;
    }
    const double nb = norm2(b, ledger_);
    if (!(nb > 0.0)) throw BreakdownError("Arnoldi::start: zero starting vector");
    start_norm_ = nb;
    Vector q(b);
    for (double& v : q) v /= nb;
    q_.append_col(q);
  }

  /// Continues from A Q_{1:p} = Q_{1:p+1} Hbar where Hbar is (p+1) x p but
  /// need not be Hessenberg (a Krylov-Schur decomposition). Q must have
  /// orthonormal columns.
  void restart_from(const DenseColMat& Q, const DenseColMat& Hbar) {
    detail::require_dims(Q.rows() == m_ && Q.cols() >= 1 && Hbar.rows() == Q.cols() && Hbar.cols() + 1 == Q.cols(),
                         "Arnoldi::restart_from: shapes must be m x (p+1) and (p+1) x p");
    reset();
    q_ = Q;
    for (Index j = 0; j < Hbar.cols(); ++j) hcols_.emplace_back(Hbar.col(j));
    if (lagged()) need_bootstrap_ = true;
    if (scheme_ == Scheme::Householder) hh_rebuild();
  }

  /// One expansion step. Returns false once a happy breakdown has been found
  /// (an invariant subspace: the expansion cannot continue).
  bool step() {
    if (breakdown_) return false;
    detail::require_dims(started(), "Arnoldi::step: call start() first");
    if (lagged()) return lagged_step();
    if (scheme_ == Scheme::Householder) return hh_step();

    const Index p = q_.cols();
    Vector v(m_);
    apply_op(*op_, q_.col(p - 1), v, ledger_);
    auto pr = detail::project(scheme_, q_.view(), std::move(v), ledger_);
    const double hn2 = detail::sum_sq(pr.h);
    if (pr.pythagorean_failed) {
      if (detail::negligible(std::sqrt(std::max(pr.beta, 0.0)), hn2, m_)) return mark_breakdown(pr.h);
      throw PythagoreanBreakdown("Arnoldi (cgs2-lagged): beta - C'C <= 0");
    }
    if (p >= m_ || detail::negligible(pr.alpha, hn2, m_)) return mark_breakdown(pr.h);
    append(pr.h, pr.alpha, pr.u);
    return true;
  }

  /// Completes the pending column of a delayed scheme (CGS2 pass for
  /// dcgs2/dcgs2-hrt, a norm for icwy-mgs). No-op for the other schemes.
  void finalize() {
    if (!lagged() || breakdown_ || need_bootstrap_ || !w_) return;
    Vector& w = *w_;
    const Index p = q_.cols();
    if (p == 0) {
      // Only b has been stashed: normalize it.
      const double nb = norm2(w, ledger_);
      if (!(nb > 0.0)) throw BreakdownError("Arnoldi::finalize: zero starting vector");
      start_norm_ = nb;
      for (double& v : w) v /= nb;
      q_.append_col(w);
      w_.reset();
      return;
    }
    Vector coeffs(p);
    double alpha;
    if (scheme_ == Scheme::IcwyMgs) {
      DenseColMat b = mv_trans_mv(as_block(w.span()), as_block(w.span()), ledger_);
      alpha = std::sqrt(std::max(b(0, 0), 0.0));
      for (Index i = 0; i < p; ++i) coeffs[i] = k_[i];
    } else {
      DenseColMat C = mv_trans_mv(q_.view(), as_block(w.span()), ledger_);
      mv_times_mat_add_mv(w.span(), q_.view(), C.col(0), -1.0, 1.0, ledger_);
      for (Index i = 0; i < p; ++i) coeffs[i] = k_[i] + C(i, 0);
      alpha = norm2(w, ledger_);
    }
    if (p >= m_ || detail::negligible(alpha, detail::sum_sq(coeffs), m_)) {
      mark_breakdown(coeffs);
    } else {
      append(coeffs, alpha, w);
    }
    w_.reset();
  }

  /// Completed Hessenberg columns.
  Index steps() const noexcept { return hcols_.size(); }
  bool happy_breakdown() const noexcept { return breakdown_; }
  /// Unfinished work is pending (delayed schemes mid-stream).
  bool has_pending() const noexcept { return w_.has_value() || need_bootstrap_; }
  /// ||b|| of the starting vector (known after the first step for the
  /// delayed schemes).
  double start_norm() const noexcept { return start_norm_; }

  /// Finished orthonormal columns: steps()+1, or steps() after a breakdown.
  const DenseColMat& q() const noexcept { return q_; }

  /// (steps()+1) x steps() extended Hessenberg matrix (last row zero after a
  /// happy breakdown).
  DenseColMat h() const {
    const Index n = hcols_.size();
    DenseColMat H(n + 1, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < hcols_[j].size() && i <= n; ++i) H(i, j) = hcols_[j][i];
    return H;
  }
  const Vector& h_col(Index j) const { return hcols_[j]; }

 private:
  bool lagged() const noexcept { return is_lagged(scheme_); }
  bool started() const noexcept { return q_.cols() > 0 || w_.has_value(); }

  void reset() {
    q_ = DenseColMat(m_, 0);
    hcols_.clear();
    w_.reset();
    k_ = Vector();
    l_ = DenseColMat();
    breakdown_ = false;
    need_bootstrap_ = false;
    refl_ = DenseColMat(m_, 0);
    tau_.clear();
    sign_.clear();
    start_norm_ = 0.0;
  }

  void append(std::span<const double> coeffs, double alpha, std::span<double> u) {
    for (double& v : u) v /= alpha;
    if (ledger_) ledger_->add_flops(u.size());
    q_.append_col(u);
    Vector col(coeffs);
    col.push_back(alpha);
    hcols_.push_back(std::move(col));
  }

  bool mark_breakdown(std::span<const double> coeffs) {
    Vector col(coeffs);
    col.push_back(0.0);
    hcols_.push_back(std::move(col));
    breakdown_ = true;
    w_.reset();
    return false;
  }

  // ---- delayed schemes -------------------------------------------------

  // Invariant between steps: A q_{p-1} = Q_{1:p} k + w, with w awaiting its
  // second pass (dcgs2) or its normalization (icwy-mgs).
  void bootstrap() {
    const Index p1 = q_.cols();
    Vector v(m_);
    apply_op(*op_, q_.col(p1 - 1), v, ledger_);
    DenseColMat S = mv_trans_mv(q_.view(), as_block(v.span()), ledger_);
    mv_times_mat_add_mv(v.span(), q_.view(), S.col(0), -1.0, 1.0, ledger_);
    k_ = Vector(S.col(0));
    w_ = std::move(v);
    if (scheme_ == Scheme::IcwyMgs) l_ = DenseColMat(p1, p1);
    need_bootstrap_ = false;
  }

  bool lagged_step() {
    if (need_bootstrap_) {
      bootstrap();
      return true;
    }
    const Index p = q_.cols();
    Vector& w = *w_;
    Vector Aw(m_);
    apply_op(*op_, w, Aw, ledger_);

    DenseColMat B(m_, p + 1), X(m_, 2);
    std::copy_n(q_.data(), m_ * p, B.data());
    std::copy_n(w.data(), m_, B.data() + m_ * p);
    std::copy_n(w.data(), m_, X.data());
    std::copy_n(Aw.data(), m_, X.data() + m_);
    DenseColMat G = mv_trans_mv(B, X, ledger_);

    Vector C(p), S(p);
    double ctc = 0.0, cts = 0.0;
    for (Index i = 0; i < p; ++i) {
      C[i] = G(i, 0);
      S[i] = G(i, 1);
      ctc += C[i] * C[i];
      cts += C[i] * S[i];
    }
    const double beta = G(p, 0);
    const double s = G(p, 1);
    if (scheme_ == Scheme::IcwyMgs) return icwy_step(p, w, Aw, C, S, beta, s);

    const bool hrt = scheme_ == Scheme::Dcgs2Hrt;
    Vector coeffs(p);
    for (Index i = 0; i < p; ++i) coeffs[i] = k_[i] + C[i];
    const double cn2 = detail::sum_sq(coeffs);
    if (p == 0 && !(beta > 0.0)) throw BreakdownError("Arnoldi::step: zero starting vector");
    if (p > 0 && detail::negligible(std::sqrt(std::max(beta, 0.0)), cn2, m_)) return mark_breakdown(coeffs);
    double alpha;
    if (hrt) {
      alpha = std::sqrt(beta);
    } else {
      const double d = beta - ctc;
      if (!(d > 0.0)) throw PythagoreanBreakdown("Arnoldi (dcgs2): beta - C'C <= 0 at column " + std::to_string(p));
      alpha = std::sqrt(d);
    }
    if (p > 0 && (p >= m_ || detail::negligible(alpha, cn2, m_))) return mark_breakdown(coeffs);

    if (!hrt) mv_times_mat_add_mv(w.span(), q_.view(), C, -1.0, 1.0, ledger_);
    if (p == 0) {
      start_norm_ = alpha;
      for (double& v : w) v /= alpha;
      q_.append_col(w);
    } else {
      append(coeffs, alpha, w);
    }

    // T = Q_{1:p+1}' A q_p from the fused products (Stephen's trick for the
    // last entry), then k = T - (1/alpha) Hbar C.
    Vector T(p + 1);
    for (Index i = 0; i < p; ++i) T[i] = S[i] / alpha;
    T[p] = hrt ? s / (alpha * alpha) : (s - cts) / (alpha * alpha);
    Vector knew = T;
    if (!hrt && p > 0) {
      for (Index j = 0; j < p; ++j) {
        const Vector& col = hcols_[j];
        const double cj = C[j] / alpha;
        for (Index i = 0; i < col.size(); ++i) knew[i] -= col[i] * cj;
      }
      if (ledger_) ledger_->add_flops(2ull * (p + 1) * p);
    }
    // w_new = (1/alpha) A w - Q_{1:p+1} T
    mv_times_mat_add_mv(Aw.span(), q_.view(), T, -1.0, 1.0 / alpha, ledger_);
    w_ = std::move(Aw);
    k_ = std::move(knew);
    return true;
  }

  bool icwy_step(Index p, Vector& v, Vector& Av, const Vector& ell, const Vector& z, double beta, double t) {
    if (p == 0 && !(beta > 0.0)) throw BreakdownError("Arnoldi::step: zero starting vector");
    const double alpha = std::sqrt(std::max(beta, 0.0));
    Vector coeffs(p);
    for (Index i = 0; i < p; ++i) coeffs[i] = k_[i];
    if (p > 0 && (p >= m_ || detail::negligible(alpha, detail::sum_sq(coeffs), m_))) return mark_breakdown(coeffs);
    if (p == 0) {
      start_norm_ = alpha;
      for (double& x : v) x /= alpha;
      q_.append_col(v);
    } else {
      append(coeffs, alpha, v);
    }
    DenseColMat L(p + 1, p + 1);
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < p; ++i) L(i, j) = l_(i, j);
    for (Index j = 0; j < p; ++j) L(p, j) = ell[j] / alpha;
    l_ = std::move(L);

    Vector r(p + 1);
    for (Index i = 0; i < p; ++i) r[i] = z[i] / alpha;
    r[p] = t / (alpha * alpha);
    if (opt_.symmetric_correction) {
      Vector tr(p + 1);
      for (Index i = 0; i <= p; ++i) {
        double s = r[i];
        for (Index j = 0; j < i; ++j) s -= l_(i, j) * r[j];
        for (Index j = i + 1; j <= p; ++j) s -= l_(j, i) * r[j];
        tr[i] = s;
      }
      r = std::move(tr);
    } else {
      detail::unit_lower_solve(l_, r);
    }
    if (ledger_) ledger_->add_flops(static_cast<std::uint64_t>(p) * p);
    mv_times_mat_add_mv(Av.span(), q_.view(), r, -1.0, 1.0 / alpha, ledger_);
    w_ = std::move(Av);
    k_ = std::move(r);
    return true;
  }

  // ---- Householder (Walker) --------------------------------------------

  // Reflector i acts on rows i..m-1: P_i = I - tau_i v_i v_i', v_i(i) = 1.
  // q_j = sign_j P_0 ... P_j e_j.

  void apply_reflector(Index i, std::span<double> x) const {
    if (tau_[i] == 0.0) return;
    const double* v = refl_.col(i).data();
    double s = 0.0;
    for (Index r = i; r < m_; ++r) s += v[r] * x[r];
    if (ledger_) {
      ledger_->record(KernelClass::MvDot, m_ - i, 1, 1);
      ledger_->record(KernelClass::MvTimesMatAddMv, m_ - i, 1, 1);
    }
    s *= tau_[i];
    for (Index r = i; r < m_; ++r) x[r] -= s * v[r];
  }

  /// Builds the reflector zeroing x(i+1:m) and applies it to x; returns the
  /// new x(i) (= -sign(x_i) ||x(i:m)||).
  double make_reflector(std::span<double> x) {
    const Index i = refl_.cols();
    double ss = 0.0;
    for (Index r = i; r < m_; ++r) ss += x[r] * x[r];
    if (ledger_) ledger_->record(KernelClass::MvDot, m_ - i, 1, 1);
    const double nx = std::sqrt(ss);
    Vector v(m_);
    double tau = 0.0, beta = 0.0;
    if (nx > 0.0) {
      const double x0 = x[i];
      beta = x0 >= 0.0 ? -nx : nx;
      const double v0 = x0 - beta;
      v[i] = 1.0;
      for (Index r = i + 1; r < m_; ++r) v[r] = x[r] / v0;
      tau = (beta - x0) / beta;
    }
    refl_.append_col(v);
    tau_.push_back(tau);
    x[i] = beta;
    for (Index r = i + 1; r < m_; ++r) x[r] = 0.0;
    return beta;
  }

  Vector hh_basis_vector(Index j) const {
    Vector x(m_);
    x[j] = static_cast<double>(sign_[j]);
    for (Index i = j + 1; i-- > 0;) apply_reflector(i, x);
    return x;
  }

  void hh_start(std::span<const double> b) {
    Vector y(b);
    const double beta = make_reflector(y);
    if (beta == 0.0) throw BreakdownError("Arnoldi::start: zero starting vector");
    sign_.push_back(beta > 0.0 ? 1 : -1);
    start_norm_ = std::abs(beta);
    q_.append_col(hh_basis_vector(0));
  }

  bool hh_step() {
    const Index j = q_.cols() - 1;
    Vector y(m_);
    apply_op(*op_, q_.col(j), y, ledger_);
    for (Index i = 0; i <= j; ++i) apply_reflector(i, y);
    Vector h(j + 1);
    for (Index i = 0; i <= j; ++i) h[i] = sign_[i] * y[i];
    if (j + 1 >= m_) return mark_breakdown(h);
    const double beta = make_reflector(y);
    const double alpha = std::abs(beta);
    if (detail::negligible(alpha, detail::sum_sq(h), m_)) {
      refl_.resize_cols(j + 1);
      tau_.pop_back();
      return mark_breakdown(h);
    }
    sign_.push_back(beta > 0.0 ? 1 : -1);
    q_.append_col(hh_basis_vector(j + 1));
    Vector col = h;
    col.push_back(alpha);
    hcols_.push_back(std::move(col));
    return true;
  }

  /// Reflectors reproducing a given orthonormal Q (for restarts).
  void hh_rebuild() {
    const DenseColMat Q = q_;
    q_ = DenseColMat(m_, 0);
    for (Index j = 0; j < Q.cols(); ++j) {
      Vector y(Q.col(j));
      for (Index i = 0; i < j; ++i) apply_reflector(i, y);
      const double beta = make_reflector(y);
      sign_.push_back(beta >= 0.0 ? 1 : -1);
      q_.append_col(hh_basis_vector(j));
    }
  }

  const LinearOperator* op_;
  Scheme scheme_;
  SyncLedger* ledger_;
  OrthoOptions opt_;
  Index m_;

  DenseColMat q_;
  std::vector<Vector> hcols_;
  bool breakdown_ = false;
  double start_norm_ = 0.0;

  // delayed schemes
  std::optional<Vector> w_;
  Vector k_;
  DenseColMat l_;
  bool need_bootstrap_ = false;

  // householder
  DenseColMat refl_;
  std::vector<double> tau_;
  std::vector<int> sign_;
};

/// n-step expansion from b: start, n steps (stopping early on a happy
/// breakdown), finalize.
inline Arnoldi arnoldi_expand(const LinearOperator& op, Scheme s, std::span<const double> b, Index n,
                              SyncLedger* ledger = nullptr, OrthoOptions opt = {}) {
  Arnoldi a(op, s, ledger, opt);
  a.start(b);
  for (Index j = 0; j < n; ++j)
    if (!a.step()) break;
  a.finalize();
  return a;
}

}  // namespace kls
