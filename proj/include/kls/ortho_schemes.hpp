#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "kls/core/dense.hpp"
#include "kls/core/error.hpp"
#include "kls/core/householder.hpp"
#include "kls/core/kernels.hpp"
#include "kls/core/ledger.hpp"
#include "kls/scheme.hpp"

// Left-looking QR, one column per push. The delayed schemes (dcgs2,
// dcgs2-hrt, icwy-mgs) finish column j-1 during the push of column j, so a
// factorization is complete only after finalize().

namespace kls {

struct OrthoOptions {
  /// icwy-mgs only: apply T = I - L - L' instead of (I + L)^{-1}.
  bool symmetric_correction = false;
};

namespace detail {

/// Columns whose remaining norm alpha is this small relative to the whole
/// column are treated as dependent.
inline double breakdown_tol(Index m) {
  return std::max(10.0, std::sqrt(static_cast<double>(m))) * std::numeric_limits<double>::epsilon();
}

inline bool negligible(double alpha, double coeff_norm_sq, Index m) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) return true;
  return alpha <= breakdown_tol(m) * std::sqrt(coeff_norm_sq + alpha * alpha);
}

inline double sum_sq(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

/// Coefficients h (against Q), remaining norm alpha, and the unnormalized
/// remainder u of one non-delayed projection of a.
struct Projection {
  Vector h;
  double alpha = 0.0;
  Vector u;
  /// cgs2-lagged only: beta = w'w and whether beta - C'C <= 0.
  double beta = 0.0;
  bool pythagorean_failed = false;
};

inline Projection project_cgs(ConstColBlock Q, Vector a, SyncLedger* ledger) {
  Projection p;
  DenseColMat S = mv_trans_mv(Q, as_block(a.span()), ledger);
  mv_times_mat_add_mv(a.span(), Q, S.col(0), -1.0, 1.0, ledger);
  p.h = Vector(S.col(0));
  p.alpha = norm2(a, ledger);
  p.u = std::move(a);
  return p;
}

inline Projection project_cgs2(ConstColBlock Q, Vector a, SyncLedger* ledger) {
  Projection p;
  DenseColMat S = mv_trans_mv(Q, as_block(a.span()), ledger);
  mv_times_mat_add_mv(a.span(), Q, S.col(0), -1.0, 1.0, ledger);
  DenseColMat C = mv_trans_mv(Q, as_block(a.span()), ledger);
  mv_times_mat_add_mv(a.span(), Q, C.col(0), -1.0, 1.0, ledger);
  p.h = Vector(Q.cols);
  for (Index i = 0; i < Q.cols; ++i) p.h[i] = S(i, 0) + C(i, 0);
  p.alpha = norm2(a, ledger);
  p.u = std::move(a);
  return p;
}

/// CGS2 with the norm fused into the second pass: [Q, w]'w gives C and
/// beta = w'w, and alpha = sqrt(beta - C'C).
inline Projection project_cgs2_lagged(ConstColBlock Q, Vector a, SyncLedger* ledger) {
  Projection p;
  const Index k = Q.cols, m = Q.rows;
  DenseColMat S = mv_trans_mv(Q, as_block(a.span()), ledger);
  mv_times_mat_add_mv(a.span(), Q, S.col(0), -1.0, 1.0, ledger);
  // [Q, w] is not contiguous with Q; gather it (local copy, no reduction).
  DenseColMat Qw(m, k + 1);
  std::copy_n(Q.ptr, m * k, Qw.data());
  std::copy_n(a.data(), m, Qw.data() + m * k);
  DenseColMat G = mv_trans_mv(Qw, as_block(a.span()), ledger);
  double ctc = 0.0;
  for (Index i = 0; i < k; ++i) ctc += G(i, 0) * G(i, 0);
  const double d = G(k, 0) - ctc;
  p.beta = G(k, 0);
  p.pythagorean_failed = !(d > 0.0);
  mv_times_mat_add_mv(a.span(), Q, std::span<const double>(G.data(), k), -1.0, 1.0, ledger);
  p.h = Vector(k);
  for (Index i = 0; i < k; ++i) p.h[i] = S(i, 0) + G(i, 0);
  p.alpha = p.pythagorean_failed ? 0.0 : std::sqrt(d);
  p.u = std::move(a);
  return p;
}

/// Modified Gram-Schmidt, Level 1: one dot per basis vector, then the norm.
inline Projection project_mgs(ConstColBlock Q, Vector a, SyncLedger* ledger) {
  Projection p;
  p.h = Vector(Q.cols);
  for (Index i = 0; i < Q.cols; ++i) {
    const double r = dot(Q.col(i), a, ledger);
    p.h[i] = r;
    const double neg = -r;
    mv_times_mat_add_mv(a.span(), ConstColBlock{Q.ptr + i * Q.rows, Q.rows, 1}, std::span<const double>(&neg, 1),
                        1.0, 1.0, ledger);
  }
  p.alpha = norm2(a, ledger);
  p.u = std::move(a);
  return p;
}

inline Projection project(Scheme s, ConstColBlock Q, Vector a, SyncLedger* ledger) {
  switch (s) {
    case Scheme::Cgs: return project_cgs(Q, std::move(a), ledger);
    case Scheme::Cgs2: return project_cgs2(Q, std::move(a), ledger);
    case Scheme::Cgs2Lagged: return project_cgs2_lagged(Q, std::move(a), ledger);
    case Scheme::Mgs: return project_mgs(Q, std::move(a), ledger);
    default: throw UnknownSchemeError("project: scheme has no one-shot projection");
  }
}

/// Solves (I + L) x = b in place, L strictly lower (stored dense, row i holds
/// q_i'Q_{1:i-1}).
inline void unit_lower_solve(const DenseColMat& L, std::span<double> b) {
  for (Index i = 0; i < b.size(); ++i) {
    double s = b[i];
    for (Index j = 0; j < i; ++j) s -= L(i, j) * b[j];
    b[i] = s;
  }
}

}  // namespace detail

/// Per-factorization state. Q holds the finished columns; for the delayed
/// schemes `pending` is the single unnormalized column w and `pending_coeffs`
/// its projection coefficients against the first pending_coeffs.size()
/// columns of Q.
struct OrthoState {
  Scheme scheme;
  Index m;
  SyncLedger* ledger;
  OrthoOptions options;

  DenseColMat q;
  UpperTri r;
  std::optional<Vector> pending;
  Vector pending_coeffs;

  // Last delayed step, for inspection.
  Vector c_last;
  double alpha_last = 0.0;
  double beta_last = 0.0;

  /// icwy-mgs: strictly lower L with L(i, 0:i) = q_i'Q_{0:i}.
  DenseColMat l;

  /// householder: the raw columns, factored in finalize.
  DenseColMat raw;

  bool finalized = false;
  Index pushed = 0;

  OrthoState(Scheme s, Index rows, SyncLedger* led = nullptr, OrthoOptions opt = {})
      : scheme(s), m(rows), ledger(led), options(opt), q(rows, 0), raw(rows, 0) {}

  Index finished_cols() const noexcept { return q.cols(); }
};

namespace detail {

inline void check_push(OrthoState& st, std::span<const double> a) {
  require_dims(a.size() == st.m, "push: column length must equal rows");
  require_dims(!st.finalized, "push: factorization already finalized");
  require_dims(st.pushed < st.m, "push: more columns than rows");
}

inline void emit_column(OrthoState& st, std::span<const double> coeffs, double alpha, std::span<double> u) {
  if (negligible(alpha, sum_sq(coeffs), st.m))
    throw BreakdownError("column " + std::to_string(st.q.cols() + 1) + " is dependent at working precision");
  for (double& v : u) v /= alpha;
  if (st.ledger) st.ledger->add_flops(u.size());
  st.q.append_col(u);
  std::vector<double> col(coeffs.begin(), coeffs.end());
  col.push_back(alpha);
  st.r.append_col(col);
}

inline void push_one_shot(OrthoState& st, std::span<const double> a, Scheme s) {
  auto p = project(s, st.q.view(), Vector(a), st.ledger);
  if (p.pythagorean_failed)
    throw PythagoreanBreakdown("cgs2-lagged: beta - C'C <= 0 at column " + std::to_string(st.q.cols() + 1));
  emit_column(st, p.h, p.alpha, p.u);
}

}  // namespace detail

/// CGS: one projection, then normalize. Two reductions.
inline void cgs_push(OrthoState& st, std::span<const double> a) {
  detail::check_push(st, a);
  detail::push_one_shot(st, a, Scheme::Cgs);
  ++st.pushed;
}

/// CGS2: two projections and a norm; R column = S + C. Three reductions.
inline void cgs2_push(OrthoState& st, std::span<const double> a) {
  detail::check_push(st, a);
  detail::push_one_shot(st, a, Scheme::Cgs2);
  ++st.pushed;
}

/// CGS2 with the norm lagged into the second pass. Two reductions.
inline void cgs2_lagged_push(OrthoState& st, std::span<const double> a) {
  detail::check_push(st, a);
  detail::push_one_shot(st, a, Scheme::Cgs2Lagged);
  ++st.pushed;
}

/// MGS Level 1: j reductions at column j.
inline void mgs_push(OrthoState& st, std::span<const double> a) {
  detail::check_push(st, a);
  detail::push_one_shot(st, a, Scheme::Mgs);
  ++st.pushed;
}

/// Inverse compact WY MGS. The fused reduction [Q, v]'[v, a] normalizes the
/// pending v, appends its row of L, and projects a through (I + L)^{-1}.
/// One reduction per column (none for the first).
inline void icwy_mgs_push(OrthoState& st, std::span<const double> a) {
  detail::check_push(st, a);
  ++st.pushed;
  if (!st.pending) {
    st.pending = Vector(a);
    st.pending_coeffs = Vector();
    return;
  }
  const Index p = st.q.cols();
  Vector& v = *st.pending;
  DenseColMat B(st.m, p + 1), X(st.m, 2);
  std::copy_n(st.q.data(), st.m * p, B.data());
  std::copy_n(v.data(), st.m, B.data() + st.m * p);
  std::copy_n(v.data(), st.m, X.data());
  std::copy(a.begin(), a.end(), X.data() + st.m);
  DenseColMat G = mv_trans_mv(B, X, st.ledger);

  const double beta = G(p, 0);
  const double alpha = std::sqrt(std::max(beta, 0.0));
  st.beta_last = beta;
  st.alpha_last = alpha;
  detail::emit_column(st, st.pending_coeffs, alpha, v);

  // L grows by one row/column: L(p, 0:p) = q_p'Q_{0:p} = ell/alpha.
  DenseColMat L(p + 1, p + 1);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) L(i, j) = st.l(i, j);
  for (Index j = 0; j < p; ++j) L(p, j) = G(j, 0) / alpha;
  st.l = std::move(L);

  Vector z(p + 1);
  for (Index i = 0; i < p; ++i) z[i] = G(i, 1);
  z[p] = G(p, 1) / alpha;
  if (st.options.symmetric_correction) {
    Vector t(p + 1);
    for (Index i = 0; i <= p; ++i) {
      double s = z[i];
      for (Index j = 0; j < i; ++j) s -= st.l(i, j) * z[j];
      for (Index j = i + 1; j <= p; ++j) s -= st.l(j, i) * z[j];
      t[i] = s;
    }
    z = std::move(t);
  } else {
    detail::unit_lower_solve(st.l, z);
  }
  if (st.ledger) st.ledger->add_flops(static_cast<std::uint64_t>(p) * p);

  Vector w(a);
  mv_times_mat_add_mv(w.span(), st.q.view(), z, -1.0, 1.0, st.ledger);
  st.pending = std::move(w);
  st.pending_coeffs = std::move(z);
}

namespace detail {

/// Shared body of dcgs2 / dcgs2-hrt.
inline void delayed_push(OrthoState& st, std::span<const double> a, bool hrt) {
  check_push(st, a);
  ++st.pushed;
  if (!st.pending) {
    st.pending = Vector(a);
    st.pending_coeffs = Vector();
    return;
  }
  const Index p = st.q.cols();
  const Index m = st.m;
  Vector& w = *st.pending;
  DenseColMat B(m, p + 1), X(m, 2);
  std::copy_n(st.q.data(), m * p, B.data());
  std::copy_n(w.data(), m, B.data() + m * p);
  std::copy_n(w.data(), m, X.data());
  std::copy(a.begin(), a.end(), X.data() + m);
  DenseColMat G = mv_trans_mv(B, X, st.ledger);

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
  double alpha;
  if (hrt) {
    alpha = std::sqrt(std::max(beta, 0.0));
  } else {
    const double d = beta - ctc;
    if (!(d > 0.0)) throw PythagoreanBreakdown("dcgs2: beta - C'C <= 0 at column " + std::to_string(p + 1));
    alpha = std::sqrt(d);
  }
  st.c_last = C;
  st.alpha_last = alpha;
  st.beta_last = beta;

  // Delayed reorthogonalization of w (skipped by hrt: C is recorded in R but
  // never applied to the vector).
  if (!hrt) mv_times_mat_add_mv(w.span(), st.q.view(), C, -1.0, 1.0, st.ledger);
  Vector coeffs(p);
  for (Index i = 0; i < p; ++i) coeffs[i] = st.pending_coeffs[i] + C[i];
  emit_column(st, coeffs, alpha, w);

  // Stephen's trick: q_{j-1}'a_j from the unnormalized w.
  Vector Snew(p + 1);
  for (Index i = 0; i < p; ++i) Snew[i] = S[i];
  Snew[p] = hrt ? s / alpha : (s - cts) / alpha;

  Vector wn(a);
  mv_times_mat_add_mv(wn.span(), st.q.view(), Snew, -1.0, 1.0, st.ledger);
  st.pending = std::move(wn);
  st.pending_coeffs = std::move(Snew);
}

}  // namespace detail

/// DCGS2: one fused reduction per column.
inline void dcgs2_push(OrthoState& st, std::span<const double> a) { detail::delayed_push(st, a, false); }

/// DCGS2 without Stephen's correction, the Pythagorean norm, or the delayed
/// correction of the vector.
inline void dcgs2_hrt_push(OrthoState& st, std::span<const double> a) { detail::delayed_push(st, a, true); }

inline void householder_push(OrthoState& st, std::span<const double> a) {
  detail::check_push(st, a);
  ++st.pushed;
  st.raw.append_col(a);
}

/// Completes the pending column of a delayed scheme: a CGS2 pass for
/// dcgs2/dcgs2-hrt (two reductions), a norm for icwy-mgs (one).
inline void dcgs2_finalize(OrthoState& st) {
  if (!st.pending) return;
  Vector& w = *st.pending;
  const Index p = st.q.cols();
  DenseColMat C = mv_trans_mv(st.q.view(), as_block(w.span()), st.ledger);
  mv_times_mat_add_mv(w.span(), st.q.view(), C.col(0), -1.0, 1.0, st.ledger);
  Vector coeffs(p);
  for (Index i = 0; i < p; ++i) coeffs[i] = st.pending_coeffs[i] + C(i, 0);
  const double alpha = norm2(w, st.ledger);
  st.alpha_last = alpha;
  detail::emit_column(st, coeffs, alpha, w);
  st.pending.reset();
  st.pending_coeffs = Vector();
}

inline void push(OrthoState& st, std::span<const double> a) {
  switch (st.scheme) {
    case Scheme::Cgs: cgs_push(st, a); break;
    case Scheme::Cgs2: cgs2_push(st, a); break;
    case Scheme::Cgs2Lagged: cgs2_lagged_push(st, a); break;
    case Scheme::Mgs: mgs_push(st, a); break;
    case Scheme::IcwyMgs: icwy_mgs_push(st, a); break;
    case Scheme::Dcgs2: dcgs2_push(st, a); break;
    case Scheme::Dcgs2Hrt: dcgs2_hrt_push(st, a); break;
    case Scheme::Householder: householder_push(st, a); break;
  }
}

inline void finalize(OrthoState& st) {
  if (st.finalized) return;
  switch (st.scheme) {
    case Scheme::Dcgs2:
    case Scheme::Dcgs2Hrt: dcgs2_finalize(st); break;
    case Scheme::IcwyMgs:
      if (st.pending) {
        Vector& v = *st.pending;
        // 1x1 MvTransMv keeps every icwy reduction in one kernel class.
        DenseColMat b = mv_trans_mv(as_block(v.span()), as_block(v.span()), st.ledger);
        const double alpha = std::sqrt(std::max(b(0, 0), 0.0));
        st.alpha_last = alpha;
        detail::emit_column(st, st.pending_coeffs, alpha, v);
        st.pending.reset();
      }
      break;
    case Scheme::Householder: {
      auto f = householder_qr(st.raw, st.ledger);
      st.q = f.q();
      st.r = f.r();
      break;
    }
    default: break;
  }
  st.finalized = true;
}

struct QrFactors {
  DenseColMat q;
  UpperTri r;
};

/// Factors all columns of A with the given scheme.
inline QrFactors factorize(const DenseColMat& A, Scheme s, SyncLedger* ledger = nullptr, OrthoOptions opt = {}) {
  OrthoState st(s, A.rows(), ledger, opt);
  st.q.reserve_cols(A.cols());
  for (Index j = 0; j < A.cols(); ++j) push(st, A.col(j));
  finalize(st);
  return {std::move(st.q), std::move(st.r)};
}

}  // namespace kls
