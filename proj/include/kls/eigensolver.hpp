#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "kls/arnoldi.hpp"
#include "kls/core/band_lu.hpp"
#include "kls/core/dense.hpp"
#include "kls/core/random.hpp"
#include "kls/core/schur.hpp"
#include "kls/core/svd.hpp"
#include "kls/eigen_match.hpp"
#include "kls/metrics.hpp"
#include "kls/operator.hpp"

namespace kls {

enum class EigTarget { LargestMagnitude, LargestReal, SmallestReal, SmallestMagnitude };

struct KrylovSchurConfig {
  Index max_basis = 20;             ///< n_max
  std::optional<Index> keep;        ///< n_keep, default max_basis / 2
  double tol = 1e-7;                ///< Arnoldi residual threshold
  Index max_restarts = 50;
  Index nev = 0;                    ///< wanted count; 0 means max_basis
  Scheme scheme = Scheme::Dcgs2;
  EigTarget target = EigTarget::LargestMagnitude;
  bool compute_vectors = false;
  /// Optional closed-form spectrum for the multiplicity check.
  std::optional<std::vector<Complex>> exact;
};

struct EigResult {
  std::vector<Complex> values;     ///< converged (locked), lock order
  std::vector<double> residuals;   ///< |h_{n+1,n}| |e_n' y|
  std::vector<std::vector<Complex>> vectors;  ///< Ritz vectors, if requested
  std::vector<Complex> ritz_values;  ///< diagonal of the last Schur form
  Index invariant_dim = 0;
  Index restarts = 0;
  Index basis_size = 0;            ///< size of the last expansion
  bool complete = false;           ///< nev values converged
  bool happy_breakdown = false;
  bool over_multiplicity = false;
  double loo = 0.0;                ///< of the final basis
  double rre = 0.0;
};

/// |h_{n+1,n}| |e_n' y| for y an eigenvector of the leading n x n block of
/// the (n+1) x n matrix Hbar.
inline double ritz_residual(const DenseColMat& Hbar, std::span<const Complex> y) {
  const Index n = Hbar.cols();
  detail::require_dims(Hbar.rows() == n + 1 && y.size() == n && n >= 1, "ritz_residual: shape mismatch");
  return std::abs(Hbar(n, n - 1)) * std::abs(y[n - 1]);
}
inline double ritz_residual(const DenseColMat& Hbar, std::span<const double> y) {
  std::vector<Complex> c(y.begin(), y.end());
  return ritz_residual(Hbar, c);
}

namespace detail {

inline double target_key(Complex z, EigTarget t) {
  switch (t) {
    case EigTarget::LargestMagnitude: return -std::abs(z);
    case EigTarget::LargestReal: return -z.real();
    case EigTarget::SmallestReal: return z.real();
    case EigTarget::SmallestMagnitude: return std::abs(z);
  }
  return 0.0;
}

/// y = Z_active * u, u living on the active rows.
inline std::vector<Complex> lift(const DenseColMat& Z, const std::vector<Complex>& u) {
  std::vector<Complex> y(Z.rows(), Complex(0.0));
  for (Index j = 0; j < Z.cols(); ++j) {
    if (u[j] == Complex(0.0)) continue;
    for (Index i = 0; i < Z.rows(); ++i) y[i] += Z(i, j) * u[j];
  }
  return y;
}

/// Unit vector orthogonal to the columns of Q (two CGS passes).
inline Vector random_orthogonal_to(ConstColBlock Q, Rng& rng, SyncLedger* ledger) {
  for (int attempt = 0; attempt < 5; ++attempt) {
    Vector v = rng.normal_vector(Q.rows);
    for (int pass = 0; pass < 2; ++pass) {
      DenseColMat c = mv_trans_mv(Q, as_block(v.span()), ledger);
      mv_times_mat_add_mv(v.span(), Q, c.col(0), -1.0, 1.0, ledger);
    }
    const double nv = norm2(v, ledger);
    if (nv > 1e-8) {
      for (double& x : v) x /= nv;
      return v;
    }
  }
  throw BreakdownError("random_orthogonal_to: basis spans the space");
}

}  // namespace detail

/// Krylov-Schur with thick restart and locking.
///
/// Each cycle expands the decomposition to max_basis columns, takes the real
/// Schur form of the unlocked block, locks every Ritz value whose residual is
/// below tol, orders the rest by the target, and restarts from the leading
/// locked + keep Schur vectors. max_restarts = 0 gives a single expansion.
inline EigResult krylov_schur_run(const LinearOperator& op, const KrylovSchurConfig& cfg, std::uint64_t seed,
                                  SyncLedger* ledger = nullptr, std::optional<Vector> start = std::nullopt) {
  const Index m = op.rows();
  const Index nmax = std::min(cfg.max_basis, m);
  const Index keep = cfg.keep.value_or(std::max<Index>(1, nmax / 2));
  const Index nev = cfg.nev ? std::min(cfg.nev, m) : nmax;
  detail::require_dims(nmax >= 1 && keep >= 1 && (keep < nmax || nmax == 1) && cfg.tol > 0.0,
                       "krylov_schur_run: need 1 <= keep < max_basis <= m and tol > 0");
  Rng rng(seed);
  Vector b = start ? *start : rng.normal_vector(m);

  EigResult res;
  Arnoldi arn(op, cfg.scheme, ledger);
  arn.start(b);
  Index nlock = 0;
  std::vector<Complex> locked_vals;
  std::vector<double> locked_res;

  for (Index cycle = 0;; ++cycle) {
    const Index have = arn.steps();
    for (Index i = have; i < nmax; ++i)
      if (!arn.step()) break;
    arn.finalize();

    const Index n = arn.steps();
    const DenseColMat Hbar = arn.h();
    const DenseColMat& Q = arn.q();
    res.basis_size = n;
    res.happy_breakdown = arn.happy_breakdown();
    const double beta = Hbar(n, n - 1);

    // Active block: rows/cols nlock..n-1 (locked columns are decoupled).
    const Index na = n - nlock;
    DenseColMat H22(na, na);
    for (Index j = 0; j < na; ++j)
      for (Index i = 0; i < na; ++i) H22(i, j) = Hbar(nlock + i, nlock + j);
    SchurForm s2 = dense_real_schur(H22);

    // Residuals of the active Ritz pairs.
    auto residuals_of = [&](const SchurForm& s) {
      std::vector<double> r(na, 0.0);
      for (const auto& blk : schur_blocks(s.t)) {
        const auto u = quasi_triangular_eigenvector(s.t, blk.start);
        const auto y = detail::lift(s.z, u);
        const double rr = std::abs(beta) * std::abs(y[na - 1]);
        for (Index i = 0; i < blk.size; ++i) r[blk.start + i] = rr;
      }
      return r;
    };
    std::vector<double> r2 = residuals_of(s2);
    const auto ev2 = schur_eigenvalues(s2.t);
    // Converged first, then the rest; each group ordered by the target.
    double span = 1.0;
    for (Index i = 0; i < na; ++i) span = std::max(span, std::abs(detail::target_key(ev2[i], cfg.target)));
    std::vector<double> keys(na);
    for (Index i = 0; i < na; ++i)
      keys[i] = (r2[i] < cfg.tol ? 0.0 : 4.0) + detail::target_key(ev2[i], cfg.target) / span;
    reorder_schur(s2, keys);
    r2 = residuals_of(s2);
    const auto ev_sorted = schur_eigenvalues(s2.t);

    Index nconv = 0;
    while (nconv < na && r2[nconv] < cfg.tol) ++nconv;
    // never split a 2x2 block at the lock boundary
    if (nconv > 0 && nconv < na && s2.t(nconv, nconv - 1) != 0.0) --nconv;
    for (Index i = 0; i < nconv; ++i) {
      locked_vals.push_back(ev_sorted[i]);
      locked_res.push_back(r2[i]);
    }

    // Assemble the full Schur form T = [T11, T12 Z2; 0, T2] and Z = diag(I, Z2).
    DenseColMat T(n, n), Z = DenseColMat::identity(n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        if (i < nlock && j < nlock) T(i, j) = Hbar(i, j);
      }
    for (Index j = 0; j < na; ++j)
      for (Index i = 0; i < nlock; ++i) {
        double sacc = 0.0;
        for (Index k = 0; k < na; ++k) sacc += Hbar(i, nlock + k) * s2.z(k, j);
        T(i, nlock + j) = sacc;
      }
    for (Index j = 0; j < na; ++j)
      for (Index i = 0; i < na; ++i) {
        T(nlock + i, nlock + j) = s2.t(i, j);
        Z(nlock + i, nlock + j) = s2.z(i, j);
      }
    nlock += nconv;
    res.invariant_dim = nlock;
    res.ritz_values = schur_eigenvalues(T);
    res.restarts = cycle;

    const bool done = nlock >= nev || cycle >= cfg.max_restarts || (res.happy_breakdown && n >= m);
    if (done) {
      res.loo = loss_of_orthogonality(Q.block(0, std::min(Q.cols(), n + 1)));
      res.rre = representation_error_arnoldi(op, Q, Hbar);
      res.complete = nlock >= nev;
      if (cfg.compute_vectors) {
        // Ritz vectors of the locked values: z = Q_n Z y.
        for (const auto& blk : schur_blocks(T)) {
          if (blk.start >= nlock) break;
          const auto u = quasi_triangular_eigenvector(T, blk.start);
          const auto y = detail::lift(Z, u);
          std::vector<Complex> z(m, Complex(0.0));
          for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < m; ++i) z[i] += Q(i, j) * y[j];
          res.vectors.push_back(z);
          if (blk.size == 2) {
            for (auto& c : z) c = std::conj(c);
            res.vectors.push_back(std::move(z));
          }
        }
      }
      break;
    }

    // Thick restart: keep the locked vectors plus `keep` more.
    Index p = std::min(nlock + keep, n - 1);
    if (p < nlock) p = nlock;
    if (p > 0 && p < n && T(p, p - 1) != 0.0) p = (p + 1 <= n - 1) ? p + 1 : p - 1;
    if (p == 0) p = 1;

    DenseColMat Qnew(m, p + 1), Hnew(p + 1, p);
    for (Index j = 0; j < p; ++j) {
      for (Index k = 0; k < n; ++k) {
        const double zkj = Z(k, j);
        if (zkj == 0.0) continue;
        for (Index i = 0; i < m; ++i) Qnew(i, j) += Q(i, k) * zkj;
      }
      for (Index i = 0; i < p; ++i) Hnew(i, j) = T(i, j);
      Hnew(p, j) = j < nlock ? 0.0 : beta * Z(n - 1, j);
    }
    if (res.happy_breakdown || Q.cols() <= n) {
      // Invariant subspace found: continue from a fresh direction.
      DenseColMat Qp = Qnew.leading(m, p);
      const Vector v = detail::random_orthogonal_to(Qp, rng, ledger);
      std::copy(v.begin(), v.end(), Qnew.col(p).begin());
      for (Index j = 0; j < p; ++j) Hnew(p, j) = 0.0;
    } else {
      std::copy_n(Q.col(n).data(), m, Qnew.col(p).data());
    }
    arn.restart_from(Qnew, Hnew);
  }

  res.values = locked_vals;
  res.residuals = locked_res;
  if (cfg.exact) res.over_multiplicity = match_eigenvalues(res.values, *cfg.exact, cfg.tol).over_multiplicity;
  return res;
}

/// Largest eigenvalue of a symmetric positive semidefinite operator given as
/// a callback, by Lanczos with full reorthogonalization.
template <class Apply>
double lanczos_largest(Index n, Apply&& apply, std::uint64_t seed, Index max_iter = 300, double rtol = 1e-12) {
  Rng rng(seed);
  Vector v = rng.normal_vector(n);
  double nv = norm2(v);
  for (double& x : v) x /= nv;
  DenseColMat V(n, 0);
  std::vector<double> alpha, beta;
  double prev = 0.0, est = 0.0;
  Vector w(n);
  max_iter = std::min(max_iter, n);
  for (Index j = 0; j < max_iter; ++j) {
    V.append_col(v);
    apply(std::span<const double>(v.span()), std::span<double>(w.span()));
    for (int pass = 0; pass < 2; ++pass) {
      DenseColMat c = mv_trans_mv(V.view(), as_block(w.span()));
      if (pass == 0) alpha.push_back(c(j, 0));
      mv_times_mat_add_mv(w.span(), V.view(), c.col(0), -1.0, 1.0);
    }
    const double b = norm2(w);
    const Index k = alpha.size();
    if (k % 5 == 0 || b == 0.0 || j + 1 == max_iter) {
      DenseColMat Tm(k, k);
      for (Index i = 0; i < k; ++i) {
        Tm(i, i) = alpha[i];
        if (i + 1 < k) Tm(i + 1, i) = Tm(i, i + 1) = beta[i];
      }
      est = 0.0;
      for (const auto& z : schur_eigenvalues(hessenberg_real_schur(Tm).t)) est = std::max(est, z.real());
      if (j > 0 && std::abs(est - prev) <= rtol * std::abs(est)) break;
      prev = est;
    }
    if (b <= 1e-14 * std::max(1.0, est)) break;
    beta.push_back(b);
    for (Index i = 0; i < n; ++i) v[i] = w[i] / b;
  }
  return est;
}

struct EigDiagnostics {
  double norm2 = 0.0;
  double cond = 0.0;
  double nonnormality = 0.0;  ///< ||A'A - AA'||_F / ||A||_F^2
  bool spectral = false;      ///< the fields below were computed
  double cond_v = 0.0;
  double cond_w = 0.0;
  double max_cond_lambda = 0.0;
  double min_cond_lambda = 0.0;
};

/// Operator specs: ||A||_2 and Cond(A) by Lanczos on A'A and on
/// A^{-T}A^{-1} (banded LU), nonnormality from sparse products, and, when
/// m <= spectral_limit, eigenvector and eigenvalue condition numbers from a
/// dense Schur decomposition.
inline EigDiagnostics eig_diagnostics(const CsrMatrix& A, Index spectral_limit = 600, std::uint64_t seed = 11) {
  detail::require_dims(A.rows() == A.cols(), "eig_diagnostics: matrix must be square");
  const Index m = A.rows();
  EigDiagnostics d;
  Vector t(m);
  const double lmax = lanczos_largest(
      m,
      [&](std::span<const double> x, std::span<double> y) {
        A.apply(x, t);
        A.apply_transpose(t, y);
      },
      seed);
  d.norm2 = std::sqrt(lmax);
  const BandLU lu(A);
  const double imax = lanczos_largest(
      m,
      [&](std::span<const double> x, std::span<double> y) {
        std::copy(x.begin(), x.end(), y.begin());
        lu.solve(y);
        lu.solve_transpose(y);
      },
      seed + 1);
  d.cond = d.norm2 * std::sqrt(imax);

  // ||A'A - AA'||_F column by column.
  Vector e(m), u(m), c1(m), r(m), c2(m);
  double s = 0.0;
  for (Index j = 0; j < m; ++j) {
    e[j] = 1.0;
    A.apply(e, u);
    A.apply_transpose(u, c1);
    A.apply_transpose(e, r);
    A.apply(r, c2);
    e[j] = 0.0;
    for (Index i = 0; i < m; ++i) s += (c1[i] - c2[i]) * (c1[i] - c2[i]);
  }
  const double fa = *A.exact_frobenius_norm();
  d.nonnormality = std::sqrt(s) / (fa * fa);

  if (m <= spectral_limit) {
    d.spectral = true;
    const SchurForm sf = dense_real_schur(A.to_dense());
    DenseColMat V(m, m), W(m, m);
    d.max_cond_lambda = 0.0;
    d.min_cond_lambda = std::numeric_limits<double>::infinity();
    for (const auto& blk : schur_blocks(sf.t)) {
      const auto y = detail::lift(sf.z, quasi_triangular_eigenvector(sf.t, blk.start));
      const auto u2 = detail::lift(sf.z, quasi_triangular_left_eigenvector(sf.t, blk.start));
      // left eigenvector w = conj(Z u); both unit norm
      Complex wv = 0.0;
      for (Index i = 0; i < m; ++i) wv += u2[i] * y[i];
      const double cl = 1.0 / std::abs(wv);
      d.max_cond_lambda = std::max(d.max_cond_lambda, cl);
      d.min_cond_lambda = std::min(d.min_cond_lambda, cl);
      // real bases with the same singular values: (v, conj v) -> sqrt2 (Re v, Im v)
      const double sc = blk.size == 2 ? std::sqrt(2.0) : 1.0;
      for (Index i = 0; i < m; ++i) {
        V(i, blk.start) = sc * y[i].real();
        W(i, blk.start) = sc * u2[i].real();
        if (blk.size == 2) {
          V(i, blk.start + 1) = sc * y[i].imag();
          W(i, blk.start + 1) = sc * u2[i].imag();
        }
      }
    }
    d.cond_v = condition_number(V);
    d.cond_w = condition_number(W);
  }
  return d;
}

}  // namespace kls
