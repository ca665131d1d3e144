#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "kls/core/dense.hpp"
#include "kls/core/error.hpp"

namespace kls {

using Complex = std::complex<double>;

/// H = Z T Z' with T quasi upper triangular (1x1 and 2x2 diagonal blocks,
/// every nonzero subdiagonal entry belongs to a 2x2 block with a complex
/// conjugate eigenvalue pair) and Z orthogonal.
struct SchurForm {
  DenseColMat t;
  DenseColMat z;

  Index order() const noexcept { return t.rows(); }
};

/// A diagonal block of a quasi-triangular matrix.
struct SchurBlock {
  Index start = 0;
  Index size = 1;
};

inline std::vector<SchurBlock> schur_blocks(const DenseColMat& T) {
  std::vector<SchurBlock> out;
  const Index n = T.rows();
  for (Index i = 0; i < n;) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      out.push_back({i, 2});
      i += 2;
    } else {
      out.push_back({i, 1});
      i += 1;
    }
  }
  return out;
}

/// Eigenvalues of a 2x2 block [a b; c d].
inline std::pair<Complex, Complex> eig2x2(double a, double b, double c, double d) {
  const double p = 0.5 * (a - d);
  const double disc = p * p + b * c;
  const double mid = 0.5 * (a + d);
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return {Complex(mid + s, 0.0), Complex(mid - s, 0.0)};
  }
  const double s = std::sqrt(-disc);
  return {Complex(mid, s), Complex(mid, -s)};
}

/// Eigenvalues in diagonal order (conjugate pairs: positive imaginary first).
inline std::vector<Complex> schur_eigenvalues(const DenseColMat& T) {
  std::vector<Complex> ev;
  ev.reserve(T.rows());
  for (const auto& b : schur_blocks(T)) {
    if (b.size == 1) {
      ev.emplace_back(T(b.start, b.start), 0.0);
    } else {
      const Index i = b.start;
      auto [l1, l2] = eig2x2(T(i, i), T(i, i + 1), T(i + 1, i), T(i + 1, i + 1));
      if (l1.imag() < l2.imag()) std::swap(l1, l2);
      ev.push_back(l1);
      ev.push_back(l2);
    }
  }
  return ev;
}

/// Eigenvalues sorted by a caller-supplied strict weak ordering.
template <class Less>
std::vector<Complex> sorted_eigenvalues(const SchurForm& s, Less less) {
  auto ev = schur_eigenvalues(s.t);
  std::stable_sort(ev.begin(), ev.end(), less);
  return ev;
}

/// Householder reduction A = Q H Q' to upper Hessenberg form.
struct HessenbergForm {
  DenseColMat h;
  DenseColMat q;
};

inline HessenbergForm hessenberg_reduce(const DenseColMat& A) {
  detail::require_dims(A.rows() == A.cols(), "hessenberg_reduce: matrix must be square");
  const Index n = A.rows();
  HessenbergForm f{A, DenseColMat::identity(n)};
  DenseColMat& H = f.h;
  std::vector<double> v(n), w(n);
  for (Index k = 0; k + 2 < n; ++k) {
    double ss = 0.0;
    for (Index i = k + 1; i < n; ++i) ss += H(i, k) * H(i, k);
    const double normx = std::sqrt(ss);
    if (normx == 0.0) continue;
    const double alpha = H(k + 1, k);
    const double beta = alpha >= 0.0 ? -normx : normx;
    std::fill(v.begin(), v.end(), 0.0);
    v[k + 1] = alpha - beta;
    for (Index i = k + 2; i < n; ++i) v[i] = H(i, k);
    double vv = 0.0;
    for (Index i = k + 1; i < n; ++i) vv += v[i] * v[i];
    const double tau = 2.0 / vv;
    // H <- (I - tau v v') H
    for (Index j = k; j < n; ++j) {
      double s = 0.0;
      for (Index i = k + 1; i < n; ++i) s += v[i] * H(i, j);
      s *= tau;
      for (Index i = k + 1; i < n; ++i) H(i, j) -= s * v[i];
    }
    // H <- H (I - tau v v')
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Index j = k + 1; j < n; ++j) s += H(i, j) * v[j];
      s *= tau;
      for (Index j = k + 1; j < n; ++j) H(i, j) -= s * v[j];
    }
    // Q <- Q (I - tau v v')
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Index j = k + 1; j < n; ++j) s += f.q(i, j) * v[j];
      s *= tau;
      for (Index j = k + 1; j < n; ++j) f.q(i, j) -= s * v[j];
    }
    H(k + 1, k) = beta;
    for (Index i = k + 2; i < n; ++i) H(i, k) = 0.0;
  }
  return f;
}

/// Real Schur form of an upper Hessenberg matrix by the Francis implicit
/// double-shift QR iteration (EISPACK hqr2 lineage), accumulating Z.
///
/// Exceptional shifts are taken after every 10 iterations without a
/// deflation. More than 30*n iterations in total raises IterationLimitError.
inline SchurForm hessenberg_real_schur(const DenseColMat& Hin) {
  detail::require_dims(Hin.rows() == Hin.cols(), "hessenberg_real_schur: matrix must be square");
  const Index N = Hin.rows();
  SchurForm out{Hin, DenseColMat::identity(N)};
  if (N == 0) return out;
  DenseColMat& H = out.t;
  DenseColMat& V = out.z;
  for (Index j = 0; j < N; ++j)
    for (Index i = j + 2; i < N; ++i) H(i, j) = 0.0;

  const double eps = std::numeric_limits<double>::epsilon();
  double norm = 0.0;
  for (Index i = 0; i < N; ++i)
    for (Index j = (i > 0 ? i - 1 : 0); j < N; ++j) norm += std::abs(H(i, j));

  long n = static_cast<long>(N) - 1;
  const long low = 0;
  const long high = static_cast<long>(N) - 1;
  const long nn = static_cast<long>(N);
  double exshift = 0.0;
  double p = 0, q = 0, r = 0, s = 0, z = 0, w, x, y;
  int iter = 0;
  long total_iter = 0;
  const long max_total = 30 * static_cast<long>(std::max<Index>(N, 1));
  auto h = [&H](long i, long j) -> double& { return H(static_cast<Index>(i), static_cast<Index>(j)); };
  auto v = [&V](long i, long j) -> double& { return V(static_cast<Index>(i), static_cast<Index>(j)); };

  while (n >= low) {
    long l = n;
    while (l > low) {
      s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
      if (s == 0.0) s = norm;
      if (std::abs(h(l, l - 1)) < eps * s) {
        h(l, l - 1) = 0.0;
        break;
      }
      l--;
    }

    if (l == n) {
      h(n, n) = h(n, n) + exshift;
      n--;
      iter = 0;
    } else if (l == n - 1) {
      w = h(n, n - 1) * h(n - 1, n);
      p = (h(n - 1, n - 1) - h(n, n)) / 2.0;
      q = p * p + w;
      z = std::sqrt(std::abs(q));
      h(n, n) = h(n, n) + exshift;
      h(n - 1, n - 1) = h(n - 1, n - 1) + exshift;
      x = h(n, n);
      if (q >= 0) {
        // real pair: rotate the block to upper triangular
        z = (p >= 0) ? p + z : p - z;
        x = h(n, n - 1);
        s = std::abs(x) + std::abs(z);
        p = x / s;
        q = z / s;
        r = std::sqrt(p * p + q * q);
        p = p / r;
        q = q / r;
        for (long j = n - 1; j < nn; j++) {
          z = h(n - 1, j);
          h(n - 1, j) = q * z + p * h(n, j);
          h(n, j) = q * h(n, j) - p * z;
        }
        for (long i = 0; i <= n; i++) {
          z = h(i, n - 1);
          h(i, n - 1) = q * z + p * h(i, n);
          h(i, n) = q * h(i, n) - p * z;
        }
        for (long i = low; i <= high; i++) {
          z = v(i, n - 1);
          v(i, n - 1) = q * z + p * v(i, n);
          v(i, n) = q * v(i, n) - p * z;
        }
        h(n, n - 1) = 0.0;
      }
      n = n - 2;
      iter = 0;
    } else {
      if (++total_iter > max_total)
        throw IterationLimitError("hessenberg_real_schur: no convergence after 30n iterations");
      x = h(n, n);
      y = 0.0;
      w = 0.0;
      if (l < n) {
        y = h(n - 1, n - 1);
        w = h(n, n - 1) * h(n - 1, n);
      }
      if (iter > 0 && iter % 20 == 10) {
        // Wilkinson's ad hoc shift
        exshift += x;
        for (long i = low; i <= n; i++) h(i, i) -= x;
        s = std::abs(h(n, n - 1)) + std::abs(h(n - 1, n - 2));
        x = y = 0.75 * s;
        w = -0.4375 * s * s;
      }
      if (iter > 0 && iter % 20 == 0) {
        s = (y - x) / 2.0;
        s = s * s + w;
        if (s > 0) {
          s = std::sqrt(s);
          if (y < x) s = -s;
          s = x - w / ((y - x) / 2.0 + s);
          for (long i = low; i <= n; i++) h(i, i) -= s;
          exshift += s;
          x = y = w = 0.964;
        }
      }
      iter++;

      // look for two consecutive small subdiagonal elements
      long m = n - 2;
      while (m >= l) {
        z = h(m, m);
        r = x - z;
        s = y - z;
        p = (r * s - w) / h(m + 1, m) + h(m, m + 1);
        q = h(m + 1, m + 1) - z - r - s;
        r = h(m + 2, m + 1);
        s = std::abs(p) + std::abs(q) + std::abs(r);
        p = p / s;
        q = q / s;
        r = r / s;
        if (m == l) break;
        if (std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r)) <
            eps * (std::abs(p) * (std::abs(h(m - 1, m - 1)) + std::abs(z) + std::abs(h(m + 1, m + 1)))))
          break;
        m--;
      }
      for (long i = m + 2; i <= n; i++) {
        h(i, i - 2) = 0.0;
        if (i > m + 2) h(i, i - 3) = 0.0;
      }

      // double QR step on rows l:n, columns m:n
      for (long k = m; k <= n - 1; k++) {
        const bool notlast = (k != n - 1);
        if (k != m) {
          p = h(k, k - 1);
          q = h(k + 1, k - 1);
          r = notlast ? h(k + 2, k - 1) : 0.0;
          x = std::abs(p) + std::abs(q) + std::abs(r);
          if (x == 0.0) continue;
          p = p / x;
          q = q / x;
          r = r / x;
        }
        s = std::sqrt(p * p + q * q + r * r);
        if (p < 0) s = -s;
        if (s != 0) {
          if (k != m)
            h(k, k - 1) = -s * x;
          else if (l != m)
            h(k, k - 1) = -h(k, k - 1);
          p = p + s;
          x = p / s;
          y = q / s;
          z = r / s;
          q = q / p;
          r = r / p;
          for (long j = k; j < nn; j++) {
            p = h(k, j) + q * h(k + 1, j);
            if (notlast) {
              p = p + r * h(k + 2, j);
              h(k + 2, j) = h(k + 2, j) - p * z;
            }
            h(k, j) = h(k, j) - p * x;
            h(k + 1, j) = h(k + 1, j) - p * y;
          }
          for (long i = 0; i <= std::min(n, k + 3); i++) {
            p = x * h(i, k) + y * h(i, k + 1);
            if (notlast) {
              p = p + z * h(i, k + 2);
              h(i, k + 2) = h(i, k + 2) - p * r;
            }
            h(i, k) = h(i, k) - p;
            h(i, k + 1) = h(i, k + 1) - p * q;
          }
          for (long i = low; i <= high; i++) {
            p = x * v(i, k) + y * v(i, k + 1);
            if (notlast) {
              p = p + z * v(i, k + 2);
              v(i, k + 2) = v(i, k + 2) - p * r;
            }
            v(i, k) = v(i, k) - p;
            v(i, k + 1) = v(i, k + 1) - p * q;
          }
        }
      }
    }
  }

  for (Index j = 0; j < N; ++j)
    for (Index i = j + 2; i < N; ++i) H(i, j) = 0.0;
  // Isolated nonzero subdiagonals can only come from 2x2 blocks; a chain
  // of two in a row would mean a stray entry, which the deflation test above
  // already zeroed.
  return out;
}

namespace detail {

/// Solves the small dense system M x = b (n <= 4) by Gaussian elimination
/// with complete pivoting; tiny pivots are replaced by smin.
inline std::vector<double> small_solve(std::vector<double> M, std::vector<double> b, Index n, double smin) {
  std::vector<Index> colperm(n);
  std::iota(colperm.begin(), colperm.end(), Index{0});
  auto at = [&M, n](Index i, Index j) -> double& { return M[j * n + i]; };
  for (Index k = 0; k < n; ++k) {
    Index pi = k, pj = k;
    double best = -1.0;
    for (Index i = k; i < n; ++i)
      for (Index j = k; j < n; ++j)
        if (std::abs(at(i, j)) > best) {
          best = std::abs(at(i, j));
          pi = i;
          pj = j;
        }
    if (pi != k) {
      for (Index j = 0; j < n; ++j) std::swap(at(k, j), at(pi, j));
      std::swap(b[k], b[pi]);
    }
    if (pj != k) {
      for (Index i = 0; i < n; ++i) std::swap(at(i, k), at(i, pj));
      std::swap(colperm[k], colperm[pj]);
    }
    if (std::abs(at(k, k)) < smin) at(k, k) = smin;
    for (Index i = k + 1; i < n; ++i) {
      const double f = at(i, k) / at(k, k);
      for (Index j = k; j < n; ++j) at(i, j) -= f * at(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<double> y(n);
  for (Index k = n; k-- > 0;) {
    double s = b[k];
    for (Index j = k + 1; j < n; ++j) s -= at(k, j) * y[j];
    y[k] = s / at(k, k);
  }
  std::vector<double> x(n);
  for (Index k = 0; k < n; ++k) x[colperm[k]] = y[k];
  return x;
}

inline double quasi_norm(const DenseColMat& T) {
  double m = 0.0;
  for (Index j = 0; j < T.cols(); ++j)
    for (Index i = 0; i < T.rows(); ++i) m = std::max(m, std::abs(T(i, j)));
  return m;
}

}  // namespace detail

/// Swaps the adjacent diagonal blocks of sizes p (at j) and q (at j+p) by an
/// orthogonal similarity, updating Z when given (direct swapping via the
/// Sylvester equation A11 X - X A22 = A12).
inline void schur_swap(DenseColMat& T, DenseColMat* Z, Index j, Index p, Index q) {
  const Index n = T.rows();
  const Index k = p + q;
  detail::require_dims(j + k <= n && p >= 1 && p <= 2 && q >= 1 && q <= 2, "schur_swap: bad block layout");
  const double eps = std::numeric_limits<double>::epsilon();
  const double smin = std::max(eps * detail::quasi_norm(T), std::numeric_limits<double>::min());

  // Kronecker system (I_q (x) A11 - A22' (x) I_p) vec X = vec A12
  const Index nk = p * q;
  std::vector<double> M(nk * nk, 0.0), rhs(nk);
  for (Index c = 0; c < q; ++c)
    for (Index r = 0; r < p; ++r) {
      const Index row = r + p * c;
      rhs[row] = T(j + r, j + p + c);
      for (Index r2 = 0; r2 < p; ++r2) M[(r2 + p * c) * nk + row] += T(j + r, j + r2);
      for (Index c2 = 0; c2 < q; ++c2) M[(r + p * c2) * nk + row] -= T(j + p + c2, j + p + c);
    }
  const auto X = detail::small_solve(M, rhs, nk, smin);

  // Orthogonal Q whose leading q columns span [-X; I_q], by Householder QR.
  DenseColMat G(k, q);
  for (Index c = 0; c < q; ++c) {
    for (Index r = 0; r < p; ++r) G(r, c) = -X[r + p * c];
    G(p + c, c) = 1.0;
  }
  DenseColMat Qs = DenseColMat::identity(k);
  for (Index c = 0; c < q; ++c) {
    double ss = 0.0;
    for (Index i = c; i < k; ++i) ss += G(i, c) * G(i, c);
    const double nx = std::sqrt(ss);
    if (nx == 0.0) continue;
    const double beta = G(c, c) >= 0.0 ? -nx : nx;
    std::vector<double> v(k, 0.0);
    v[c] = G(c, c) - beta;
    for (Index i = c + 1; i < k; ++i) v[i] = G(i, c);
    double vv = 0.0;
    for (Index i = c; i < k; ++i) vv += v[i] * v[i];
    if (vv == 0.0) continue;
    const double tau = 2.0 / vv;
    for (Index cc = c; cc < q; ++cc) {
      double s = 0.0;
      for (Index i = c; i < k; ++i) s += v[i] * G(i, cc);
      s *= tau;
      for (Index i = c; i < k; ++i) G(i, cc) -= s * v[i];
    }
    for (Index i = 0; i < k; ++i) {
      double s = 0.0;
      for (Index jj = c; jj < k; ++jj) s += Qs(i, jj) * v[jj];
      s *= tau;
      for (Index jj = c; jj < k; ++jj) Qs(i, jj) -= s * v[jj];
    }
  }

  // T <- Qs' T Qs on the affected rows/columns, Z <- Z Qs
  std::vector<double> tmp(k);
  for (Index c = j; c < n; ++c) {
    for (Index a = 0; a < k; ++a) {
      double s = 0.0;
      for (Index b = 0; b < k; ++b) s += Qs(b, a) * T(j + b, c);
      tmp[a] = s;
    }
    for (Index a = 0; a < k; ++a) T(j + a, c) = tmp[a];
  }
  for (Index r = 0; r < std::min(n, j + k); ++r) {
    for (Index a = 0; a < k; ++a) {
      double s = 0.0;
      for (Index b = 0; b < k; ++b) s += T(r, j + b) * Qs(b, a);
      tmp[a] = s;
    }
    for (Index a = 0; a < k; ++a) T(r, j + a) = tmp[a];
  }
  if (Z) {
    for (Index r = 0; r < Z->rows(); ++r) {
      for (Index a = 0; a < k; ++a) {
        double s = 0.0;
        for (Index b = 0; b < k; ++b) s += (*Z)(r, j + b) * Qs(b, a);
        tmp[a] = s;
      }
      for (Index a = 0; a < k; ++a) (*Z)(r, j + a) = tmp[a];
    }
  }
  // New layout: q x q block first, then p x p. Clear the coupling and any
  // fill below the blocks.
  for (Index c = j; c < j + q; ++c)
    for (Index r = j + q; r < j + k; ++r) T(r, c) = 0.0;
  for (Index c = j; c < j + k; ++c)
    for (Index r = c + 2; r < n; ++r) T(r, c) = 0.0;
}

/// Reorders the Schur form so blocks appear in increasing key order (stable).
/// keys holds one value per diagonal position; a 2x2 block uses the key at
/// its first row.
inline void reorder_schur(SchurForm& s, std::vector<double> keys) {
  const Index n = s.order();
  detail::require_dims(keys.size() == n, "reorder_schur: one key per diagonal position");
  struct B {
    Index size;
    double key;
  };
  std::vector<B> blocks;
  for (const auto& b : schur_blocks(s.t)) blocks.push_back({b.size, keys[b.start]});

  for (Index target = 0; target < blocks.size(); ++target) {
    Index best = target;
    for (Index i = target + 1; i < blocks.size(); ++i)
      if (blocks[i].key < blocks[best].key) best = i;
    // bubble block `best` up to position `target`
    for (Index i = best; i > target; --i) {
      Index start = 0;
      for (Index b = 0; b + 1 < i; ++b) start += blocks[b].size;
      schur_swap(s.t, &s.z, start, blocks[i - 1].size, blocks[i].size);
      std::swap(blocks[i - 1], blocks[i]);
    }
  }
}

/// Right eigenvector y of the quasi-triangular T for the block starting at k
/// (for a 2x2 block: the eigenvalue with positive imaginary part). Unit 2-norm.
inline std::vector<Complex> quasi_triangular_eigenvector(const DenseColMat& T, Index k) {
  const Index n = T.rows();
  const auto blocks = schur_blocks(T);
  const double eps = std::numeric_limits<double>::epsilon();
  const double smin = std::max(eps * detail::quasi_norm(T), std::numeric_limits<double>::min());
  std::vector<Complex> y(n, Complex(0.0));

  Index bi = 0;
  while (bi < blocks.size() && blocks[bi].start != k) ++bi;
  detail::require_dims(bi < blocks.size(), "quasi_triangular_eigenvector: k is not a block start");
  Complex lambda;
  if (blocks[bi].size == 1) {
    lambda = T(k, k);
    y[k] = 1.0;
  } else {
    const double a = T(k, k), b = T(k, k + 1), c = T(k + 1, k), d = T(k + 1, k + 1);
    auto [l1, l2] = eig2x2(a, b, c, d);
    lambda = l1.imag() >= l2.imag() ? l1 : l2;
    if (std::abs(b) >= std::abs(c)) {
      y[k] = b;
      y[k + 1] = lambda - a;
    } else {
      y[k] = lambda - d;
      y[k + 1] = c;
    }
  }

  for (Index bb = bi; bb-- > 0;) {
    const Index i = blocks[bb].start;
    const Index top = blocks[bi].start + blocks[bi].size;
    if (blocks[bb].size == 1) {
      Complex rhs = 0.0;
      for (Index j = i + 1; j < top; ++j) rhs -= T(i, j) * y[j];
      Complex den = T(i, i) - lambda;
      if (std::abs(den) < smin) den = smin;
      y[i] = rhs / den;
    } else {
      Complex r0 = 0.0, r1 = 0.0;
      for (Index j = i + 2; j < top; ++j) {
        r0 -= T(i, j) * y[j];
        r1 -= T(i + 1, j) * y[j];
      }
      const Complex a = T(i, i) - lambda, b = T(i, i + 1), c = T(i + 1, i), d = T(i + 1, i + 1) - lambda;
      Complex det = a * d - b * c;
      if (std::abs(det) < smin) det = smin;
      y[i] = (d * r0 - b * r1) / det;
      y[i + 1] = (a * r1 - c * r0) / det;
    }
  }
  double nrm = 0.0;
  for (const auto& v : y) nrm += std::norm(v);
  nrm = std::sqrt(nrm);
  for (auto& v : y) v /= nrm;
  return y;
}

/// u with T' u = lambda u for the block starting at k, i.e. the conjugate of
/// the left eigenvector of T. Unit 2-norm.
inline std::vector<Complex> quasi_triangular_left_eigenvector(const DenseColMat& T, Index k) {
  const Index n = T.rows();
  const auto blocks = schur_blocks(T);
  const double eps = std::numeric_limits<double>::epsilon();
  const double smin = std::max(eps * detail::quasi_norm(T), std::numeric_limits<double>::min());
  std::vector<Complex> u(n, Complex(0.0));

  Index bi = 0;
  while (bi < blocks.size() && blocks[bi].start != k) ++bi;
  detail::require_dims(bi < blocks.size(), "quasi_triangular_left_eigenvector: k is not a block start");
  Complex lambda;
  if (blocks[bi].size == 1) {
    lambda = T(k, k);
    u[k] = 1.0;
  } else {
    // transpose block [a c; b d]
    const double a = T(k, k), b = T(k, k + 1), c = T(k + 1, k), d = T(k + 1, k + 1);
    auto [l1, l2] = eig2x2(a, b, c, d);
    lambda = l1.imag() >= l2.imag() ? l1 : l2;
    if (std::abs(c) >= std::abs(b)) {
      u[k] = c;
      u[k + 1] = lambda - a;
    } else {
      u[k] = lambda - d;
      u[k + 1] = b;
    }
  }
  const Index first = blocks[bi].start;
  for (Index bb = bi + 1; bb < blocks.size(); ++bb) {
    const Index i = blocks[bb].start;
    if (blocks[bb].size == 1) {
      Complex rhs = 0.0;
      for (Index j = first; j < i; ++j) rhs -= T(j, i) * u[j];
      Complex den = T(i, i) - lambda;
      if (std::abs(den) < smin) den = smin;
      u[i] = rhs / den;
    } else {
      Complex r0 = 0.0, r1 = 0.0;
      for (Index j = first; j < i; ++j) {
        r0 -= T(j, i) * u[j];
        r1 -= T(j, i + 1) * u[j];
      }
      // transposed 2x2 system
      const Complex a = T(i, i) - lambda, b = T(i + 1, i), c = T(i, i + 1), d = T(i + 1, i + 1) - lambda;
      Complex det = a * d - b * c;
      if (std::abs(det) < smin) det = smin;
      u[i] = (d * r0 - b * r1) / det;
      u[i + 1] = (a * r1 - c * r0) / det;
    }
  }
  double nrm = 0.0;
  for (const auto& v : u) nrm += std::norm(v);
  nrm = std::sqrt(nrm);
  for (auto& v : u) v /= nrm;
  return u;
}

/// Eigenvalues of a general dense square matrix (Hessenberg reduction + real
/// Schur), in Schur diagonal order.
inline std::vector<Complex> dense_eigenvalues(const DenseColMat& A) {
  return schur_eigenvalues(hessenberg_real_schur(hessenberg_reduce(A).h).t);
}

/// Full real Schur decomposition of a general dense matrix: A = Z T Z'.
inline SchurForm dense_real_schur(const DenseColMat& A) {
  auto hf = hessenberg_reduce(A);
  auto sf = hessenberg_real_schur(hf.h);
  sf.z = matmul(hf.q, sf.z);
  return sf;
}

}  // namespace kls
