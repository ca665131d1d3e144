#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "kls/core/dense.hpp"
#include "kls/core/error.hpp"
#include "kls/core/random.hpp"
#include "kls/operator.hpp"

namespace kls {

/// Convection-diffusion test operator on a k x k grid (m = k^2):
/// A = (1/h^2) M + (beta/(2h)) N, M the 5-point Laplacian, N the centered
/// first difference in both directions.
struct ManteuffelSpec {
  Index k = 1;
  double beta = 0.5;
  std::optional<double> length{};  ///< domain length L; default k+1

  double domain_length() const { return length.value_or(static_cast<double>(k + 1)); }
  double h() const { return domain_length() / static_cast<double>(k + 1); }
  Index order() const { return k * k; }
};

/// The symmetric part M (unscaled) and the skew part N (unscaled).
inline std::pair<CsrMatrix, CsrMatrix> manteuffel_parts(const ManteuffelSpec& s) {
  detail::require_dims(s.k >= 1, "manteuffel: k must be >= 1");
  const Index k = s.k, m = k * k;
  std::vector<std::tuple<Index, Index, double>> tm, tn;
  auto id = [k](Index i, Index j) { return i + k * j; };
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) {
      const Index r = id(i, j);
      tm.emplace_back(r, r, 4.0);
      if (i > 0) {
        tm.emplace_back(r, id(i - 1, j), -1.0);
        tn.emplace_back(r, id(i - 1, j), -1.0);
      }
      if (i + 1 < k) {
        tm.emplace_back(r, id(i + 1, j), -1.0);
        tn.emplace_back(r, id(i + 1, j), 1.0);
      }
      if (j > 0) {
        tm.emplace_back(r, id(i, j - 1), -1.0);
        tn.emplace_back(r, id(i, j - 1), -1.0);
      }
      if (j + 1 < k) {
        tm.emplace_back(r, id(i, j + 1), -1.0);
        tn.emplace_back(r, id(i, j + 1), 1.0);
      }
    }
  return {CsrMatrix::from_triplets(m, m, std::move(tm)), CsrMatrix::from_triplets(m, m, std::move(tn))};
}

inline CsrMatrix manteuffel_build(const ManteuffelSpec& s) {
  auto [M, N] = manteuffel_parts(s);
  const double h = s.h();
  const double cm = 1.0 / (h * h), cn = s.beta / (2.0 * h);
  std::vector<std::tuple<Index, Index, double>> t;
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index p = M.offsets()[i]; p < M.offsets()[i + 1]; ++p) t.emplace_back(i, M.indices()[p], cm * M.values()[p]);
    for (Index p = N.offsets()[i]; p < N.offsets()[i + 1]; ++p) t.emplace_back(i, N.indices()[p], cn * N.values()[p]);
  }
  return CsrMatrix::from_triplets(M.rows(), M.cols(), std::move(t));
}

/// Closed-form spectrum, one value per (l, j) in 1..k x 1..k (so repeated
/// values appear with their multiplicity). Complex when beta*h/2 > 1.
inline std::vector<std::complex<double>> manteuffel_eigenvalues(const ManteuffelSpec& s) {
  const Index k = s.k;
  const double h = s.h();
  const double pi = std::numbers::pi;
  const std::complex<double> rad = std::sqrt(std::complex<double>(1.0 - std::pow(s.beta * h / 2.0, 2), 0.0));
  std::vector<std::complex<double>> ev;
  ev.reserve(k * k);
  for (Index l = 1; l <= k; ++l)
    for (Index j = 1; j <= k; ++j) {
      const double c = std::cos(static_cast<double>(l) * pi / static_cast<double>(k + 1)) +
                       std::cos(static_cast<double>(j) * pi / static_cast<double>(k + 1));
      ev.push_back((2.0 / (h * h)) * (2.0 - rad * c));
    }
  return ev;
}

/// Distinct values with multiplicities; values closer than tol (relative to
/// max(1, |value|)) are merged.
struct ValueMultiplicity {
  std::complex<double> value;
  Index multiplicity = 0;
};

inline std::vector<ValueMultiplicity> multiplicity_map(std::vector<std::complex<double>> values, double tol = 1e-10) {
  std::sort(values.begin(), values.end(), [](auto a, auto b) {
    return std::make_pair(a.real(), a.imag()) < std::make_pair(b.real(), b.imag());
  });
  std::vector<ValueMultiplicity> out;
  for (const auto& v : values) {
    bool merged = false;
    for (auto& e : out)
      if (std::abs(e.value - v) <= tol * std::max(1.0, std::abs(v))) {
        ++e.multiplicity;
        merged = true;
        break;
      }
    if (!merged) out.push_back({v, 1});
  }
  return out;
}

/// Matrix-free 7-point Dirichlet Laplacian on an nx x ny x nz grid.
class Laplace3D final : public LinearOperator {
 public:
  Laplace3D(Index nx, Index ny, Index nz) : nx_(nx), ny_(ny), nz_(nz) {
    detail::require_dims(nx >= 1 && ny >= 1 && nz >= 1, "laplace3d: dims must be >= 1");
  }

  Index rows() const override { return nx_ * ny_ * nz_; }
  Index cols() const override { return rows(); }

  void apply(std::span<const double> x, std::span<double> y) const override {
    const Index sx = 1, sy = nx_, sz = nx_ * ny_;
    for (Index k = 0; k < nz_; ++k)
      for (Index j = 0; j < ny_; ++j)
        for (Index i = 0; i < nx_; ++i) {
          const Index r = i * sx + j * sy + k * sz;
          double s = 6.0 * x[r];
          if (i > 0) s -= x[r - sx];
          if (i + 1 < nx_) s -= x[r + sx];
          if (j > 0) s -= x[r - sy];
          if (j + 1 < ny_) s -= x[r + sy];
          if (k > 0) s -= x[r - sz];
          if (k + 1 < nz_) s -= x[r + sz];
          y[r] = s;
        }
  }
  void apply_transpose(std::span<const double> x, std::span<double> y) const override { apply(x, y); }

  CsrMatrix assemble() const {
    std::vector<std::tuple<Index, Index, double>> t;
    const Index sy = nx_, sz = nx_ * ny_;
    for (Index k = 0; k < nz_; ++k)
      for (Index j = 0; j < ny_; ++j)
        for (Index i = 0; i < nx_; ++i) {
          const Index r = i + j * sy + k * sz;
          t.emplace_back(r, r, 6.0);
          if (i > 0) t.emplace_back(r, r - 1, -1.0);
          if (i + 1 < nx_) t.emplace_back(r, r + 1, -1.0);
          if (j > 0) t.emplace_back(r, r - sy, -1.0);
          if (j + 1 < ny_) t.emplace_back(r, r + sy, -1.0);
          if (k > 0) t.emplace_back(r, r - sz, -1.0);
          if (k + 1 < nz_) t.emplace_back(r, r + sz, -1.0);
        }
    return CsrMatrix::from_triplets(rows(), cols(), std::move(t));
  }

 private:
  Index nx_, ny_, nz_;
};

inline Laplace3D laplace3d(Index nx, Index ny, Index nz) { return Laplace3D(nx, ny, nz); }

/// Assembled 5-point Dirichlet Laplacian on an nx x ny grid.
inline CsrMatrix laplace2d(Index nx, Index ny) {
  std::vector<std::tuple<Index, Index, double>> t;
  for (Index j = 0; j < ny; ++j)
    for (Index i = 0; i < nx; ++i) {
      const Index r = i + j * nx;
      t.emplace_back(r, r, 4.0);
      if (i > 0) t.emplace_back(r, r - 1, -1.0);
      if (i + 1 < nx) t.emplace_back(r, r + 1, -1.0);
      if (j > 0) t.emplace_back(r, r - nx, -1.0);
      if (j + 1 < ny) t.emplace_back(r, r + nx, -1.0);
    }
  return CsrMatrix::from_triplets(nx * ny, nx * ny, std::move(t));
}

/// U diag(sigma) V' with sigma log-spaced from 1 down to 1/kappa.
inline DenseColMat synthetic_kappa(Index m, Index n, double kappa, std::uint64_t seed) {
  detail::require_dims(kappa >= 1.0 && m >= n && n >= 1, "synthetic_kappa: need kappa >= 1, m >= n >= 1");
  const DenseColMat U = random_orthogonal(m, n, seed);
  const DenseColMat V = random_orthogonal(n, n, seed ^ 0x9e3779b97f4a7c15ull);
  DenseColMat US = U;
  for (Index j = 0; j < n; ++j) {
    const double t = n > 1 ? static_cast<double>(j) / static_cast<double>(n - 1) : 0.0;
    const double sigma = std::pow(kappa, -t);
    for (Index i = 0; i < m; ++i) US(i, j) *= sigma;
  }
  return matmul(US, V.transpose());
}

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '%') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace detail

/// Reads a real coordinate Matrix Market file (general, symmetric or
/// skew-symmetric). Symmetric storage is expanded; indices become 0-based.
inline CsrMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty input");
  ++lineno;
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw ParseError(lineno, "missing %%MatrixMarket banner");
  object = detail::lower(object);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (object != "matrix") throw ParseError(lineno, "object must be 'matrix'");
  if (format != "coordinate") throw ParseError(lineno, "only coordinate format is supported");
  if (field != "real") throw ParseError(lineno, "field '" + field + "' is not supported (real only)");
  const bool sym = symmetry == "symmetric";
  const bool skew = symmetry == "skew-symmetric";
  if (!sym && !skew && symmetry != "general") throw ParseError(lineno, "unsupported symmetry '" + symmetry + "'");

  long long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank_or_comment(line)) continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
      throw ParseError(lineno, "malformed size line");
    std::string extra;
    if (ss >> extra) throw ParseError(lineno, "trailing data on size line");
    break;
  }
  if (rows < 0) throw ParseError(lineno, "missing size line");
  if ((sym || skew) && rows != cols) throw ParseError(lineno, "symmetric storage requires a square matrix");

  std::vector<std::tuple<Index, Index, double>> t;
  t.reserve(static_cast<std::size_t>(nnz) * ((sym || skew) ? 2 : 1));
  long long seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank_or_comment(line)) continue;
    if (seen == nnz) throw ParseError(lineno, "more entries than declared");
    std::istringstream ss(line);
    long long i, j;
    double v;
    if (!(ss >> i >> j >> v)) throw ParseError(lineno, "malformed entry (expected 'row col value')");
    std::string extra;
    if (ss >> extra) throw ParseError(lineno, "trailing data on entry line");
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError(lineno, "index out of bounds");
    if (!std::isfinite(v)) throw ParseError(lineno, "non-finite value");
    const Index r = static_cast<Index>(i - 1), c = static_cast<Index>(j - 1);
    if ((sym || skew) && c > r) throw ParseError(lineno, "entry above the diagonal in symmetric storage");
    if (skew && c == r) throw ParseError(lineno, "diagonal entry in skew-symmetric storage");
    t.emplace_back(r, c, v);
    if ((sym || skew) && r != c) t.emplace_back(c, r, skew ? -v : v);
    ++seen;
  }
  if (seen != nnz) throw ParseError(lineno, "fewer entries than declared");
  return CsrMatrix::from_triplets(static_cast<Index>(rows), static_cast<Index>(cols), std::move(t));
}

/// Writes A as a real general coordinate file with round-trip precision.
inline void write_matrix_market(std::ostream& os, const CsrMatrix& A) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
  os << std::setprecision(17);
  for (Index i = 0; i < A.rows(); ++i)
    for (Index p = A.offsets()[i]; p < A.offsets()[i + 1]; ++p)
      os << (i + 1) << ' ' << (A.indices()[p] + 1) << ' ' << A.values()[p] << '\n';
}

}  // namespace kls
