#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kls/core/dense.hpp"
#include "kls/core/error.hpp"

namespace kls {

/// Singular values (descending) by one-sided Jacobi rotations. Accurate to
/// high relative precision; meant for the modest orders of diagnostics and
/// test oracles.
inline std::vector<double> singular_values(DenseColMat M, int max_sweeps = 60) {
  if (M.rows() < M.cols()) M = M.transpose();
  const Index n = M.cols(), m = M.rows();
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Index i = 0; i + 1 < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        double a = 0.0, b = 0.0, g = 0.0;
        const double* x = M.col(i).data();
        const double* y = M.col(j).data();
        for (Index r = 0; r < m; ++r) {
          a += x[r] * x[r];
          b += y[r] * y[r];
          g += x[r] * y[r];
        }
        if (g == 0.0 || std::abs(g) <= eps * std::sqrt(a * b)) continue;
        rotated = true;
        const double zeta = (b - a) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
        double* xm = M.col(i).data();
        double* ym = M.col(j).data();
        for (Index r = 0; r < m; ++r) {
          const double xv = xm[r], yv = ym[r];
          xm[r] = c * xv - s * yv;
          ym[r] = s * xv + c * yv;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> sv(n);
  for (Index j = 0; j < n; ++j) {
    double s = 0.0;
    for (double v : M.col(j)) s += v * v;
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

/// 2-norm condition number sigma_max / sigma_min (infinity if singular).
inline double condition_number(const DenseColMat& M) {
  const auto sv = singular_values(M);
  if (sv.empty()) return 1.0;
  return sv.back() > 0.0 ? sv.front() / sv.back() : std::numeric_limits<double>::infinity();
}

}  // namespace kls
