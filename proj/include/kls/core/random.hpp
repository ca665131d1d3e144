#pragma once

#include <cstdint>
#include <random>

#include "kls/core/dense.hpp"
#include "kls/core/householder.hpp"

namespace kls {

/// Seeded Gaussian source. Same seed, same stream (for a given standard
/// library), which is all the reproducibility the experiments need.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }

  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  DenseColMat normal_matrix(Index m, Index n) {
    DenseColMat A(m, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) A(i, j) = normal();
    return A;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// m x n matrix with orthonormal columns (Haar-distributed: Q of a Gaussian
/// matrix with R's diagonal made positive).
inline DenseColMat random_orthogonal(Index m, Index n, std::uint64_t seed) {
  detail::require_dims(m >= n, "random_orthogonal: requires m >= n");
  Rng rng(seed);
  return householder_qr(rng.normal_matrix(m, n)).q(n);
}

}  // namespace kls
