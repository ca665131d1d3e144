#include <catch_amalgamated.hpp>

#include <cmath>

#include "kls/core/band_lu.hpp"
#include "kls/core/dense.hpp"
#include "kls/core/householder.hpp"
#include "kls/core/kernels.hpp"
#include "kls/core/random.hpp"
#include "kls/core/svd.hpp"
#include "kls/operator.hpp"
#include "kls/problems.hpp"

using namespace kls;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double max_abs_diff(const DenseColMat& A, const DenseColMat& B) {
  double d = 0.0;
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i) d = std::max(d, std::abs(A(i, j) - B(i, j)));
  return d;
}

// Plain triple loop, independent of the blocked kernels.
DenseColMat naive_product(const DenseColMat& A, const DenseColMat& B, bool transpose_a) {
  const Index r = transpose_a ? A.cols() : A.rows();
  const Index inner = transpose_a ? A.rows() : A.cols();
  DenseColMat C(r, B.cols());
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < B.cols(); ++j) {
      long double s = 0;
      for (Index k = 0; k < inner; ++k) s += (long double)(transpose_a ? A(k, i) : A(i, k)) * B(k, j);
      C(i, j) = static_cast<double>(s);
    }
  return C;
}

}  // namespace

TEST_CASE("dense matrix basics", "[dense]") {
  const auto A = DenseColMat::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(A.rows() == 2);
  CHECK(A.cols() == 3);
  CHECK(A(1, 2) == 6.0);
  const auto T = A.transpose();
  CHECK(T(2, 1) == 6.0);
  CHECK_THAT(A.frobenius_norm(), WithinRel(std::sqrt(91.0), 1e-15));
  auto B = A;
  B.append_col(std::vector<double>{7, 8});
  CHECK(B.cols() == 4);
  CHECK(B(1, 3) == 8.0);
  CHECK_THROWS_AS(B.append_col(std::vector<double>{1, 2, 3}), DimensionError);
  const auto I = DenseColMat::identity(3);
  CHECK(I(0, 0) == 1.0);
  CHECK(I(0, 1) == 0.0);
}

TEST_CASE("products agree with a naive oracle", "[dense]") {
  Rng rng(3);
  const auto A = rng.normal_matrix(37, 11);
  const auto B = rng.normal_matrix(11, 5);
  const auto C = rng.normal_matrix(37, 5);
  CHECK(max_abs_diff(matmul(A.view(), B.view()), naive_product(A, B, false)) < 1e-13);
  CHECK(max_abs_diff(matmul_tn(A.view(), C.view()), naive_product(A, C, true)) < 1e-13);
  CHECK_THROWS_AS(matmul(A.view(), C.view()), DimensionError);
}

TEST_CASE("upper triangular storage", "[dense]") {
  UpperTri R;
  R.append_col(std::vector<double>{2});
  R.append_col(std::vector<double>{1, 3});
  CHECK(R.order() == 2);
  CHECK(R(0, 1) == 1.0);
  CHECK(R(1, 0) == 0.0);
  CHECK_THROWS_AS(R.append_col(std::vector<double>{1}), DimensionError);
  CHECK_THROWS_AS(R.at(1, 0), DimensionError);
  CHECK(R.dense()(1, 1) == 3.0);
}

TEST_CASE("kernels", "[kernels]") {
  const Vector x{3, 4};
  CHECK(norm2(x) == 5.0);
  CHECK(dot(x, x) == 25.0);
  CHECK_THROWS_AS(dot(x, Vector{1, 2, 3}), DimensionError);

  Rng rng(5);
  const auto Q = rng.normal_matrix(20, 4);
  const auto Y = rng.normal_matrix(20, 2);
  const auto G = mv_trans_mv(Q.view(), Y.view());
  CHECK(max_abs_diff(G, naive_product(Q, Y, true)) < 1e-13);

  // y <- scale*y + sign*Q*s
  Vector y(Y.col(0));
  const Vector s{1, -2, 0.5, 3};
  mv_times_mat_add_mv(y.span(), Q.view(), s, -1.0, 2.0);
  for (Index i = 0; i < 20; ++i) {
    double ref = 2.0 * Y(i, 0);
    for (Index k = 0; k < 4; ++k) ref -= Q(i, k) * s[k];
    CHECK_THAT(y[i], WithinAbs(ref, 1e-13));
  }
}

TEST_CASE("Householder QR reproduces A with orthonormal Q and positive diagonal", "[householder]") {
  Rng rng(7);
  const auto A = rng.normal_matrix(30, 8);
  const auto f = householder_qr(A);
  const auto Q = f.q();
  CHECK(max_abs_diff(matmul_tn(Q.view(), Q.view()), DenseColMat::identity(8)) < 1e-14);
  CHECK(max_abs_diff(matmul(Q.view(), f.r().dense().view()), A) < 1e-13);
  for (Index j = 0; j < 8; ++j) CHECK(f.r()(j, j) > 0.0);
  const auto full = f.q(30);
  CHECK(max_abs_diff(matmul_tn(full.view(), full.view()), DenseColMat::identity(30)) < 1e-14);
}

TEST_CASE("random_orthogonal is orthonormal and seeded", "[random]") {
  const auto Q = random_orthogonal(40, 6, 11);
  CHECK(max_abs_diff(matmul_tn(Q.view(), Q.view()), DenseColMat::identity(6)) < 1e-14);
  CHECK(max_abs_diff(Q, random_orthogonal(40, 6, 11)) == 0.0);
  CHECK(max_abs_diff(Q, random_orthogonal(40, 6, 12)) > 0.1);
  CHECK_THROWS_AS(random_orthogonal(3, 4, 1), DimensionError);
}

TEST_CASE("singular values of U diag(s) V'", "[svd]") {
  const std::vector<double> s{10.0, 3.0, 1.0, 1e-3, 1e-9};
  const auto U = random_orthogonal(12, 5, 1);
  const auto V = random_orthogonal(5, 5, 2);
  DenseColMat US = U;
  for (Index j = 0; j < 5; ++j)
    for (Index i = 0; i < 12; ++i) US(i, j) *= s[j];
  const auto A = matmul(US.view(), V.transpose().view());
  const auto sv = singular_values(A);
  REQUIRE(sv.size() == 5);
  for (Index j = 0; j < 5; ++j) CHECK_THAT(sv[j], WithinAbs(s[j], 1e-14 * s[0]));
  CHECK_THAT(sv[3], WithinRel(1e-3, 1e-10));
  CHECK_THAT(condition_number(DenseColMat::from_rows({{2, 0}, {0, 0.5}})), WithinRel(4.0, 1e-15));
}

TEST_CASE("banded LU solves and transposed solves", "[band_lu]") {
  const auto A = manteuffel_build(ManteuffelSpec{6});
  const BandLU lu(A);
  Rng rng(9);
  const Vector x = rng.normal_vector(A.rows());
  Vector b(A.rows()), bt(A.rows());
  A.apply(x, b);
  A.apply_transpose(x, bt);
  lu.solve(b);
  lu.solve_transpose(bt);
  for (Index i = 0; i < x.size(); ++i) {
    CHECK_THAT(b[i], WithinAbs(x[i], 1e-12));
    CHECK_THAT(bt[i], WithinAbs(x[i], 1e-12));
  }
  const auto singular = CsrMatrix::from_dense(DenseColMat::from_rows({{1, 2}, {2, 4}}));
  CHECK_THROWS_AS(BandLU(singular), BreakdownError);
}

TEST_CASE("CSR matrix", "[operator]") {
  const auto A = CsrMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {0, 0, 2.0}, {2, 1, -1.0}, {1, 2, 4.0}});
  CHECK(A.nnz() == 3);
  CHECK(A.at(0, 0) == 3.0);
  CHECK(A.at(1, 1) == 0.0);
  CHECK(A.transpose().at(1, 2) == -1.0);
  CHECK_THAT(*A.exact_frobenius_norm(), WithinRel(std::sqrt(26.0), 1e-15));
  Vector y(3);
  A.apply(Vector{1, 1, 1}, y);
  CHECK(y == Vector{3, 4, -1});
  const auto [kl, ku] = A.bandwidth();
  CHECK(kl == 1);
  CHECK(ku == 1);
  CHECK(CsrMatrix::from_dense(A.to_dense()) == A);
  CHECK_THROWS_AS(CsrMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), DimensionError);
}

TEST_CASE("sampled Frobenius norm of a matrix-free operator", "[operator]") {
  const auto L = laplace3d(4, 3, 2);
  const auto dense = assemble_dense(L);
  const double sampled = operator_frobenius_norm(L, 1000);
  CHECK_THAT(sampled, WithinRel(dense.frobenius_norm(), 1e-12));
}
