/* Copyright 2026 The wcnorm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "wcnorm/linalg.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wcnorm/errors.hpp"

namespace wcnorm {
namespace {

using testing::naive_covariance;
using testing::naive_matmul;
using testing::naive_transpose;
using testing::random_mat;
using testing::random_pd;

void ExpectMatNear(const Mat& a, const Mat& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      EXPECT_NEAR(a(i, j), b(i, j), tol) << "at (" << i << ", " << j << ")";
    }
  }
}

TEST(MatTest, ConstructorRejectsWrongDataLength) {
  EXPECT_THROW(Mat(2, 2, std::vector<double>{1.0, 2.0, 3.0}), ShapeError);
}

TEST(MatTest, MatmulMatchesTripleLoop) {
  const Mat a = random_mat(5, 7, 1);
  const Mat b = random_mat(7, 3, 2);
  ExpectMatNear(matmul(a, b), naive_matmul(a, b), 1e-12);
  ExpectMatNear(matmul_tn(naive_transpose(a), b), naive_matmul(a, b), 1e-12);
  ExpectMatNear(matmul_nt(a, naive_transpose(b)), naive_matmul(a, b), 1e-12);
}

TEST(MatTest, MatmulRejectsMismatchedShapes) {
  EXPECT_THROW(matmul(Mat(2, 3), Mat(2, 3)), ShapeError);
}

TEST(EmpiricalCovarianceTest, TwoOppositePoints) {
  const Mat x = Mat::from_rows({{1, -1}, {1, -1}});
  ExpectMatNear(empirical_covariance(x, Vec{0, 0}), Mat::from_rows({{2, 2}, {2, 2}}), 0.0);
}

TEST(EmpiricalCovarianceTest, ConstantColumnsGiveZero) {
  const Mat x = Mat::from_rows({{3, 3, 3}, {-1, -1, -1}});
  ExpectMatNear(empirical_covariance(x, Vec{3, -1}), Mat(2, 2), 0.0);
}

TEST(EmpiricalCovarianceTest, MatchesPairwiseOracle) {
  const Mat x = random_mat(4, 64, 3);
  ExpectMatNear(empirical_covariance(x, row_means(x)), naive_covariance(x), 1e-12);
}

TEST(EmpiricalCovarianceTest, ExactlySymmetric) {
  const Mat x = testing::correlated_batch(6, 33, 4);
  const Mat c = empirical_covariance(x, row_means(x));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(c(i, j), c(j, i));
  }
}

TEST(EmpiricalCovarianceTest, SingleSampleIsDegenerate) {
  EXPECT_THROW(empirical_covariance(Mat(2, 1), Vec{0, 0}), DegenerateBatch);
}

TEST(ShrinkTest, Examples) {
  const Mat s = Mat::from_rows({{2, 0}, {0, 0}});
  ExpectMatNear(shrink(s, 0.5), Mat::from_rows({{1.5, 0}, {0, 0.5}}), 0.0);
  ExpectMatNear(shrink(random_pd(3, 5), 1.0), Mat::identity(3), 0.0);
  const Mat p = random_pd(3, 6);
  EXPECT_EQ(shrink(p, 0.0), p);
}

TEST(ShrinkTest, RejectsEpsOutsideUnitInterval) {
  EXPECT_THROW(shrink(Mat::identity(2), -0.1), InvalidParameter);
  EXPECT_THROW(shrink(Mat::identity(2), 1.5), InvalidParameter);
}

TEST(CholeskyTest, TwoByTwo) {
  const LowerTriangular l = cholesky(Mat::from_rows({{4, 2}, {2, 3}}));
  EXPECT_NEAR(l(0, 0), 2.0, 1e-15);
  EXPECT_EQ(l(0, 1), 0.0);
  EXPECT_NEAR(l(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(l(1, 1), std::sqrt(2.0), 1e-15);
  ExpectMatNear(naive_matmul(l.mat(), naive_transpose(l.mat())),
                Mat::from_rows({{4, 2}, {2, 3}}), 1e-14);
}

TEST(CholeskyTest, IdentityIsFixed) {
  EXPECT_EQ(cholesky(Mat::identity(4)).mat(), Mat::identity(4));
}

TEST(CholeskyTest, IndefiniteReportsPivot) {
  try {
    cholesky(Mat::from_rows({{1, 2}, {2, 1}}));
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.pivot(), 1u);
  }
}

TEST(CholeskyTest, ReconstructsRandomPdAndIsDeterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Mat s = random_pd(1 + seed % 12, 100 + seed);
    const LowerTriangular l = cholesky(s);
    EXPECT_LE(testing::rel_frobenius(naive_matmul(l.mat(), naive_transpose(l.mat())), s),
              1e-12);
    for (std::size_t i = 0; i < l.dim(); ++i) {
      EXPECT_GT(l(i, i), 0.0);
      for (std::size_t j = i + 1; j < l.dim(); ++j) EXPECT_EQ(l(i, j), 0.0);
    }
    EXPECT_EQ(cholesky(s), l);
  }
}

TEST(InvertLowerTriangularTest, Examples) {
  const Mat w = invert_lower_triangular(cholesky(Mat::from_rows({{4, 2}, {2, 3}})));
  ExpectMatNear(w, Mat::from_rows({{0.5, 0}, {-0.35355339, 0.70710678}}), 1e-8);
  EXPECT_EQ(invert_lower_triangular(Mat::identity(3)), Mat::identity(3));
  ExpectMatNear(invert_lower_triangular(Mat::from_rows({{2, 0}, {0, 4}})),
                Mat::from_rows({{0.5, 0}, {0, 0.25}}), 0.0);
}

TEST(InvertLowerTriangularTest, ProductIsIdentity) {
  const LowerTriangular l = cholesky(random_pd(9, 7));
  const Mat w = invert_lower_triangular(l);
  ExpectMatNear(naive_matmul(w, l.mat()), Mat::identity(9), 1e-12);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = i + 1; j < 9; ++j) EXPECT_EQ(w(i, j), 0.0);
  }
}

TEST(InvertLowerTriangularTest, ZeroDiagonalIsSingular) {
  try {
    invert_lower_triangular(Mat::from_rows({{1, 0}, {3, 0}}));
    FAIL() << "expected SingularMatrix";
  } catch (const SingularMatrix& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(EigenTest, DiagonalInput) {
  const EigenDecomposition e = symmetric_eigendecomposition(Mat::from_rows({{1, 0}, {0, 3}}));
  EXPECT_NEAR(e.values[0], 3.0, 1e-15);
  EXPECT_NEAR(e.values[1], 1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(0, 1)), 1.0, 1e-15);
}

TEST(EigenTest, TwoByTwoCoupled) {
  const Mat s = Mat::from_rows({{2, 1}, {1, 2}});
  const EigenDecomposition e = symmetric_eigendecomposition(s);
  EXPECT_NEAR(e.values[0], 3.0, 1e-12);
  EXPECT_NEAR(e.values[1], 1.0, 1e-12);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), r, 1e-12);
  EXPECT_NEAR(e.vectors(0, 0), e.vectors(1, 0), 1e-12);
  EXPECT_NEAR(e.vectors(0, 1), -e.vectors(1, 1), 1e-12);
}

TEST(EigenTest, IdentityHasUnitEigenvalues) {
  const EigenDecomposition e = symmetric_eigendecomposition(Mat::identity(5));
  for (double v : e.values) EXPECT_EQ(v, 1.0);
}

TEST(EigenTest, ReconstructionOrthogonalityAndOrder) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t d = 2 + 3 * seed;
    const Mat s = random_pd(d, 200 + seed);
    const EigenDecomposition e = symmetric_eigendecomposition(s);
    const Mat& v = e.vectors;
    ExpectMatNear(naive_matmul(naive_transpose(v), v), Mat::identity(d), 1e-9);
    const Mat rec = naive_matmul(naive_matmul(v, Mat::diagonal(e.values)), naive_transpose(v));
    EXPECT_LE(testing::rel_frobenius(rec, s), 1e-9);
    for (std::size_t k = 1; k < d; ++k) EXPECT_GE(e.values[k - 1], e.values[k]);
  }
}

TEST(EigenTest, SweepCapReportsFailure) {
  EXPECT_THROW(symmetric_eigendecomposition(random_pd(8, 9), 0), EigenFailure);
}

TEST(ZcaTest, Examples) {
  EXPECT_LE(max_abs_diff(zca_whitening_matrix(Mat::identity(3)), Mat::identity(3)), 1e-15);
  ExpectMatNear(zca_whitening_matrix(Mat::from_rows({{4, 0}, {0, 1}})),
                Mat::from_rows({{0.5, 0}, {0, 1}}), 1e-15);
  const Mat s = Mat::from_rows({{4, 2}, {2, 3}});
  const Mat w = zca_whitening_matrix(s);
  ExpectMatNear(naive_matmul(naive_matmul(w, s), naive_transpose(w)), Mat::identity(2), 1e-8);
  ExpectMatNear(w, naive_transpose(w), 1e-15);
}

TEST(ZcaTest, NonPositiveDefiniteIsRejected) {
  EXPECT_THROW(zca_whitening_matrix(Mat::from_rows({{1, 2}, {2, 1}})), NotPositiveDefinite);
}

TEST(WhiteningIdentityTest, CholeskyWhiteningInvertsCovariance) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t d = 1 + (seed * 7) % 32;
    const Mat s = random_pd(d, 300 + seed);
    const Mat w = invert_lower_triangular(cholesky(s));
    const Mat p = naive_matmul(naive_matmul(naive_transpose(w), w), s);
    EXPECT_LE(testing::max_abs_minus_identity(p), 1e-9) << "d=" << d;
  }
}

TEST(WhiteningIdentityTest, ZcaAndCholeskyDifferByRotation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t d = 2 + seed % 10;
    const Mat s = random_pd(d, 400 + seed);
    const Mat q = naive_matmul(zca_whitening_matrix(s), cholesky(s).mat());
    EXPECT_LE(testing::max_abs_minus_identity(naive_matmul(naive_transpose(q), q)), 1e-8);
  }
}

}  // namespace
}  // namespace wcnorm
