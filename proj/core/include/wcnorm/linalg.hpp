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

// Dense small-matrix kernels in double precision. Everything here is a pure
// function of its inputs.

#ifndef WCNORM_LINALG_HPP_
#define WCNORM_LINALG_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace wcnorm {

using Vec = std::vector<double>;

// Row-major dense matrix.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  // Throws ShapeError unless data.size() == rows * cols.
  Mat(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Mat identity(std::size_t n);
  static Mat diagonal(std::span<const double> diag);
  // Mat::from_rows({{1, 2}, {3, 4}}); all rows must have equal length.
  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  Vec column(std::size_t c) const;

  Mat& operator+=(const Mat& other);
  Mat& operator-=(const Mat& other);
  Mat& operator*=(double s);

  bool operator==(const Mat& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);

Mat transpose(const Mat& a);
Mat matmul(const Mat& a, const Mat& b);
// a^T * b without materializing the transpose.
Mat matmul_tn(const Mat& a, const Mat& b);
// a * b^T without materializing the transpose.
Mat matmul_nt(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, std::span<const double> x);
Mat hadamard(const Mat& a, const Mat& b);
// (a + a^T) / 2, exactly symmetric.
Mat symmetrize(const Mat& a);
double trace(const Mat& a);
double dot(const Mat& a, const Mat& b);  // sum_ij a_ij * b_ij

double frobenius_norm(const Mat& a);
double max_abs(const Mat& a);
double max_abs_diff(const Mat& a, const Mat& b);
bool all_finite(const Mat& a);
bool all_finite(std::span<const double> v);

Vec row_means(const Mat& x);
Vec row_sums(const Mat& x);
// x - mu 1^T
Mat center_rows(const Mat& x, std::span<const double> mu);

// Lower-triangular matrix with a strictly positive diagonal, stored in full.
class LowerTriangular {
 public:
  // Validates structure: zeros above the diagonal and positive diagonal.
  // Throws InvalidParameter otherwise.
  static LowerTriangular from_mat(Mat m);

  std::size_t dim() const noexcept { return m_.rows(); }
  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
  const Mat& mat() const noexcept { return m_; }

  bool operator==(const LowerTriangular& other) const = default;

 private:
  friend LowerTriangular cholesky(const Mat& sigma);
  explicit LowerTriangular(Mat m) : m_(std::move(m)) {}
  Mat m_;
};

// (1 / (m - 1)) * sum_i (x_i - mu)(x_i - mu)^T over the columns of x.
// The result is exactly symmetric. Throws DegenerateBatch if m < 2.
Mat empirical_covariance(const Mat& x, std::span<const double> mu);

// (1 - eps) * sigma_hat + eps * I. Throws InvalidParameter if eps is outside
// [0, 1].
Mat shrink(const Mat& sigma_hat, double eps);

// L with L * L^T = sigma. Throws NotPositiveDefinite carrying the index of
// the first non-positive pivot.
LowerTriangular cholesky(const Mat& sigma);

// W = L^{-1}, lower triangular. Throws SingularMatrix on a zero diagonal
// entry (only reachable through a hand-built matrix; see overload below).
Mat invert_lower_triangular(const LowerTriangular& l);
Mat invert_lower_triangular(const Mat& l);

struct EigenDecomposition {
  Vec values;   // descending
  Mat vectors;  // column k is the eigenvector of values[k]
};

// Cyclic Jacobi rotations. Throws EigenFailure if the off-diagonal mass does
// not vanish within max_sweeps.
EigenDecomposition symmetric_eigendecomposition(const Mat& sigma,
                                                int max_sweeps = 100);

// V diag(lambda^{-1/2}) V^T. Throws NotPositiveDefinite on a non-positive
// eigenvalue.
Mat zca_whitening_matrix(const Mat& sigma);
Mat zca_whitening_matrix(const EigenDecomposition& eig);

}  // namespace wcnorm

#endif  // WCNORM_LINALG_HPP_
