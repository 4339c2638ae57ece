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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"

namespace wcnorm {
namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(fmt::format("{}: shape mismatch {}x{} vs {}x{}", op,
                                 a.rows(), a.cols(), b.rows(), b.cols()));
  }
}

void require_square(const Mat& a, const char* op) {
  if (a.rows() != a.cols()) {
    throw ShapeError(
        fmt::format("{}: expected a square matrix, got {}x{}", op, a.rows(), a.cols()));
  }
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError(fmt::format("Mat: {} values cannot fill a {}x{} matrix",
                                 data_.size(), rows, cols));
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diagonal(std::span<const double> diag) {
  Mat m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Mat Mat::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Mat::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Mat(r, c, std::move(data));
}

Vec Mat::column(std::size_t c) const {
  Vec out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Mat& Mat::operator+=(const Mat& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Mat& Mat::operator-=(const Mat& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  }
  return t;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError(fmt::format("matmul: {}x{} * {}x{}", a.rows(), a.cols(),
                                 b.rows(), b.cols()));
  }
  Mat out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      const double* b_row = b.row(p).data();
      for (std::size_t j = 0; j < n; ++j) out_row[j] += aip * b_row[j];
    }
  }
  return out;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError(fmt::format("matmul_tn: ({}x{})^T * {}x{}", a.rows(),
                                 a.cols(), b.rows(), b.cols()));
  }
  Mat out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t p = 0; p < a.rows(); ++p) {
    const double* a_row = a.row(p).data();
    const double* b_row = b.row(p).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double api = a_row[i];
      if (api == 0.0) continue;
      double* out_row = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) out_row[j] += api * b_row[j];
    }
  }
  return out;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError(fmt::format("matmul_nt: {}x{} * ({}x{})^T", a.rows(),
                                 a.cols(), b.rows(), b.cols()));
  }
  Mat out(a.rows(), b.rows());
  const std::size_t k = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* a_row = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* b_row = b.row(j).data();
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a_row[p] * b_row[p];
      out(i, j) = acc;
    }
  }
  return out;
}

Vec matvec(const Mat& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw ShapeError(fmt::format("matvec: {}x{} * {}", a.rows(), a.cols(), x.size()));
  }
  Vec out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    out[i] = std::inner_product(row.begin(), row.end(), x.begin(), 0.0);
  }
  return out;
}

Mat hadamard(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "hadamard");
  Mat out = a;
  auto ov = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= bv[i];
  return out;
}

Mat symmetrize(const Mat& a) {
  require_square(a, "symmetrize");
  Mat out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    out(i, i) = a(i, i);
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

double trace(const Mat& a) {
  require_square(a, "trace");
  double t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

double dot(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "dot");
  const auto av = a.values();
  const auto bv = b.values();
  return std::inner_product(av.begin(), av.end(), bv.begin(), 0.0);
}

double frobenius_norm(const Mat& a) { return std::sqrt(dot(a, a)); }

double max_abs(const Mat& a) {
  double best = 0.0;
  for (double v : a.values()) best = std::max(best, std::abs(v));
  return best;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "max_abs_diff");
  double best = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    best = std::max(best, std::abs(av[i] - bv[i]));
  }
  return best;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_finite(const Mat& a) { return all_finite(a.values()); }

Vec row_sums(const Mat& x) {
  Vec out(x.rows(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    out[r] = std::accumulate(row.begin(), row.end(), 0.0);
  }
  return out;
}

Vec row_means(const Mat& x) {
  if (x.cols() == 0) throw DegenerateBatch("row_means: empty batch");
  Vec out = row_sums(x);
  for (double& v : out) v /= static_cast<double>(x.cols());
  return out;
}

Mat center_rows(const Mat& x, std::span<const double> mu) {
  if (mu.size() != x.rows()) {
    throw ShapeError(fmt::format("center_rows: mean of length {} for {} rows",
                                 mu.size(), x.rows()));
  }
  Mat out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (double& v : out.row(r)) v -= mu[r];
  }
  return out;
}

LowerTriangular LowerTriangular::from_mat(Mat m) {
  require_square(m, "LowerTriangular");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!(m(i, i) > 0.0)) {
      throw InvalidParameter(
          fmt::format("LowerTriangular: diagonal entry {} is not positive", i));
    }
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        throw InvalidParameter(
            fmt::format("LowerTriangular: nonzero entry above diagonal at ({}, {})", i, j));
      }
    }
  }
  return LowerTriangular(std::move(m));
}

Mat empirical_covariance(const Mat& x, std::span<const double> mu) {
  if (x.cols() < 2) {
    throw DegenerateBatch(
        fmt::format("empirical_covariance: need at least 2 samples, got {}", x.cols()));
  }
  const Mat centered = center_rows(x, mu);
  const std::size_t d = x.rows();
  const std::size_t m = x.cols();
  const double scale = 1.0 / static_cast<double>(m - 1);
  Mat cov(d, d);
  // Lower triangle only, mirrored: the result is symmetric by construction.
  for (std::size_t i = 0; i < d; ++i) {
    const double* xi = centered.row(i).data();
    for (std::size_t j = 0; j <= i; ++j) {
      const double* xj = centered.row(j).data();
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) acc += xi[k] * xj[k];
      cov(i, j) = acc * scale;
      cov(j, i) = cov(i, j);
    }
  }
  return cov;
}

Mat shrink(const Mat& sigma_hat, double eps) {
  require_square(sigma_hat, "shrink");
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw InvalidParameter(fmt::format("shrink: eps={} outside [0, 1]", eps));
  }
  Mat out = (1.0 - eps) * sigma_hat;
  for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += eps;
  return out;
}

LowerTriangular cholesky(const Mat& sigma) {
  require_square(sigma, "cholesky");
  const std::size_t n = sigma.rows();
  Mat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* lj = l.row(j).data();
    double pivot = sigma(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= lj[k] * lj[k];
    if (!(pivot > 0.0)) {
      throw NotPositiveDefinite(
          fmt::format("cholesky: non-positive pivot {} at index {}", pivot, j), j);
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double* li = l.row(i).data();
      double acc = sigma(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= li[k] * lj[k];
      l(i, j) = acc / ljj;
    }
  }
  return LowerTriangular(std::move(l));
}

Mat invert_lower_triangular(const Mat& l) {
  require_square(l, "invert_lower_triangular");
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (l(i, i) == 0.0) {
      throw SingularMatrix(
          fmt::format("invert_lower_triangular: zero diagonal at index {}", i), i);
    }
  }
  Mat w(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    w(j, j) = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = j; k < i; ++k) acc += l(i, k) * w(k, j);
      w(i, j) = -acc / l(i, i);
    }
  }
  return w;
}

Mat invert_lower_triangular(const LowerTriangular& l) {
  return invert_lower_triangular(l.mat());
}

EigenDecomposition symmetric_eigendecomposition(const Mat& sigma, int max_sweeps) {
  require_square(sigma, "symmetric_eigendecomposition");
  const std::size_t n = sigma.rows();
  Mat a = symmetrize(sigma);
  Mat v = Mat::identity(n);
  if (!all_finite(a)) {
    throw EigenFailure("symmetric_eigendecomposition: non-finite input");
  }

  const double scale2 = std::max(dot(a, a), 1e-300);
  bool converged = n <= 1;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off <= 1e-32 * scale2) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Late in the iteration, entries too small to move either diagonal
        // are flushed rather than rotated.
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(app) + g == std::abs(app) &&
            std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          const double new_kp = c * akp - s * akq;
          const double new_kq = s * akp + c * akq;
          a(k, p) = new_kp;
          a(p, k) = new_kp;
          a(k, q) = new_kq;
          a(q, k) = new_kq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (!(off <= 1e-32 * scale2)) {
      throw EigenFailure(fmt::format(
          "symmetric_eigendecomposition: no convergence after {} sweeps", max_sweeps));
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  EigenDecomposition out{Vec(n), Mat(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

Mat zca_whitening_matrix(const EigenDecomposition& eig) {
  const std::size_t n = eig.values.size();
  Mat scaled = eig.vectors;  // V diag(lambda^{-1/2})
  for (std::size_t k = 0; k < n; ++k) {
    const double lambda = eig.values[k];
    if (!(lambda > 0.0)) {
      throw NotPositiveDefinite(
          fmt::format("zca_whitening_matrix: eigenvalue {} at index {}", lambda, k), k);
    }
    const double f = 1.0 / std::sqrt(lambda);
    for (std::size_t r = 0; r < n; ++r) scaled(r, k) *= f;
  }
  return symmetrize(matmul_nt(scaled, eig.vectors));
}

Mat zca_whitening_matrix(const Mat& sigma) {
  return zca_whitening_matrix(symmetric_eigendecomposition(sigma));
}

}  // namespace wcnorm
