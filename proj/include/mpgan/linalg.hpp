#pragma once

#include <cstddef>
#include <vector>

// Dense row-major f64 matrix plus the handful of kernels the rest of the
// project is built on. The OpenMP kernels here parallelise only over
// disjoint output elements and keep every floating-point accumulation in a
// fixed serial order, so results are bit-identical for any thread count.
// Serial reference versions live in linalg_ref.hpp and are compared against
// these in the test suite and the bench_kernels tool.

namespace mpgan {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  std::size_t size() const { return data.size(); }

  bool operator==(const Matrix& other) const = default;
};

using Vector = std::vector<double>;

// out = a * b, (m x k) * (k x n)
Matrix matmul(const Matrix& a, const Matrix& b);
// out = a^T * b, (k x m)^T * (k x n)
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// out = a * b^T, (m x k) * (n x k)^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// out[i] = a.row(i) + v
Matrix add_row_broadcast(const Matrix& a, const Vector& v);

// column sums of a, length a.cols
Vector column_sums(const Matrix& a);

void scale_inplace(Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);

double squared_distance(const double* a, const double* b, std::size_t n);
double euclidean_distance(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double l2_norm(const double* a, std::size_t n);

}  // namespace mpgan
