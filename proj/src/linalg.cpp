#include "mpgan/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace mpgan {

namespace {
// Small products are not worth a thread team.
constexpr std::size_t kParallelFlopCutoff = 64 * 1024;

void check_mul(std::size_t inner_a, std::size_t inner_b, const char* what) {
  if (inner_a != inner_b) throw std::invalid_argument(what);
}
}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_mul(a.cols, b.rows, "matmul: inner dimensions differ");
  Matrix out(a.rows, b.cols);
  const std::size_t m = a.rows, k = a.cols, n = b.cols;
  const bool par = m * k * n > kParallelFlopCutoff;
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < static_cast<long>(m); ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = b.row(kk);
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_mul(a.rows, b.rows, "matmul_tn: inner dimensions differ");
  Matrix out(a.cols, b.cols);
  const std::size_t m = a.cols, k = a.rows, n = b.cols;
  const bool par = m * k * n > kParallelFlopCutoff;
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < static_cast<long>(m); ++i) {
    double* orow = out.row(i);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = a(kk, i);
      const double* brow = b.row(kk);
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_mul(a.cols, b.cols, "matmul_nt: inner dimensions differ");
  Matrix out(a.rows, b.rows);
  const std::size_t m = a.rows, k = a.cols, n = b.rows;
  const bool par = m * k * n > kParallelFlopCutoff;
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < static_cast<long>(m); ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t j = 0; j < n; ++j) orow[j] = dot(arow, b.row(j), k);
  }
  return out;
}

Matrix add_row_broadcast(const Matrix& a, const Vector& v) {
  if (v.size() != a.cols) throw std::invalid_argument("add_row_broadcast: dim mismatch");
  Matrix out = a;
#pragma omp parallel for schedule(static) if (a.size() > kParallelFlopCutoff)
  for (long i = 0; i < static_cast<long>(a.rows); ++i) {
    double* orow = out.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) orow[j] += v[j];
  }
  return out;
}

Vector column_sums(const Matrix& a) {
  Vector out(a.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    for (std::size_t j = 0; j < a.cols; ++j) out[j] += arow[j];
  }
  return out;
}

void scale_inplace(Matrix& a, double s) {
  for (double& x : a.data) x *= s;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("hadamard: shape mismatch");
  Matrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double euclidean_distance(const double* a, const double* b, std::size_t n) {
  return std::sqrt(squared_distance(a, b, n));
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const double* a, std::size_t n) {
  return std::sqrt(dot(a, a, n));
}

}  // namespace mpgan
