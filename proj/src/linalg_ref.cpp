#include "mpgan/linalg_ref.hpp"

#include <stdexcept>

namespace mpgan::ref {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("ref::matmul: inner dimensions differ");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t kk = 0; kk < a.cols; ++kk) {
      const double av = a(i, kk);
      for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += av * b(kk, j);
    }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("ref::matmul_tn: inner dimensions differ");
  Matrix out(a.cols, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i)
    for (std::size_t kk = 0; kk < a.rows; ++kk) {
      const double av = a(kk, i);
      for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += av * b(kk, j);
    }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw std::invalid_argument("ref::matmul_nt: inner dimensions differ");
  Matrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (std::size_t kk = 0; kk < a.cols; ++kk) s += a(i, kk) * b(j, kk);
      out(i, j) = s;
    }
  return out;
}

}  // namespace mpgan::ref
