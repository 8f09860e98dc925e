#pragma once

#include "mpgan/linalg.hpp"

// Serial reference kernels. Same accumulation order as the OpenMP versions,
// so outputs must match them bit-exactly; kept for tests and benchmarking.

namespace mpgan::ref {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);

}  // namespace mpgan::ref
