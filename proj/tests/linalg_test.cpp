#include <doctest.h>

#include "mpgan/linalg.hpp"
#include "mpgan/linalg_ref.hpp"
#include "mpgan/rng.hpp"

using namespace mpgan;

namespace {
Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.normal();
  return m;
}
}  // namespace

TEST_CASE("omp kernels match the serial reference bit-exactly") {
  Rng rng(11);
  // Sizes straddle the parallel cutoff so both code paths run.
  const std::size_t sizes[][3] = {{1, 1, 1},   {3, 5, 2},    {17, 9, 31},
                                  {64, 64, 64}, {120, 70, 90}, {257, 33, 129}};
  for (const auto& s : sizes) {
    const Matrix a = random_matrix(s[0], s[1], rng);
    const Matrix b = random_matrix(s[1], s[2], rng);
    CHECK(matmul(a, b) == ref::matmul(a, b));

    const Matrix at = random_matrix(s[1], s[0], rng);
    CHECK(matmul_tn(at, b) == ref::matmul_tn(at, b));

    const Matrix bt = random_matrix(s[2], s[1], rng);
    CHECK(matmul_nt(a, bt) == ref::matmul_nt(a, bt));
  }
}

TEST_CASE("matmul agrees with a hand-rolled per-element loop") {
  Rng rng(23);
  const Matrix a = random_matrix(7, 4, rng);
  const Matrix b = random_matrix(4, 9, rng);
  const Matrix out = matmul(a, b);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double expect = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) expect += a(i, k) * b(k, j);
      CHECK(out(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("transpose products agree with explicit transposition") {
  Rng rng(31);
  const Matrix a = random_matrix(6, 3, rng);
  const Matrix b = random_matrix(6, 5, rng);

  Matrix at(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) at(j, i) = a(i, j);

  const Matrix expect = matmul(at, b);
  const Matrix got = matmul_tn(a, b);
  REQUIRE(got.rows == expect.rows);
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got.data[i] == doctest::Approx(expect.data[i]).epsilon(1e-12));
}

TEST_CASE("shape mismatches are rejected") {
  const Matrix a(2, 3), b(4, 2);
  CHECK_THROWS(matmul(a, b));
  CHECK_THROWS(matmul_tn(a, b));
  CHECK_THROWS(matmul_nt(a, b));
  CHECK_THROWS(add_row_broadcast(a, Vector(2)));
}

TEST_CASE("distance helpers") {
  const double a[] = {0.0, 3.0};
  const double b[] = {4.0, 0.0};
  CHECK(squared_distance(a, b, 2) == doctest::Approx(25.0));
  CHECK(euclidean_distance(a, b, 2) == doctest::Approx(5.0));
  CHECK(l2_norm(b, 2) == doctest::Approx(4.0));
  CHECK(dot(a, b, 2) == doctest::Approx(0.0));
}
