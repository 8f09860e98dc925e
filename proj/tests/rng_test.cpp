#include <doctest.h>

#include <cmath>

#include "mpgan/rng.hpp"

using namespace mpgan;

TEST_CASE("equal seeds give identical streams") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams are independent of parent consumption") {
  Rng a(7), b(7);
  a.next_u64();
  a.next_u64();
  Rng sa = a.substream("x");
  Rng sb = b.substream("x");
  for (int i = 0; i < 10; ++i) CHECK(sa.next_u64() == sb.next_u64());
}

TEST_CASE("named and indexed substreams differ") {
  Rng root(7);
  CHECK(root.substream("noise").next_u64() != root.substream("interp").next_u64());
  CHECK(root.substream(0).next_u64() != root.substream(1).next_u64());
}

TEST_CASE("uniform01 stays in range and looks uniform") {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal has roughly unit variance") {
  Rng rng(5);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  CHECK(std::fabs(mean) < 0.03);
  CHECK(sq / n - mean * mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("uniform_index covers the range") {
  Rng rng(9);
  bool seen[5] = {};
  for (int i = 0; i < 200; ++i) {
    const auto v = rng.uniform_index(5);
    REQUIRE(v < 5);
    seen[v] = true;
  }
  for (bool s : seen) CHECK(s);
}
