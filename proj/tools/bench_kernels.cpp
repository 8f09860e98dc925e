// Times the OpenMP kernels against the serial reference implementations and
// checks they agree bit-exactly on the way.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <omp.h>

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

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void bench_case(const char* name, std::size_t m, std::size_t k, std::size_t n, int reps) {
  Rng rng(fnv1a64(name));
  const Matrix a = random_matrix(m, k, rng);
  const Matrix b = random_matrix(k, n, rng);

  Matrix out_par, out_ser;
  const double t_par = time_ms([&] { out_par = matmul(a, b); }, reps);
  const double t_ser = time_ms([&] { out_ser = ref::matmul(a, b); }, reps);
  const bool equal = out_par == out_ser;

  std::printf("%-24s %4zux%-4zux%-4zu  omp %8.3f ms  serial %8.3f ms  speedup %5.2fx  %s\n",
              name, m, k, n, t_par, t_ser, t_ser / t_par, equal ? "bit-equal" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  bench_case("gan batch fwd", 64, 512, 64, 50);
  bench_case("gan batch bwd", 512, 64, 512, 50);
  bench_case("classifier epoch", 300, 512, 200, 20);
  bench_case("square mid", 256, 256, 256, 20);
  bench_case("square large", 512, 512, 512, 5);
  return 0;
}
