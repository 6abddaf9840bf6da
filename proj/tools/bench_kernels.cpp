// Times the serial and OpenMP kernel backends on a range of sizes and checks
// that their outputs stay bitwise identical while it does so.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mgv/kernels.hpp"
#include "mgv/rng.hpp"

using namespace mgv;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

bool g_identical = true;

void check_same(const std::vector<double>& a, const std::vector<double>& b) {
  if (a != b) g_identical = false;
}

void bench_matmul(Rng& rng, int n) {
  const auto a = random_vec(rng, static_cast<std::size_t>(n) * n);
  const auto b = random_vec(rng, static_cast<std::size_t>(n) * n);
  std::vector<double> out_s(static_cast<std::size_t>(n) * n), out_p(out_s.size());
  const double ts =
      time_best_of(3, [&] { kernels::serial::matmul(a.data(), b.data(), out_s.data(), n, n, n); });
  const double tp =
      time_best_of(3, [&] { kernels::omp::matmul(a.data(), b.data(), out_p.data(), n, n, n); });
  check_same(out_s, out_p);
  std::printf("matmul       %5dx%-5d serial %8.3f ms   omp %8.3f ms   speedup %5.2fx\n", n, n,
              ts * 1e3, tp * 1e3, ts / tp);
}

void bench_unary(Rng& rng, std::size_t n) {
  const auto x = random_vec(rng, n);
  std::vector<double> out_s(n), out_p(n);
  const double ts =
      time_best_of(5, [&] { kernels::serial::unary_apply(x.data(), out_s.data(), n, std::tanh); });
  const double tp =
      time_best_of(5, [&] { kernels::omp::unary_apply(x.data(), out_p.data(), n, std::tanh); });
  check_same(out_s, out_p);
  std::printf("tanh         %11zu serial %8.3f ms   omp %8.3f ms   speedup %5.2fx\n", n, ts * 1e3,
              tp * 1e3, ts / tp);
}

void bench_softmax(Rng& rng, int m, int n) {
  const auto x = random_vec(rng, static_cast<std::size_t>(m) * n);
  std::vector<double> out_s(x.size()), out_p(x.size());
  const double ts =
      time_best_of(5, [&] { kernels::serial::softmax_cols(x.data(), out_s.data(), m, n); });
  const double tp =
      time_best_of(5, [&] { kernels::omp::softmax_cols(x.data(), out_p.data(), m, n); });
  check_same(out_s, out_p);
  std::printf("softmax cols %5dx%-5d serial %8.3f ms   omp %8.3f ms   speedup %5.2fx\n", m, n,
              ts * 1e3, tp * 1e3, ts / tp);
}

}  // namespace

int main() {
  Rng rng(1);
#ifdef _OPENMP
  std::printf("kernel backend comparison, %d OpenMP thread(s) (best of several runs)\n\n",
              omp_get_max_threads());
#else
  std::printf("kernel backend comparison, OpenMP unavailable (best of several runs)\n\n");
#endif
  for (int n : {64, 128, 256, 512}) bench_matmul(rng, n);
  std::printf("\n");
  for (std::size_t n : {std::size_t{1} << 14, std::size_t{1} << 18, std::size_t{1} << 22})
    bench_unary(rng, n);
  std::printf("\n");
  bench_softmax(rng, 64, 4096);
  bench_softmax(rng, 512, 4096);
  std::printf("\nbackends bitwise identical: %s\n", g_identical ? "yes" : "NO");
  return g_identical ? 0 : 1;
}
