#include "mgv/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mgv::kernels {

namespace {
Backend g_backend = Backend::Auto;
// Below this many output elements the thread startup cost dominates.
constexpr std::size_t kParallelThreshold = 1 << 14;
}  // namespace

void set_backend(Backend b) { g_backend = b; }
Backend backend() { return g_backend; }

bool use_parallel(std::size_t work) {
#ifdef _OPENMP
  switch (g_backend) {
    case Backend::Serial: return false;
    case Backend::OpenMP: return true;
    case Backend::Auto: return work >= kParallelThreshold;
  }
#endif
  (void)work;
  return false;
}

namespace omp {

// Each output element is owned by exactly one thread and accumulated in the
// same order as the serial kernel, so results are bitwise identical.

void matmul(const double* a, const double* b, double* out, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += a[static_cast<std::size_t>(i) * k + p] * b[static_cast<std::size_t>(p) * n + j];
      out[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

void transpose(const double* a, double* out, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j) * m + i] = a[static_cast<std::size_t>(i) * n + j];
}

void unary_apply(const double* x, double* out, std::size_t n, double (*f)(double)) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = f(x[i]);
}

void binary_apply(const double* a, const double* b, double* out, std::size_t n,
                  double (*f)(double, double)) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = f(a[i], b[i]);
}

void scale(const double* x, double* out, std::size_t n, double c) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = x[i] * c;
}

void softmax_cols(const double* x, double* out, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) {
    double mx = x[j];
    for (int i = 1; i < m; ++i) mx = std::max(mx, x[static_cast<std::size_t>(i) * n + j]);
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
      double e = std::exp(x[static_cast<std::size_t>(i) * n + j] - mx);
      out[static_cast<std::size_t>(i) * n + j] = e;
      z += e;
    }
    for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i) * n + j] /= z;
  }
}

}  // namespace omp

void matmul(const double* a, const double* b, double* out, int m, int k, int n) {
  if (use_parallel(static_cast<std::size_t>(m) * n))
    omp::matmul(a, b, out, m, k, n);
  else
    serial::matmul(a, b, out, m, k, n);
}

void transpose(const double* a, double* out, int m, int n) {
  if (use_parallel(static_cast<std::size_t>(m) * n))
    omp::transpose(a, out, m, n);
  else
    serial::transpose(a, out, m, n);
}

void unary_apply(const double* x, double* out, std::size_t n, double (*f)(double)) {
  if (use_parallel(n))
    omp::unary_apply(x, out, n, f);
  else
    serial::unary_apply(x, out, n, f);
}

void binary_apply(const double* a, const double* b, double* out, std::size_t n,
                  double (*f)(double, double)) {
  if (use_parallel(n))
    omp::binary_apply(a, b, out, n, f);
  else
    serial::binary_apply(a, b, out, n, f);
}

void scale(const double* x, double* out, std::size_t n, double c) {
  if (use_parallel(n))
    omp::scale(x, out, n, c);
  else
    serial::scale(x, out, n, c);
}

void softmax_cols(const double* x, double* out, int m, int n) {
  if (use_parallel(static_cast<std::size_t>(m) * n))
    omp::softmax_cols(x, out, m, n);
  else
    serial::softmax_cols(x, out, m, n);
}

}  // namespace mgv::kernels
