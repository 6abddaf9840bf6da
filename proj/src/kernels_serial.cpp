#include "mgv/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace mgv::kernels::serial {

void matmul(const double* a, const double* b, double* out, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += a[static_cast<std::size_t>(i) * k + p] * b[static_cast<std::size_t>(p) * n + j];
      out[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

void transpose(const double* a, double* out, int m, int n) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j) * m + i] = a[static_cast<std::size_t>(i) * n + j];
}

void unary_apply(const double* x, double* out, std::size_t n, double (*f)(double)) {
  for (std::size_t i = 0; i < n; ++i) out[i] = f(x[i]);
}

void binary_apply(const double* a, const double* b, double* out, std::size_t n,
                  double (*f)(double, double)) {
  for (std::size_t i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
}

void scale(const double* x, double* out, std::size_t n, double c) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * c;
}

void softmax_cols(const double* x, double* out, int m, int n) {
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

}  // namespace mgv::kernels::serial
