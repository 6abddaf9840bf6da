#pragma once

#include <cstddef>

// Low-level array kernels. Every kernel exists twice: a serial reference in
// mgv::kernels::serial and an OpenMP version in mgv::kernels::omp. Both
// compute each output element with the same sequential inner loop, so the two
// backends are bitwise identical; tests assert exact equality and the
// benchmark tool compares their throughput.
//
// kernels::* dispatches on the process-wide backend flag (default: omp when
// the workload is large enough to amortize thread startup).

namespace mgv::kernels {

enum class Backend { Serial, OpenMP, Auto };

void set_backend(Backend b);
Backend backend();

// True when this call should run the OpenMP path for `work` output elements.
bool use_parallel(std::size_t work);

namespace serial {
void matmul(const double* a, const double* b, double* out, int m, int k, int n);
void transpose(const double* a, double* out, int m, int n);
void unary_apply(const double* x, double* out, std::size_t n, double (*f)(double));
void binary_apply(const double* a, const double* b, double* out, std::size_t n,
                  double (*f)(double, double));
void scale(const double* x, double* out, std::size_t n, double c);
// Column-wise softmax of an m x n matrix (softmax over the m entries of each column).
void softmax_cols(const double* x, double* out, int m, int n);
}  // namespace serial

namespace omp {
void matmul(const double* a, const double* b, double* out, int m, int k, int n);
void transpose(const double* a, double* out, int m, int n);
void unary_apply(const double* x, double* out, std::size_t n, double (*f)(double));
void binary_apply(const double* a, const double* b, double* out, std::size_t n,
                  double (*f)(double, double));
void scale(const double* x, double* out, std::size_t n, double c);
void softmax_cols(const double* x, double* out, int m, int n);
}  // namespace omp

void matmul(const double* a, const double* b, double* out, int m, int k, int n);
void transpose(const double* a, double* out, int m, int n);
void unary_apply(const double* x, double* out, std::size_t n, double (*f)(double));
void binary_apply(const double* a, const double* b, double* out, std::size_t n,
                  double (*f)(double, double));
void scale(const double* x, double* out, std::size_t n, double c);
void softmax_cols(const double* x, double* out, int m, int n);

}  // namespace mgv::kernels
