#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "mgv/ops.hpp"
#include "mgv/tape.hpp"

namespace mgv {

// Scalar function of one tensor, evaluated with or without a recording tape.
using ScalarFn = std::function<Tensor(Tape*, const Tensor&)>;

// Compares the analytic gradient of fn at `point` against central finite
// differences with the given step. Returns the max over coordinates of
// |analytic - fd| / max(1e-8, |fd|).
inline double grad_check(const ScalarFn& fn, const Tensor& point, double step) {
  Tape tape;
  Tensor x = point;
  tape.watch(x);
  Tensor loss = fn(&tape, x);
  if (!loss.is_scalar()) throw std::invalid_argument("grad_check: function must return a scalar");
  if (!std::isfinite(loss.value()))
    throw std::invalid_argument("grad_check: non-finite function value at the given point");
  const Tensor analytic = backward(tape, loss).wrt(x);

  double max_err = 0.0;
  Tensor p = point;
  for (int i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + step;
    const double fp = fn(nullptr, p).value();
    p[i] = orig - step;
    const double fm = fn(nullptr, p).value();
    p[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::invalid_argument("grad_check: non-finite function value near the given point");
    const double fd = (fp - fm) / (2.0 * step);
    const double err = std::abs(analytic[i] - fd) / std::max(1e-8, std::abs(fd));
    max_err = std::max(max_err, err);
  }
  return max_err;
}

// Symmetric relative error used by the end-to-end checks, robust when the
// analytic gradient is exactly zero (finite differences then only measure
// rounding noise of the forward pass).
inline double relative_gap(double analytic, double fd) {
  return std::abs(analytic - fd) / (std::abs(analytic) + std::abs(fd) + 1e-6);
}

}  // namespace mgv
