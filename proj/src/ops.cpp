#include "mgv/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "mgv/kernels.hpp"

namespace mgv {

namespace {

[[noreturn]] void shape_error(const char* kernel, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(kernel) + ": shape mismatch " + a.shape_str() +
                              " vs " + b.shape_str());
}

[[noreturn]] void shape_error(const char* kernel, const Tensor& a) {
  throw std::invalid_argument(std::string(kernel) + ": bad input shape " + a.shape_str());
}

void accumulate(Tensor& g, const Tensor& delta) {
  double* out = g.data();
  const double* d = delta.data();
  for (int i = 0; i < g.size(); ++i) out[i] += d[i];
}

// Records the node when a tape is active and at least one input is tracked.
Tensor finish(Tape* tp, Tensor out, std::initializer_list<int> parents, Tape::BackwardFn fn) {
  if (tp == nullptr) return out;
  bool tracked = false;
  for (int p : parents)
    if (p >= 0) tracked = true;
  if (!tracked) return out;
  out.node = tp->record(out.rows(), out.cols(), std::move(fn));
  return out;
}

Tensor unary(Tape* tp, const Tensor& a, double (*f)(double), double (*df)(double),
             const char* /*name*/) {
  Tensor out(a.rows(), a.cols());
  kernels::unary_apply(a.data(), out.data(), a.size(), f);
  const int pa = a.node;
  Tensor saved = a;
  return finish(tp, std::move(out), {pa},
                [pa, saved = std::move(saved), df](const Tensor& g, std::vector<Tensor>& grads) {
                  Tensor& ga = grads[pa];
                  for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * df(saved[i]);
                });
}

double f_log(double x) { return std::log(x + kDenomGuard); }
double df_log(double x) { return 1.0 / (x + kDenomGuard); }
double f_exp(double x) { return std::exp(x); }
double f_softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double df_softplus(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double f_tanh(double x) { return std::tanh(x); }
double df_tanh(double x) { double t = std::tanh(x); return 1.0 - t * t; }
double f_hinge(double x) { return x > 0.0 ? x : 0.0; }
double df_hinge(double x) { return x > 0.0 ? 1.0 : 0.0; }
double f_square(double x) { return x * x; }
double df_square(double x) { return 2.0 * x; }
double f_neg(double x) { return -x; }
double df_neg(double) { return -1.0; }
double f_xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
double df_xlogx(double x) { return x > 0.0 ? std::log(x) + 1.0 : 0.0; }

double f_add(double a, double b) { return a + b; }
double f_sub(double a, double b) { return a - b; }
double f_mul(double a, double b) { return a * b; }
double f_div(double a, double b) { return a / (b + (b >= 0.0 ? kDenomGuard : -kDenomGuard)); }

}  // namespace

Tensor matmul(Tape* tp, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out(m, n);
  kernels::matmul(a.data(), b.data(), out.data(), m, k, n);
  const int pa = a.node, pb = b.node;
  Tensor sa = a, sb = b;
  return finish(tp, std::move(out), {pa, pb},
                [pa, pb, sa = std::move(sa), sb = std::move(sb), m, k, n](
                    const Tensor& g, std::vector<Tensor>& grads) {
                  if (pa >= 0) {
                    // dA = g * B^T
                    Tensor bt(n, k);
                    kernels::transpose(sb.data(), bt.data(), k, n);
                    Tensor da(m, k);
                    kernels::matmul(g.data(), bt.data(), da.data(), m, n, k);
                    accumulate(grads[pa], da);
                  }
                  if (pb >= 0) {
                    // dB = A^T * g
                    Tensor at(k, m);
                    kernels::transpose(sa.data(), at.data(), m, k);
                    Tensor db(k, n);
                    kernels::matmul(at.data(), g.data(), db.data(), k, m, n);
                    accumulate(grads[pb], db);
                  }
                });
}

Tensor transpose(Tape* tp, const Tensor& a) {
  Tensor out(a.cols(), a.rows());
  kernels::transpose(a.data(), out.data(), a.rows(), a.cols());
  const int pa = a.node;
  return finish(tp, std::move(out), {pa}, [pa](const Tensor& g, std::vector<Tensor>& grads) {
    Tensor gt(g.cols(), g.rows());
    kernels::transpose(g.data(), gt.data(), g.rows(), g.cols());
    accumulate(grads[pa], gt);
  });
}

Tensor concat_rows(Tape* tp, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) shape_error("concat-rows", a, b);
  Tensor out(a.rows() + b.rows(), a.cols());
  std::copy(a.data(), a.data() + a.size(), out.data());
  std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
  const int pa = a.node, pb = b.node, ar = a.rows();
  return finish(tp, std::move(out), {pa, pb},
                [pa, pb, ar](const Tensor& g, std::vector<Tensor>& grads) {
                  const int n = g.cols();
                  if (pa >= 0)
                    for (int i = 0; i < ar; ++i)
                      for (int j = 0; j < n; ++j) grads[pa].at(i, j) += g.at(i, j);
                  if (pb >= 0)
                    for (int i = ar; i < g.rows(); ++i)
                      for (int j = 0; j < n; ++j) grads[pb].at(i - ar, j) += g.at(i, j);
                });
}

Tensor concat_cols(Tape* tp, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) shape_error("concat-cols", a, b);
  Tensor out(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j);
    for (int j = 0; j < b.cols(); ++j) out.at(i, a.cols() + j) = b.at(i, j);
  }
  const int pa = a.node, pb = b.node, ac = a.cols();
  return finish(tp, std::move(out), {pa, pb},
                [pa, pb, ac](const Tensor& g, std::vector<Tensor>& grads) {
                  for (int i = 0; i < g.rows(); ++i) {
                    if (pa >= 0)
                      for (int j = 0; j < ac; ++j) grads[pa].at(i, j) += g.at(i, j);
                    if (pb >= 0)
                      for (int j = ac; j < g.cols(); ++j) grads[pb].at(i, j - ac) += g.at(i, j);
                  }
                });
}

Tensor slice_rows(Tape* tp, const Tensor& a, int r0, int r1) {
  if (r0 < 0 || r1 > a.rows() || r0 >= r1)
    throw std::invalid_argument("slice-rows: bounds [" + std::to_string(r0) + "," +
                                std::to_string(r1) + ") invalid for " + a.shape_str());
  Tensor out(r1 - r0, a.cols());
  for (int i = r0; i < r1; ++i)
    for (int j = 0; j < a.cols(); ++j) out.at(i - r0, j) = a.at(i, j);
  const int pa = a.node;
  return finish(tp, std::move(out), {pa}, [pa, r0](const Tensor& g, std::vector<Tensor>& grads) {
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) grads[pa].at(r0 + i, j) += g.at(i, j);
  });
}

Tensor slice_cols(Tape* tp, const Tensor& a, int c0, int c1) {
  if (c0 < 0 || c1 > a.cols() || c0 >= c1)
    throw std::invalid_argument("slice-cols: bounds [" + std::to_string(c0) + "," +
                                std::to_string(c1) + ") invalid for " + a.shape_str());
  Tensor out(a.rows(), c1 - c0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = c0; j < c1; ++j) out.at(i, j - c0) = a.at(i, j);
  const int pa = a.node;
  return finish(tp, std::move(out), {pa}, [pa, c0](const Tensor& g, std::vector<Tensor>& grads) {
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) grads[pa].at(i, c0 + j) += g.at(i, j);
  });
}

Tensor row_mean(Tape* tp, const Tensor& a) {
  Tensor out(a.rows(), 1);
  const double inv = 1.0 / a.cols();
  for (int i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < a.cols(); ++j) acc += a.at(i, j);
    out[i] = acc * inv;
  }
  const int pa = a.node, n = a.cols();
  return finish(tp, std::move(out), {pa}, [pa, n, inv](const Tensor& g, std::vector<Tensor>& grads) {
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < n; ++j) grads[pa].at(i, j) += g[i] * inv;
  });
}

Tensor col_mean(Tape* tp, const Tensor& a) {
  Tensor out(1, a.cols());
  const double inv = 1.0 / a.rows();
  for (int j = 0; j < a.cols(); ++j) {
    double acc = 0.0;
    for (int i = 0; i < a.rows(); ++i) acc += a.at(i, j);
    out[j] = acc * inv;
  }
  const int pa = a.node, m = a.rows();
  return finish(tp, std::move(out), {pa}, [pa, m, inv](const Tensor& g, std::vector<Tensor>& grads) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < g.cols(); ++j) grads[pa].at(i, j) += g[j] * inv;
  });
}

Tensor softmax(Tape* tp, const Tensor& a, int axis) {
  if (axis != 0 && axis != 1) throw std::invalid_argument("softmax-over-axis: axis must be 0 or 1");
  Tensor out(a.rows(), a.cols());
  if (axis == 0) {
    kernels::softmax_cols(a.data(), out.data(), a.rows(), a.cols());
  } else {
    Tensor at(a.cols(), a.rows());
    kernels::transpose(a.data(), at.data(), a.rows(), a.cols());
    Tensor st(a.cols(), a.rows());
    kernels::softmax_cols(at.data(), st.data(), a.cols(), a.rows());
    kernels::transpose(st.data(), out.data(), a.cols(), a.rows());
  }
  const int pa = a.node;
  Tensor s = out;
  return finish(tp, std::move(out), {pa},
                [pa, s = std::move(s), axis](const Tensor& g, std::vector<Tensor>& grads) {
                  // dX = S .* (g - <g, S> per slice)
                  Tensor& ga = grads[pa];
                  if (axis == 0) {
                    for (int j = 0; j < s.cols(); ++j) {
                      double inner = 0.0;
                      for (int i = 0; i < s.rows(); ++i) inner += g.at(i, j) * s.at(i, j);
                      for (int i = 0; i < s.rows(); ++i)
                        ga.at(i, j) += s.at(i, j) * (g.at(i, j) - inner);
                    }
                  } else {
                    for (int i = 0; i < s.rows(); ++i) {
                      double inner = 0.0;
                      for (int j = 0; j < s.cols(); ++j) inner += g.at(i, j) * s.at(i, j);
                      for (int j = 0; j < s.cols(); ++j)
                        ga.at(i, j) += s.at(i, j) * (g.at(i, j) - inner);
                    }
                  }
                });
}

Tensor log(Tape* tp, const Tensor& a) { return unary(tp, a, f_log, df_log, "log"); }
Tensor exp(Tape* tp, const Tensor& a) { return unary(tp, a, f_exp, f_exp, "exp"); }
Tensor softplus(Tape* tp, const Tensor& a) { return unary(tp, a, f_softplus, df_softplus, "softplus"); }
Tensor tanh(Tape* tp, const Tensor& a) { return unary(tp, a, f_tanh, df_tanh, "tanh"); }
Tensor hinge(Tape* tp, const Tensor& a) { return unary(tp, a, f_hinge, df_hinge, "hinge"); }
Tensor square(Tape* tp, const Tensor& a) { return unary(tp, a, f_square, df_square, "square"); }
Tensor negate(Tape* tp, const Tensor& a) { return unary(tp, a, f_neg, df_neg, "negate"); }
Tensor xlogx(Tape* tp, const Tensor& a) { return unary(tp, a, f_xlogx, df_xlogx, "xlogx"); }

namespace {

Tensor binary(Tape* tp, const Tensor& a, const Tensor& b, double (*f)(double, double),
              const char* name, void (*back)(const Tensor&, const Tensor&, const Tensor&,
                                             int, int, std::vector<Tensor>&)) {
  if (!a.same_shape(b)) shape_error(name, a, b);
  Tensor out(a.rows(), a.cols());
  kernels::binary_apply(a.data(), b.data(), out.data(), a.size(), f);
  const int pa = a.node, pb = b.node;
  Tensor sa = a, sb = b;
  return finish(tp, std::move(out), {pa, pb},
                [pa, pb, sa = std::move(sa), sb = std::move(sb), back](
                    const Tensor& g, std::vector<Tensor>& grads) {
                  back(g, sa, sb, pa, pb, grads);
                });
}

}  // namespace

Tensor add(Tape* tp, const Tensor& a, const Tensor& b) {
  return binary(tp, a, b, f_add, "add",
                [](const Tensor& g, const Tensor&, const Tensor&, int pa, int pb,
                   std::vector<Tensor>& grads) {
                  if (pa >= 0) accumulate(grads[pa], g);
                  if (pb >= 0) accumulate(grads[pb], g);
                });
}

Tensor sub(Tape* tp, const Tensor& a, const Tensor& b) {
  return binary(tp, a, b, f_sub, "sub",
                [](const Tensor& g, const Tensor&, const Tensor&, int pa, int pb,
                   std::vector<Tensor>& grads) {
                  if (pa >= 0) accumulate(grads[pa], g);
                  if (pb >= 0)
                    for (int i = 0; i < g.size(); ++i) grads[pb][i] -= g[i];
                });
}

Tensor mul(Tape* tp, const Tensor& a, const Tensor& b) {
  return binary(tp, a, b, f_mul, "mul-elementwise",
                [](const Tensor& g, const Tensor& sa, const Tensor& sb, int pa, int pb,
                   std::vector<Tensor>& grads) {
                  if (pa >= 0)
                    for (int i = 0; i < g.size(); ++i) grads[pa][i] += g[i] * sb[i];
                  if (pb >= 0)
                    for (int i = 0; i < g.size(); ++i) grads[pb][i] += g[i] * sa[i];
                });
}

Tensor div(Tape* tp, const Tensor& a, const Tensor& b) {
  return binary(tp, a, b, f_div, "div-elementwise",
                [](const Tensor& g, const Tensor& sa, const Tensor& sb, int pa, int pb,
                   std::vector<Tensor>& grads) {
                  for (int i = 0; i < g.size(); ++i) {
                    const double d = sb[i] + (sb[i] >= 0.0 ? kDenomGuard : -kDenomGuard);
                    if (pa >= 0) grads[pa][i] += g[i] / d;
                    if (pb >= 0) grads[pb][i] -= g[i] * sa[i] / (d * d);
                  }
                });
}

Tensor scalar_mul(Tape* tp, const Tensor& a, double c) {
  Tensor out(a.rows(), a.cols());
  kernels::scale(a.data(), out.data(), a.size(), c);
  const int pa = a.node;
  return finish(tp, std::move(out), {pa}, [pa, c](const Tensor& g, std::vector<Tensor>& grads) {
    for (int i = 0; i < g.size(); ++i) grads[pa][i] += g[i] * c;
  });
}

Tensor bias_add(Tape* tp, const Tensor& a, const Tensor& b) {
  if (b.cols() != 1 || b.rows() != a.rows()) shape_error("broadcast-bias-add", a, b);
  Tensor out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j) + b[i];
  const int pa = a.node, pb = b.node;
  return finish(tp, std::move(out), {pa, pb},
                [pa, pb](const Tensor& g, std::vector<Tensor>& grads) {
                  if (pa >= 0) accumulate(grads[pa], g);
                  if (pb >= 0)
                    for (int i = 0; i < g.rows(); ++i) {
                      double acc = 0.0;
                      for (int j = 0; j < g.cols(); ++j) acc += g.at(i, j);
                      grads[pb][i] += acc;
                    }
                });
}

Tensor row_scale(Tape* tp, const Tensor& a, const Tensor& s) {
  if (s.rows() != 1 || s.cols() != a.cols()) shape_error("row-scale", a, s);
  Tensor out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j) * s[j];
  const int pa = a.node, ps = s.node;
  Tensor sa = a, ss = s;
  return finish(tp, std::move(out), {pa, ps},
                [pa, ps, sa = std::move(sa), ss = std::move(ss)](const Tensor& g,
                                                                 std::vector<Tensor>& grads) {
                  if (pa >= 0)
                    for (int i = 0; i < g.rows(); ++i)
                      for (int j = 0; j < g.cols(); ++j) grads[pa].at(i, j) += g.at(i, j) * ss[j];
                  if (ps >= 0)
                    for (int j = 0; j < g.cols(); ++j) {
                      double acc = 0.0;
                      for (int i = 0; i < g.rows(); ++i) acc += g.at(i, j) * sa.at(i, j);
                      grads[ps][j] += acc;
                    }
                });
}

Tensor dot(Tape* tp, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b) || a.cols() != 1) shape_error("dot", a, b);
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  const int pa = a.node, pb = b.node;
  Tensor sa = a, sb = b;
  return finish(tp, Tensor::scalar(acc), {pa, pb},
                [pa, pb, sa = std::move(sa), sb = std::move(sb)](const Tensor& g,
                                                                 std::vector<Tensor>& grads) {
                  const double gs = g[0];
                  if (pa >= 0)
                    for (int i = 0; i < sa.size(); ++i) grads[pa][i] += gs * sb[i];
                  if (pb >= 0)
                    for (int i = 0; i < sb.size(); ++i) grads[pb][i] += gs * sa[i];
                });
}

Tensor l2_norm(Tape* tp, const Tensor& a) {
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) acc += a[i] * a[i];
  const double norm = std::sqrt(acc);
  const int pa = a.node;
  Tensor sa = a;
  return finish(tp, Tensor::scalar(norm), {pa},
                [pa, sa = std::move(sa), norm](const Tensor& g, std::vector<Tensor>& grads) {
                  const double c = g[0] / (norm + kDenomGuard);
                  for (int i = 0; i < sa.size(); ++i) grads[pa][i] += c * sa[i];
                });
}

Tensor sum(Tape* tp, const Tensor& a) {
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) acc += a[i];
  const int pa = a.node;
  return finish(tp, Tensor::scalar(acc), {pa}, [pa](const Tensor& g, std::vector<Tensor>& grads) {
    const double gs = g[0];
    Tensor& ga = grads[pa];
    for (int i = 0; i < ga.size(); ++i) ga[i] += gs;
  });
}

Tensor diag(Tape* tp, const Tensor& a) {
  if (a.rows() != a.cols()) shape_error("diag", a);
  Tensor out(a.rows(), 1);
  for (int i = 0; i < a.rows(); ++i) out[i] = a.at(i, i);
  const int pa = a.node;
  return finish(tp, std::move(out), {pa}, [pa](const Tensor& g, std::vector<Tensor>& grads) {
    for (int i = 0; i < g.rows(); ++i) grads[pa].at(i, i) += g[i];
  });
}

Tensor reshape(Tape* tp, const Tensor& a, int rows, int cols) {
  if (rows * cols != a.size())
    throw std::invalid_argument("reshape: cannot view " + a.shape_str() + " as [" +
                                std::to_string(rows) + "," + std::to_string(cols) + "]");
  Tensor out(rows, cols, a.values());
  const int pa = a.node;
  const int ar = a.rows(), ac = a.cols();
  return finish(tp, std::move(out), {pa}, [pa, ar, ac](const Tensor& g, std::vector<Tensor>& grads) {
    accumulate(grads[pa], Tensor(ar, ac, g.values()));
  });
}

Tensor embed_cols(Tape* tp, const Tensor& emb, const std::vector<int>& ids) {
  const int d = emb.cols(), n = static_cast<int>(ids.size());
  if (n == 0) throw std::invalid_argument("embed-cols: empty id list");
  for (int id : ids)
    if (id < 0 || id >= emb.rows())
      throw std::invalid_argument("embed-cols: id " + std::to_string(id) +
                                  " outside table of " + std::to_string(emb.rows()) + " rows");
  Tensor out(d, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i) out.at(i, j) = emb.at(ids[j], i);
  const int pe = emb.node;
  return finish(tp, std::move(out), {pe}, [pe, ids](const Tensor& g, std::vector<Tensor>& grads) {
    for (int j = 0; j < g.cols(); ++j)
      for (int i = 0; i < g.rows(); ++i) grads[pe].at(ids[j], i) += g.at(i, j);
  });
}

// ---- Generic dispatch ----

Kernel kernel_from_name(std::string_view name) {
  static const std::unordered_map<std::string_view, Kernel> table = {
      {"matmul", Kernel::MatMul},
      {"transpose", Kernel::Transpose},
      {"concat-rows", Kernel::ConcatRows},
      {"concat-cols", Kernel::ConcatCols},
      {"slice-cols", Kernel::SliceCols},
      {"row-mean", Kernel::RowMean},
      {"col-mean", Kernel::ColMean},
      {"softmax-over-axis", Kernel::SoftmaxOverAxis},
      {"log", Kernel::Log},
      {"exp", Kernel::Exp},
      {"softplus", Kernel::Softplus},
      {"tanh", Kernel::Tanh},
      {"add", Kernel::Add},
      {"sub", Kernel::Sub},
      {"mul-elementwise", Kernel::MulElementwise},
      {"div-elementwise", Kernel::DivElementwise},
      {"scalar-mul", Kernel::ScalarMul},
      {"broadcast-bias-add", Kernel::BroadcastBiasAdd},
      {"dot", Kernel::Dot},
      {"l2-norm", Kernel::L2Norm},
      {"hinge", Kernel::Hinge},
      {"square", Kernel::Square},
      {"sum", Kernel::Sum},
      {"negate", Kernel::Negate},
  };
  auto it = table.find(name);
  if (it == table.end())
    throw std::invalid_argument("unknown kernel id: " + std::string(name));
  return it->second;
}

Tensor forward_kernel(Tape* tp, Kernel kind, std::span<const Tensor> in, const KernelArgs& args) {
  auto need = [&](size_t n) {
    if (in.size() != n)
      throw std::invalid_argument("forward_kernel: expected " + std::to_string(n) +
                                  " inputs, got " + std::to_string(in.size()));
  };
  switch (kind) {
    case Kernel::MatMul: need(2); return matmul(tp, in[0], in[1]);
    case Kernel::Transpose: need(1); return transpose(tp, in[0]);
    case Kernel::ConcatRows: need(2); return concat_rows(tp, in[0], in[1]);
    case Kernel::ConcatCols: need(2); return concat_cols(tp, in[0], in[1]);
    case Kernel::SliceCols: need(1); return slice_cols(tp, in[0], args.c0, args.c1);
    case Kernel::RowMean: need(1); return row_mean(tp, in[0]);
    case Kernel::ColMean: need(1); return col_mean(tp, in[0]);
    case Kernel::SoftmaxOverAxis: need(1); return softmax(tp, in[0], args.axis);
    case Kernel::Log: need(1); return log(tp, in[0]);
    case Kernel::Exp: need(1); return exp(tp, in[0]);
    case Kernel::Softplus: need(1); return softplus(tp, in[0]);
    case Kernel::Tanh: need(1); return tanh(tp, in[0]);
    case Kernel::Add: need(2); return add(tp, in[0], in[1]);
    case Kernel::Sub: need(2); return sub(tp, in[0], in[1]);
    case Kernel::MulElementwise: need(2); return mul(tp, in[0], in[1]);
    case Kernel::DivElementwise: need(2); return div(tp, in[0], in[1]);
    case Kernel::ScalarMul: need(1); return scalar_mul(tp, in[0], args.scale);
    case Kernel::BroadcastBiasAdd: need(2); return bias_add(tp, in[0], in[1]);
    case Kernel::Dot: need(2); return dot(tp, in[0], in[1]);
    case Kernel::L2Norm: need(1); return l2_norm(tp, in[0]);
    case Kernel::Hinge: need(1); return hinge(tp, in[0]);
    case Kernel::Square: need(1); return square(tp, in[0]);
    case Kernel::Sum: need(1); return sum(tp, in[0]);
    case Kernel::Negate: need(1); return negate(tp, in[0]);
  }
  throw std::invalid_argument("unknown kernel id");
}

}  // namespace mgv
