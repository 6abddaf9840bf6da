#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "mgv/tape.hpp"
#include "mgv/tensor.hpp"

namespace mgv {

// Differentiable tensor kernels. Every op takes the recording tape first;
// pass nullptr for a pure forward evaluation. Inputs whose `node` is -1 are
// constants and receive no gradient.
//
// Conventions: matrices are row-major [rows, cols]; data columns are tokens
// or samples; vectors are [n,1]; scalars [1,1]. All divisions and norm
// denominators are guarded with kDenomGuard.

Tensor matmul(Tape* tp, const Tensor& a, const Tensor& b);
Tensor transpose(Tape* tp, const Tensor& a);

Tensor concat_rows(Tape* tp, const Tensor& a, const Tensor& b);
Tensor concat_cols(Tape* tp, const Tensor& a, const Tensor& b);
Tensor slice_rows(Tape* tp, const Tensor& a, int r0, int r1);  // [r0, r1)
Tensor slice_cols(Tape* tp, const Tensor& a, int c0, int c1);  // [c0, c1)

Tensor row_mean(Tape* tp, const Tensor& a);  // [m,n] -> [m,1], mean over columns
Tensor col_mean(Tape* tp, const Tensor& a);  // [m,n] -> [1,n], mean over rows

// axis 0: softmax over the rows of each column; axis 1: over the columns of each row.
Tensor softmax(Tape* tp, const Tensor& a, int axis);

Tensor log(Tape* tp, const Tensor& a);       // log(x + guard), x >= 0 expected
Tensor exp(Tape* tp, const Tensor& a);
Tensor softplus(Tape* tp, const Tensor& a);
Tensor tanh(Tape* tp, const Tensor& a);
Tensor hinge(Tape* tp, const Tensor& a);     // max(0, x); subgradient at 0 is 0
Tensor square(Tape* tp, const Tensor& a);
Tensor negate(Tape* tp, const Tensor& a);
Tensor xlogx(Tape* tp, const Tensor& a);     // x log x with 0 log 0 = 0

Tensor add(Tape* tp, const Tensor& a, const Tensor& b);
Tensor sub(Tape* tp, const Tensor& a, const Tensor& b);
Tensor mul(Tape* tp, const Tensor& a, const Tensor& b);
Tensor div(Tape* tp, const Tensor& a, const Tensor& b);  // a / (b + guard)
Tensor scalar_mul(Tape* tp, const Tensor& a, double c);

// Adds the column vector b [m,1] to every column of a [m,n].
Tensor bias_add(Tape* tp, const Tensor& a, const Tensor& b);
// Scales column j of a [m,n] by s[j]; s is [1,n].
Tensor row_scale(Tape* tp, const Tensor& a, const Tensor& s);

Tensor dot(Tape* tp, const Tensor& a, const Tensor& b);  // [n,1] x [n,1] -> scalar
Tensor l2_norm(Tape* tp, const Tensor& a);               // -> scalar
Tensor sum(Tape* tp, const Tensor& a);                   // -> scalar
Tensor diag(Tape* tp, const Tensor& a);                  // [n,n] -> [n,1]
Tensor reshape(Tape* tp, const Tensor& a, int rows, int cols);

// Embedding lookup: column i of the result is row ids[i] of emb [vocab, d],
// giving [d, n]. Gradient scatter-adds into the looked-up rows.
Tensor embed_cols(Tape* tp, const Tensor& emb, const std::vector<int>& ids);

// Dense layer W x + b with bias broadcast over columns.
inline Tensor dense(Tape* tp, const Tensor& w, const Tensor& b, const Tensor& x) {
  return bias_add(tp, matmul(tp, w, x), b);
}

// ---- Generic kernel dispatch (string-addressable kernel set) ----

enum class Kernel {
  MatMul, Transpose, ConcatRows, ConcatCols, SliceCols, RowMean, ColMean,
  SoftmaxOverAxis, Log, Exp, Softplus, Tanh, Add, Sub, MulElementwise,
  DivElementwise, ScalarMul, BroadcastBiasAdd, Dot, L2Norm, Hinge, Square,
  Sum, Negate,
};

struct KernelArgs {
  int axis = 0;
  int c0 = 0, c1 = 0;     // slice-cols bounds
  double scale = 1.0;     // scalar-mul factor
};

Kernel kernel_from_name(std::string_view name);
Tensor forward_kernel(Tape* tp, Kernel kind, std::span<const Tensor> inputs,
                      const KernelArgs& args = {});

}  // namespace mgv
