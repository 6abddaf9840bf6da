#pragma once

#include <vector>

#include "mgv/ops.hpp"
#include "mgv/rng.hpp"
#include "mgv/vmoe.hpp"

namespace mgv {

// Per-sample global pooling of a fused output: V-bar and T-bar are the column
// means of the visual/textual halves, H-bar their concatenation [2d,1].
struct SampleGlobals {
  Tensor v_bar;
  Tensor t_bar;
  Tensor h_bar;
};

SampleGlobals global_pool(Tape* tp, const VmoeOutput& out);

// Stacks N per-sample H-bar columns into P [2d, N].
Tensor stack_globals(Tape* tp, const std::vector<SampleGlobals>& batch);

// Symmetric InfoNCE over the batch with raw dot-product similarity; each
// unordered similarity entry T-bar_i . V-bar_j. N = 1 gives exactly 0.
Tensor contrastive_loss(Tape* tp, const std::vector<SampleGlobals>& batch);

// Sample correlation graph a_ij = (1 + cos(H_i, H_j)) / 2, computed once per
// unordered pair from the *values* of P (gradients are blocked by design).
// Diagonal is exactly 1 for nonzero columns.
Tensor build_graph(const Tensor& p_values);

// P-hat = P A (relevant aggregation) and P-hat' = P (1 - A); A is a constant.
struct Aggregated {
  Tensor relevant;
  Tensor irrelevant;
};
Aggregated aggregate(Tape* tp, const Tensor& p, const Tensor& graph);

// Per-sample 2-way softmax over (relevant dot, irrelevant dot), [2, N].
Tensor correlation_scores(Tape* tp, const Tensor& p, const Tensor& graph);

// KL(target || scores(P + tau)) summed over the batch, with the clean-score
// target and the graph both treated as constants. tau is added to every
// column of P.
Tensor vat_loss(Tape* tp, const Tensor& p, const Tensor& graph, const Tensor& target_scores,
                const Tensor& tau);

// Convenience wrapper computing the target from the values of p.
Tensor vat_loss(Tape* tp, const Tensor& p, const Tensor& graph, const Tensor& tau);

// One-step (configurable) approximation of the worst-case perturbation:
// probe with a random direction of norm xi, take the normalized gradient of
// the VAT loss, and rescale to norm eps. Falls back to a random direction on
// a flat landscape. Returned vector has L2 norm exactly eps.
Tensor solve_perturbation(const Tensor& p_values, const Tensor& graph, double eps, double xi,
                          Rng& rng, int steps = 1);

}  // namespace mgv
