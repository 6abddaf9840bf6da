#pragma once

#include <optional>
#include <vector>

#include "mgv/ops.hpp"
#include "mgv/param_store.hpp"
#include "mgv/rng.hpp"

namespace mgv {

enum class VmoeMode { Train, Infer };

struct VmoeConfig {
  int d = 32;
  int experts = 8;  // K
};

// Output of one VMoE pass over M = [V; T] (d x (|V|+|T|) columns).
struct VmoeOutput {
  Tensor h;                 // fused tokens, d x n
  std::vector<Tensor> mu;   // per expert
  std::vector<Tensor> sigma;
  std::vector<Tensor> z;
  Tensor gating;            // K x n, column-stochastic
  int visual_cols = 0;      // |V|; textual columns follow

  Tensor visual(Tape* tp) const { return slice_cols(tp, h, 0, visual_cols); }
  Tensor textual(Tape* tp) const { return slice_cols(tp, h, visual_cols, h.cols()); }
};

// Creates per-expert mu/sigma dense layers and the router weights.
// The sigma bias starts at softplus^-1(1) so the latent begins near the prior.
void init_vmoe_params(ParamStore& params, const VmoeConfig& cfg, Rng& rng);

// M = [V; T], visual columns first (the ordering is load-bearing for the
// later split back into modalities).
Tensor concat_modalities(Tape* tp, const Tensor& visual, const Tensor& textual);

// mu = dense_mu(M), sigma = softplus(dense_sigma(M)) + 1e-6.
// Train mode draws Z = mu + sigma .* eps; infer mode returns Z = mu.
struct ExpertOut {
  Tensor mu, sigma, z;
};
ExpertOut expert_forward(Tape* tp, const ParamStore& params, int expert, const Tensor& m,
                         VmoeMode mode, const Tensor* eps);

// Column-wise softmax over the K router logits per token.
Tensor router_forward(Tape* tp, const ParamStore& params, const Tensor& m);

// Full pass: experts, router, fused H = sum_i Z_i .* G_i. `eps` supplies one
// noise tensor per expert in train mode (drawn by the caller so noise can be
// frozen for gradient checks). `forced_expert`, when set, replaces G with a
// one-hot gating at that expert.
VmoeOutput vmoe_forward(Tape* tp, const ParamStore& params, const VmoeConfig& cfg,
                        const Tensor& visual, const Tensor& textual, VmoeMode mode,
                        const std::vector<Tensor>* eps = nullptr,
                        std::optional<int> forced_expert = std::nullopt);

// Mean over tokens of the per-token gating entropy (0 log 0 = 0).
Tensor aux_loss(Tape* tp, const Tensor& gating);

// Sum over experts and coordinates of KL(N(mu, sigma^2) || N(0, I)).
Tensor reg_loss(Tape* tp, const std::vector<Tensor>& mu, const std::vector<Tensor>& sigma);

}  // namespace mgv
