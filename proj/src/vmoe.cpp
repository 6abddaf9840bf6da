#include "mgv/vmoe.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mgv {

namespace {
std::string expert_name(int i, const char* suffix) {
  return "vmoe.e" + std::to_string(i) + "." + suffix;
}
constexpr double kSigmaFloor = 1e-6;
}  // namespace

void init_vmoe_params(ParamStore& params, const VmoeConfig& cfg, Rng& rng) {
  if (cfg.experts < 1) throw std::invalid_argument("vmoe: K must be >= 1");
  const double s = 1.0 / std::sqrt(static_cast<double>(cfg.d));
  const double sigma_bias = std::log(std::exp(1.0) - 1.0);  // softplus(b) = 1
  for (int i = 0; i < cfg.experts; ++i) {
    // Near-identity mean maps: the fused output starts close to the raw
    // multimodal features instead of a random mix, so the downstream head sees
    // a sensible signal from the first batch on. The small per-expert noise
    // keeps experts from staying interchangeable.
    Tensor wmu = sample_uniform(rng, cfg.d, cfg.d, -0.1 * s, 0.1 * s);
    for (int r = 0; r < cfg.d; ++r) wmu.at(r, r) += 1.0;
    params.create(expert_name(i, "Wmu"), std::move(wmu));
    params.create(expert_name(i, "bmu"), Tensor(cfg.d, 1));
    params.create(expert_name(i, "Wsig"), sample_uniform(rng, cfg.d, cfg.d, -s, s));
    params.create(expert_name(i, "bsig"), Tensor::full(cfg.d, 1, sigma_bias));
  }
  params.create("vmoe.router.Wg", sample_uniform(rng, cfg.d, cfg.experts, -s, s));
  params.create("vmoe.router.bg", Tensor(cfg.experts, 1));
}

Tensor concat_modalities(Tape* tp, const Tensor& visual, const Tensor& textual) {
  if (visual.rows() != textual.rows())
    throw std::invalid_argument("concat_modalities: feature dims differ, " + visual.shape_str() +
                                " vs " + textual.shape_str());
  return concat_cols(tp, visual, textual);
}

ExpertOut expert_forward(Tape* tp, const ParamStore& params, int expert, const Tensor& m,
                         VmoeMode mode, const Tensor* eps) {
  ExpertOut out;
  out.mu = dense(tp, params.get(expert_name(expert, "Wmu")),
                 params.get(expert_name(expert, "bmu")), m);
  Tensor pre = dense(tp, params.get(expert_name(expert, "Wsig")),
                     params.get(expert_name(expert, "bsig")), m);
  out.sigma = add(tp, softplus(tp, pre), Tensor::full(pre.rows(), pre.cols(), kSigmaFloor));
  if (mode == VmoeMode::Train) {
    if (eps == nullptr)
      throw std::invalid_argument("expert_forward: train mode needs a noise tensor");
    if (!eps->same_shape(out.mu))
      throw std::invalid_argument("expert_forward: noise shape " + eps->shape_str() +
                                  " does not match " + out.mu.shape_str());
    out.z = add(tp, out.mu, mul(tp, out.sigma, *eps));
  } else {
    out.z = out.mu;
  }
  return out;
}

Tensor router_forward(Tape* tp, const ParamStore& params, const Tensor& m) {
  const Tensor& wg = params.get("vmoe.router.Wg");
  const Tensor& bg = params.get("vmoe.router.bg");
  Tensor logits = bias_add(tp, matmul(tp, transpose(tp, wg), m), bg);
  return softmax(tp, logits, 0);
}

VmoeOutput vmoe_forward(Tape* tp, const ParamStore& params, const VmoeConfig& cfg,
                        const Tensor& visual, const Tensor& textual, VmoeMode mode,
                        const std::vector<Tensor>* eps, std::optional<int> forced_expert) {
  Tensor m = concat_modalities(tp, visual, textual);
  VmoeOutput out;
  out.visual_cols = visual.cols();

  if (forced_expert) {
    const int k = *forced_expert;
    if (k < 0 || k >= cfg.experts)
      throw std::invalid_argument("vmoe_forward: forced expert out of range");
    Tensor g(cfg.experts, m.cols());
    for (int j = 0; j < m.cols(); ++j) g.at(k, j) = 1.0;
    out.gating = g;
  } else {
    out.gating = router_forward(tp, params, m);
  }

  for (int i = 0; i < cfg.experts; ++i) {
    const Tensor* e = (mode == VmoeMode::Train && eps != nullptr) ? &(*eps)[i] : nullptr;
    ExpertOut ex = expert_forward(tp, params, i, m, mode, e);
    Tensor gi = slice_rows(tp, out.gating, i, i + 1);
    Tensor weighted = row_scale(tp, ex.z, gi);
    out.h = (i == 0) ? weighted : add(tp, out.h, weighted);
    out.mu.push_back(std::move(ex.mu));
    out.sigma.push_back(std::move(ex.sigma));
    out.z.push_back(std::move(ex.z));
  }
  return out;
}

Tensor aux_loss(Tape* tp, const Tensor& gating) {
  const int tokens = gating.cols();
  Tensor entropy = negate(tp, sum(tp, xlogx(tp, gating)));
  return scalar_mul(tp, entropy, 1.0 / tokens);
}

Tensor reg_loss(Tape* tp, const std::vector<Tensor>& mu, const std::vector<Tensor>& sigma) {
  if (mu.size() != sigma.size() || mu.empty())
    throw std::invalid_argument("reg_loss: need matching non-empty mu/sigma lists");
  Tensor total = Tensor::scalar(0.0);
  bool first = true;
  for (size_t i = 0; i < mu.size(); ++i) {
    for (int j = 0; j < sigma[i].size(); ++j)
      if (sigma[i][j] <= 0.0)
        throw std::invalid_argument("reg_loss: sigma must be positive");
    // sum over coordinates of (mu^2 + sigma^2 - 1 - log sigma^2) / 2
    Tensor sq = add(tp, square(tp, mu[i]), square(tp, sigma[i]));
    Tensor kl = scalar_mul(tp, sum(tp, sq), 0.5);
    kl = sub(tp, kl, Tensor::scalar(0.5 * mu[i].size()));
    kl = sub(tp, kl, sum(tp, mgv::log(tp, sigma[i])));
    total = first ? kl : add(tp, total, kl);
    first = false;
  }
  return total;
}

}  // namespace mgv
