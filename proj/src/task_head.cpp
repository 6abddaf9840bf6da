#include "mgv/task_head.hpp"

#include <cmath>
#include <stdexcept>

namespace mgv {

void init_task_head_params(ParamStore& params, const TaskHeadConfig& cfg, Rng& rng) {
  const int de = cfg.d + cfg.entity_dim;
  const double sa = 1.0 / std::sqrt(static_cast<double>(de));
  params.create("head.Wa", sample_uniform(rng, de, 1, -sa, sa));
  params.create("head.ba", Tensor(1, 1));
  const double sp = 1.0 / std::sqrt(static_cast<double>(cfg.d));
  const Tensor& w2 = params.create("head.W2", sample_uniform(rng, cfg.h, cfg.d, -sp, sp));
  params.create("head.b2", Tensor(cfg.h, 1));

  // Start the two projections tied: W1 copies W2 over the entity-token blocks
  // of [U; E] and zeroes the fused and [CLS] blocks, so the initial score
  // u-hat . r-hat is a positive-semidefinite similarity between entity tokens
  // and prototypes instead of a random bilinear map. Entity blocks are the
  // last (de/d - 2) d-sized blocks; the first two are the fused vector and
  // [CLS], which carry no category-name content.
  Tensor w1(cfg.h, de);
  if (de % cfg.d == 0 && de / cfg.d >= 3) {
    for (int r = 0; r < cfg.h; ++r)
      for (int c = 2 * cfg.d; c < de; ++c) w1.at(r, c) = w2.at(r, c % cfg.d);
  } else {
    w1 = sample_uniform(rng, cfg.h, de, -sa, sa);
  }
  params.create("head.W1", std::move(w1));
  params.create("head.b1", Tensor(cfg.h, 1));
}

Tensor attention_fuse(Tape* tp, const ParamStore& params, const Tensor& h, const Tensor& entity) {
  const Tensor& wa = params.get("head.Wa");
  const Tensor& ba = params.get("head.ba");
  if (h.rows() + entity.rows() != wa.rows())
    throw std::invalid_argument("attention_fuse: Wa expects dim " + std::to_string(wa.rows()) +
                                ", got " + std::to_string(h.rows() + entity.rows()));
  // Stack E under every token column, then one shared linear scoring pass.
  Tensor ones(1, h.cols());
  for (int j = 0; j < h.cols(); ++j) ones[j] = 1.0;
  Tensor entity_cols = matmul(tp, entity, ones);            // [|E|, n]
  Tensor stacked = concat_rows(tp, h, entity_cols);         // [d+|E|, n]
  Tensor logits = bias_add(tp, matmul(tp, transpose(tp, wa), stacked), ba);  // [1, n]
  Tensor alpha = softmax(tp, logits, 1);
  return matmul(tp, h, transpose(tp, alpha));               // [d, 1]
}

SharedSpace project_shared(Tape* tp, const ParamStore& params, const Tensor& u_tilde,
                           const Tensor& prototypes) {
  SharedSpace out;
  out.u_hat = dense(tp, params.get("head.W1"), params.get("head.b1"), u_tilde);
  out.proto_hats = dense(tp, params.get("head.W2"), params.get("head.b2"), prototypes);
  return out;
}

Tensor score_categories(Tape* tp, const Tensor& u_hat, const Tensor& proto_hats) {
  if (u_hat.rows() != proto_hats.rows())
    throw std::invalid_argument("score_categories: shared dims differ, " + u_hat.shape_str() +
                                " vs " + proto_hats.shape_str());
  return matmul(tp, transpose(tp, u_hat), proto_hats);  // [1, C]
}

Tensor ranking_loss(Tape* tp, const Tensor& scores, int gold_index) {
  const int c = scores.cols();
  if (scores.rows() != 1 || c < 1)
    throw std::invalid_argument("ranking_loss: scores must be [1,C], got " + scores.shape_str());
  if (gold_index < 0 || gold_index >= c)
    throw std::invalid_argument("ranking_loss: gold index out of range");
  Tensor gold = slice_cols(tp, scores, gold_index, gold_index + 1);  // [1,1]
  Tensor shifted = bias_add(tp, scores, negate(tp, gold));           // o_i - o+
  Tensor margins = hinge(tp, add(tp, shifted, Tensor::full(1, c, 1.0)));
  Tensor mask(1, c);  // zero out the gold term
  for (int i = 0; i < c; ++i) mask[i] = i == gold_index ? 0.0 : 1.0;
  return sum(tp, mul(tp, margins, mask));
}

int predict(const Tensor& scores) {
  if (scores.size() < 1) throw std::invalid_argument("predict: empty scores");
  int best = 0;
  for (int i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

}  // namespace mgv
