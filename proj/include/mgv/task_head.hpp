#pragma once

#include <vector>

#include "mgv/encoders.hpp"
#include "mgv/ops.hpp"
#include "mgv/param_store.hpp"

namespace mgv {

struct TaskHeadConfig {
  int d = 32;
  int entity_dim = 64;  // 2d for MET, 3d for MRE
  int h = 16;           // shared semantic space dimension
};

inline int entity_dim_for(Task task, int d) { return (task == Task::MET ? 2 : 3) * d; }

// Creates head.Wa/head.ba (attention) and head.W1/b1, head.W2/b2 (the two
// projections into the shared space).
void init_task_head_params(ParamStore& params, const TaskHeadConfig& cfg, Rng& rng);

// Entity-aware attention over the fused token columns:
// alpha = softmax_i(Wa^T [h_i (+) E] + ba), U = sum_i alpha_i h_i. [d,1].
Tensor attention_fuse(Tape* tp, const ParamStore& params, const Tensor& h, const Tensor& entity);

// U-tilde = [U (+) E], [d + |E|, 1].
inline Tensor fuse_entity(Tape* tp, const Tensor& u, const Tensor& entity) {
  return concat_rows(tp, u, entity);
}

// Projects U-tilde and the prototype matrix [d, C] into the shared space.
struct SharedSpace {
  Tensor u_hat;       // [h, 1]
  Tensor proto_hats;  // [h, C]
};
SharedSpace project_shared(Tape* tp, const ParamStore& params, const Tensor& u_tilde,
                           const Tensor& prototypes);

// o_i = U-hat . R-hat_i in category order, [1, C].
Tensor score_categories(Tape* tp, const Tensor& u_hat, const Tensor& proto_hats);

// Max-margin ranking: sum over non-gold i of max(0, 1 - o+ + o_i).
Tensor ranking_loss(Tape* tp, const Tensor& scores, int gold_index);

// Argmax with ties broken toward the lowest category index.
int predict(const Tensor& scores);

}  // namespace mgv
