#include "mgv/tape.hpp"

namespace mgv {

Gradients backward(const Tape& tape, const Tensor& loss) {
  if (!loss.is_scalar())
    throw std::invalid_argument("backward: loss must be a scalar, got " + loss.shape_str());
  if (loss.node < 0 || loss.node >= tape.size())
    throw std::invalid_argument("backward: loss was not recorded on this tape");

  std::vector<Tensor> grads;
  grads.reserve(tape.size());
  for (int i = 0; i < tape.size(); ++i) grads.emplace_back(tape.node_rows(i), tape.node_cols(i));

  grads[loss.node][0] = 1.0;
  for (int i = loss.node; i >= 0; --i) {
    const auto& fn = tape.backward_fn(i);
    if (fn) fn(grads[i], grads);
  }
  return Gradients(std::move(grads));
}

}  // namespace mgv
