#include "mgv/mgvat.hpp"

#include <cmath>
#include <stdexcept>

#include "mgv/tape.hpp"

namespace mgv {

SampleGlobals global_pool(Tape* tp, const VmoeOutput& out) {
  if (out.visual_cols <= 0 || out.visual_cols >= out.h.cols())
    throw std::invalid_argument("global_pool: modality split inconsistent with H " +
                                out.h.shape_str());
  SampleGlobals g;
  g.v_bar = row_mean(tp, out.visual(tp));
  g.t_bar = row_mean(tp, out.textual(tp));
  g.h_bar = concat_rows(tp, g.v_bar, g.t_bar);
  return g;
}

Tensor stack_globals(Tape* tp, const std::vector<SampleGlobals>& batch) {
  if (batch.empty()) throw std::invalid_argument("stack_globals: empty batch");
  Tensor p = batch[0].h_bar;
  for (size_t i = 1; i < batch.size(); ++i) p = concat_cols(tp, p, batch[i].h_bar);
  return p;
}

Tensor contrastive_loss(Tape* tp, const std::vector<SampleGlobals>& batch) {
  const int n = static_cast<int>(batch.size());
  if (n < 1) throw std::invalid_argument("contrastive_loss: empty batch");
  if (n == 1) return Tensor::scalar(0.0);  // log(e^x / e^x)

  Tensor tbar = batch[0].t_bar, vbar = batch[0].v_bar;
  for (int i = 1; i < n; ++i) {
    tbar = concat_cols(tp, tbar, batch[i].t_bar);
    vbar = concat_cols(tp, vbar, batch[i].v_bar);
  }
  // sim[i][j] = T-bar_i . V-bar_j
  Tensor sim = matmul(tp, transpose(tp, tbar), vbar);
  Tensor text_to_image = diag(tp, softmax(tp, sim, 1));  // over j per row i
  Tensor image_to_text = diag(tp, softmax(tp, sim, 0));  // over i per column j
  Tensor total = add(tp, sum(tp, mgv::log(tp, text_to_image)),
                     sum(tp, mgv::log(tp, image_to_text)));
  return scalar_mul(tp, negate(tp, total), 0.5);
}

Tensor build_graph(const Tensor& p_values) {
  const int n = p_values.cols(), d = p_values.rows();
  std::vector<double> norms(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += p_values.at(i, j) * p_values.at(i, j);
    norms[j] = std::sqrt(acc);
  }
  Tensor a(n, n);
  for (int i = 0; i < n; ++i) {
    a.at(i, i) = norms[i] > 0.0 ? 1.0 : 0.5;  // self-cosine
    for (int j = i + 1; j < n; ++j) {
      double dotp = 0.0;
      for (int r = 0; r < d; ++r) dotp += p_values.at(r, i) * p_values.at(r, j);
      const double cosv = dotp / ((norms[i] + kDenomGuard) * (norms[j] + kDenomGuard));
      const double val = (1.0 + cosv) / 2.0;
      a.at(i, j) = val;
      a.at(j, i) = val;  // computed once per unordered pair
    }
  }
  return a;
}

Aggregated aggregate(Tape* tp, const Tensor& p, const Tensor& graph) {
  if (graph.rows() != p.cols() || graph.cols() != p.cols())
    throw std::invalid_argument("aggregate: graph " + graph.shape_str() +
                                " does not match P " + p.shape_str());
  Tensor complement(graph.rows(), graph.cols());
  for (int i = 0; i < graph.size(); ++i) complement[i] = 1.0 - graph[i];
  Aggregated out;
  out.relevant = matmul(tp, p, graph);
  out.irrelevant = matmul(tp, p, complement);
  return out;
}

Tensor correlation_scores(Tape* tp, const Tensor& p, const Tensor& graph) {
  Aggregated agg = aggregate(tp, p, graph);
  Tensor pt = transpose(tp, p);
  Tensor rel = diag(tp, matmul(tp, pt, agg.relevant));      // [N,1]
  Tensor irr = diag(tp, matmul(tp, pt, agg.irrelevant));
  Tensor two = concat_rows(tp, transpose(tp, rel), transpose(tp, irr));  // [2,N]
  return softmax(tp, two, 0);
}

Tensor vat_loss(Tape* tp, const Tensor& p, const Tensor& graph, const Tensor& target_scores,
                const Tensor& tau) {
  if (tau.rows() != p.rows() || tau.cols() != 1)
    throw std::invalid_argument("vat_loss: tau " + tau.shape_str() + " does not match P " +
                                p.shape_str());
  Tensor perturbed = bias_add(tp, p, tau);
  Tensor scores = correlation_scores(tp, perturbed, graph);
  // KL(target || scores); the target distribution is a constant.
  Tensor target = target_scores;
  target.node = -1;
  Tensor kl = sum(tp, mul(tp, target, sub(tp, mgv::log(tp, target), mgv::log(tp, scores))));
  return kl;
}

Tensor vat_loss(Tape* tp, const Tensor& p, const Tensor& graph, const Tensor& tau) {
  Tensor detached = p;
  detached.node = -1;
  Tensor target = correlation_scores(nullptr, detached, graph);
  return vat_loss(tp, p, graph, target, tau);
}

Tensor solve_perturbation(const Tensor& p_values, const Tensor& graph, double eps, double xi,
                          Rng& rng, int steps) {
  const int dim = p_values.rows();
  if (p_values.cols() < 2) return Tensor(dim, 1);  // scores are constant, tau := 0

  Tensor p = p_values;
  p.node = -1;
  Tensor target = correlation_scores(nullptr, p, graph);

  auto random_unit = [&]() {
    Tensor r = sample_gaussian(rng, dim, 1);
    double norm = 0.0;
    for (int i = 0; i < dim; ++i) norm += r[i] * r[i];
    norm = std::sqrt(norm) + kDenomGuard;
    for (int i = 0; i < dim; ++i) r[i] /= norm;
    return r;
  };

  Tensor probe = random_unit();
  for (int i = 0; i < dim; ++i) probe[i] *= xi;

  for (int s = 0; s < std::max(1, steps); ++s) {
    Tape tape;
    Tensor tau = probe;
    tape.watch(tau);
    Tensor loss = vat_loss(&tape, p, graph, target, tau);
    Tensor g = backward(tape, loss).wrt(tau);
    double gnorm = 0.0;
    for (int i = 0; i < dim; ++i) gnorm += g[i] * g[i];
    gnorm = std::sqrt(gnorm);
    if (gnorm <= kDenomGuard) {
      // Flat landscape; fall back to a random direction of the target norm.
      Tensor r = random_unit();
      for (int i = 0; i < dim; ++i) r[i] *= eps;
      return r;
    }
    const bool last = s == std::max(1, steps) - 1;
    const double scale = (last ? eps : xi) / gnorm;  // gnorm > guard here
    for (int i = 0; i < dim; ++i) probe[i] = g[i] * scale;
  }
  return probe;
}

}  // namespace mgv
