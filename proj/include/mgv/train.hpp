#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mgv/data.hpp"
#include "mgv/encoders.hpp"
#include "mgv/metrics.hpp"
#include "mgv/mgvat.hpp"
#include "mgv/param_store.hpp"
#include "mgv/task_head.hpp"
#include "mgv/vmoe.hpp"

namespace mgv {

struct TrainConfig {
  double beta = 1.0;
  int experts = 8;
  double lr = 1e-3;
  int batch_size = 16;
  int epochs = 20;
  uint64_t seed = 1;
  int d = 32;
  int h = 32;
  int d_raw = 16;
  int patches = 8;
  int max_len = 24;
  double vat_eps = 0.1;
  double vat_xi = 0.01;
  int vat_steps = 1;
  Task task = Task::MET;
  bool no_vmoe = false;
  bool no_mgvat = false;
  std::string optimizer = "adam";  // or "sgd"
};

// Conservative preset: a learning rate sized for far larger encoders than
// the desk-scale defaults, kept opt-in.
inline TrainConfig paper_preset() {
  TrainConfig cfg;
  cfg.lr = 1e-5;
  return cfg;
}

struct Model {
  TrainConfig config;
  EncoderConfig enc;
  VmoeConfig vmoe;
  TaskHeadConfig head;
  ParamStore params;
};

Model build_model(const TrainConfig& cfg, int vocab_size, Rng& rng);

// Scalar values of the loss components for one batch, after reduction:
// rank and the VMoE terms are batch means, cl is the symmetric batch loss
// divided by N, vat is the batch-level sum.
struct LossParts {
  double l_rank = 0.0, l_aux = 0.0, l_reg = 0.0, l_cl = 0.0, l_vat = 0.0, total = 0.0;
};

// L = L_rank + beta * (L_aux + L_reg + L_cl + L_vat).
double total_loss(const LossParts& parts, double beta);

// Stochastic inputs frozen before the differentiated pass, making the batch
// loss a deterministic function of the parameters.
struct BatchNoise {
  std::vector<std::vector<Tensor>> eps;  // [sample][expert] latent noise
  Tensor graph;                          // [N, N] sample correlation graph
  Tensor targets;                        // [2, N] clean correlation scores
  Tensor tau;                            // [2d, 1] adversarial perturbation
};

std::vector<std::pair<int, std::vector<std::string>>> prototype_names(
    const std::vector<CategorySpec>& categories, const std::vector<int>& ids);

// Value-only forward to the pooled batch matrix, then graph, clean scores and
// the solved perturbation. Draws eps (train mode) and the solver probes.
BatchNoise draw_batch_noise(const Model& model, const Vocabulary& vocab,
                            const std::vector<const Sample*>& batch,
                            const std::vector<std::pair<int, std::vector<std::string>>>& protos,
                            Rng& rng);

// Full differentiable pass: L = L_rank + beta (L_aux + L_reg + L_cl + L_vat).
// no_vmoe bypasses the mixture (H := M) and zeroes aux/reg; no_mgvat zeroes
// cl/vat and ignores the noise graph.
Tensor batch_loss(Tape* tp, const Model& model, const Vocabulary& vocab,
                  const std::vector<const Sample*>& batch,
                  const std::vector<std::pair<int, std::vector<std::string>>>& protos,
                  const BatchNoise& noise, LossParts* parts = nullptr);

struct EpochLog {
  int epoch = 0;
  LossParts loss;  // epoch means of the batch values
  double val_f1 = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  Model model;              // parameters of the best validation epoch
  ParamStore final_params;  // parameters after the last epoch
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_f1 = 0.0;
  uint64_t rng_seed = 0, rng_counter = 0;  // generator state at the end
};

// One optimizer step per batch, perturbation solved first with the parameters
// frozen. Writes one JSON object per epoch to `jsonl` when given. Throws on a
// non-finite loss, naming the offending component.
TrainResult train(const TrainConfig& cfg, const Dataset& ds, const DatasetSplit& split,
                  std::ostream* jsonl = nullptr);

// Inference-mode evaluation against the prototypes of exactly the categories
// listed in `ids` (looked up inside `protos` by category id). Every sample
// label must be one of `ids`.
MetricsReport evaluate(const Model& model, const Vocabulary& vocab,
                       const std::vector<Sample>& samples, const PrototypeSet& protos,
                       const std::vector<int>& ids,
                       std::optional<int> forced_expert = std::nullopt);

// Convenience: encodes prototypes for the given categories first.
MetricsReport evaluate(const Model& model, const Vocabulary& vocab,
                       const std::vector<Sample>& samples,
                       const std::vector<CategorySpec>& categories,
                       std::optional<int> forced_expert = std::nullopt);

// One evaluation per expert with the gating forced one-hot.
std::vector<MetricsReport> expert_report(const Model& model, const Vocabulary& vocab,
                                         const std::vector<Sample>& samples,
                                         const std::vector<CategorySpec>& categories);

// CSV rows: id, label, then the fused entity-aware vector (inference mode).
void export_embeddings(const Model& model, const Vocabulary& vocab,
                       const std::vector<Sample>& samples,
                       const std::vector<CategorySpec>& categories, const std::string& path);

// Checkpoint container: versioned binary with config, rng state and all
// parameter tensors; written atomically (temp file + rename).
struct Checkpoint {
  TrainConfig config;
  ParamStore params;
  uint64_t rng_seed = 0, rng_counter = 0;
};

void save_checkpoint(const std::string& path, const TrainConfig& cfg, const ParamStore& params,
                     uint64_t rng_seed, uint64_t rng_counter);
Checkpoint load_checkpoint(const std::string& path);
Model model_from_checkpoint(const Checkpoint& ckpt);

// Sweep/ablation drivers: one train + unseen-set evaluation per value per
// seed, with the dataset regenerated and re-split per seed.
struct SweepRow {
  std::string setting;  // e.g. "experts=8" or "no_vmoe"
  uint64_t seed = 0;
  MetricsReport unseen;
};

std::vector<SweepRow> sweep_experts(const TrainConfig& base, const DatasetConfig& dcfg,
                                    const std::vector<int>& ks,
                                    const std::vector<uint64_t>& seeds);
std::vector<SweepRow> sweep_beta(const TrainConfig& base, const DatasetConfig& dcfg,
                                 const std::vector<double>& betas,
                                 const std::vector<uint64_t>& seeds);
std::vector<SweepRow> ablate(const TrainConfig& base, const DatasetConfig& dcfg,
                             const std::vector<uint64_t>& seeds);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace mgv
