#include "mgv/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace mgv {

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct SampleOut {
  VmoeOutput fused;
  Tensor u_tilde;  // [d + |E|, 1]
  Tensor scores;   // [1, C]
  int gold = -1;
};

int gold_index(const std::vector<int>& ids, int label) {
  for (size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == label) return static_cast<int>(i);
  throw std::invalid_argument("forward: sample label " + std::to_string(label) +
                              " is not in the prototype category set");
}

SampleOut forward_sample(Tape* tp, const Model& m, const Vocabulary& vocab, const Sample& s,
                         const Tensor& proto_matrix, const std::vector<int>& proto_ids,
                         VmoeMode mode, const std::vector<Tensor>* eps,
                         std::optional<int> forced_expert) {
  SampleOut out;
  TokenSeq seq = tokenize_with_markers(vocab, s.tokens, s.spans, s.task, m.enc);
  Tensor text = encode_text(tp, m.params, m.enc, seq);
  Tensor image = encode_image(tp, m.params, m.enc, s.patches);

  if (m.config.no_vmoe) {
    out.fused.h = concat_modalities(tp, image, text);  // H := M
    out.fused.visual_cols = image.cols();
  } else {
    out.fused = vmoe_forward(tp, m.params, m.vmoe, image, text, mode, eps, forced_expert);
  }

  Tensor textual = out.fused.textual(tp);
  Tensor entity = extract_entity_rep(tp, textual, seq);
  Tensor u = attention_fuse(tp, m.params, out.fused.h, entity);
  out.u_tilde = fuse_entity(tp, u, entity);
  SharedSpace shared = project_shared(tp, m.params, out.u_tilde, proto_matrix);
  out.scores = score_categories(tp, shared.u_hat, shared.proto_hats);
  out.gold = gold_index(proto_ids, s.label);
  return out;
}

Tensor accumulate(Tape* tp, std::optional<Tensor>& acc, const Tensor& term) {
  acc = acc ? add(tp, *acc, term) : term;
  return *acc;
}

}  // namespace

Model build_model(const TrainConfig& cfg, int vocab_size, Rng& rng) {
  Model m;
  m.config = cfg;
  m.enc = EncoderConfig{cfg.d, cfg.d_raw, cfg.patches, cfg.max_len};
  m.vmoe = VmoeConfig{cfg.d, cfg.experts};
  m.head = TaskHeadConfig{cfg.d, entity_dim_for(cfg.task, cfg.d), cfg.h};
  init_encoder_params(m.params, m.enc, vocab_size, rng);
  if (!cfg.no_vmoe) init_vmoe_params(m.params, m.vmoe, rng);
  init_task_head_params(m.params, m.head, rng);
  return m;
}

std::vector<std::pair<int, std::vector<std::string>>> prototype_names(
    const std::vector<CategorySpec>& categories, const std::vector<int>& ids) {
  std::vector<std::pair<int, std::vector<std::string>>> names;
  for (int id : ids) {
    const CategorySpec* found = nullptr;
    for (const CategorySpec& c : categories)
      if (c.id == id) found = &c;
    if (!found)
      throw std::invalid_argument("prototype_names: unknown category id " + std::to_string(id));
    names.emplace_back(id, found->name_tokens);
  }
  return names;
}

BatchNoise draw_batch_noise(const Model& model, const Vocabulary& vocab,
                            const std::vector<const Sample*>& batch,
                            const std::vector<std::pair<int, std::vector<std::string>>>& protos,
                            Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("draw_batch_noise: empty batch");
  BatchNoise noise;
  const int n = static_cast<int>(batch.size());
  const int d2 = 2 * model.config.d;

  for (const Sample* s : batch) {
    std::vector<Tensor> per_expert;
    if (!model.config.no_vmoe) {
      TokenSeq seq = tokenize_with_markers(vocab, s->tokens, s->spans, s->task, model.enc);
      const int cols = model.enc.patches + seq.length();
      for (int k = 0; k < model.config.experts; ++k)
        per_expert.push_back(sample_gaussian(rng, model.config.d, cols));
    }
    noise.eps.push_back(std::move(per_expert));
  }

  if (model.config.no_mgvat) {
    noise.graph = Tensor(n, n);
    noise.targets = Tensor(2, n);
    noise.tau = Tensor(d2, 1);
    return noise;
  }

  // Value-only pass to the pooled batch matrix with the same noise the
  // differentiated pass will see.
  PrototypeSet pset = encode_prototypes(nullptr, model.params, model.enc, vocab, protos);
  Tensor proto_matrix = pset.matrix(nullptr);
  std::vector<SampleGlobals> globals;
  for (int i = 0; i < n; ++i) {
    SampleOut out = forward_sample(nullptr, model, vocab, *batch[i], proto_matrix,
                                   pset.category_ids(), VmoeMode::Train,
                                   model.config.no_vmoe ? nullptr : &noise.eps[i], std::nullopt);
    globals.push_back(global_pool(nullptr, out.fused));
  }
  Tensor p = stack_globals(nullptr, globals);
  noise.graph = build_graph(p);
  noise.targets = correlation_scores(nullptr, p, noise.graph);
  noise.tau = solve_perturbation(p, noise.graph, model.config.vat_eps, model.config.vat_xi, rng,
                                 model.config.vat_steps);
  return noise;
}

double total_loss(const LossParts& parts, double beta) {
  return parts.l_rank + beta * (parts.l_aux + parts.l_reg + parts.l_cl + parts.l_vat);
}

Tensor batch_loss(Tape* tp, const Model& model, const Vocabulary& vocab,
                  const std::vector<const Sample*>& batch,
                  const std::vector<std::pair<int, std::vector<std::string>>>& protos,
                  const BatchNoise& noise, LossParts* parts) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  const int n = static_cast<int>(batch.size());
  const double inv_n = 1.0 / n;

  PrototypeSet pset = encode_prototypes(tp, model.params, model.enc, vocab, protos);
  Tensor proto_matrix = pset.matrix(tp);

  std::optional<Tensor> rank_acc, aux_acc, reg_acc;
  std::vector<SampleGlobals> globals;
  for (int i = 0; i < n; ++i) {
    const std::vector<Tensor>* eps = model.config.no_vmoe ? nullptr : &noise.eps.at(i);
    SampleOut out = forward_sample(tp, model, vocab, *batch[i], proto_matrix,
                                   pset.category_ids(), VmoeMode::Train, eps, std::nullopt);
    accumulate(tp, rank_acc, ranking_loss(tp, out.scores, out.gold));
    if (!model.config.no_vmoe) {
      accumulate(tp, aux_acc, aux_loss(tp, out.fused.gating));
      // The raw KL sums over every latent coordinate of every token, which at
      // beta = 1 would dwarf the per-sample ranking margin and collapse the
      // posterior. Scale to a per-coordinate KL so beta stays interpretable.
      const double numel = static_cast<double>(out.fused.mu.at(0).size());
      accumulate(tp, reg_acc,
                 scalar_mul(tp, reg_loss(tp, out.fused.mu, out.fused.sigma), 1.0 / numel));
    }
    if (!model.config.no_mgvat) globals.push_back(global_pool(tp, out.fused));
  }

  Tensor l_rank = scalar_mul(tp, *rank_acc, inv_n);
  Tensor zero = Tensor::scalar(0.0);
  Tensor l_aux = aux_acc ? scalar_mul(tp, *aux_acc, inv_n) : zero;
  Tensor l_reg = reg_acc ? scalar_mul(tp, *reg_acc, inv_n) : zero;

  Tensor l_cl = zero, l_vat = zero;
  if (!model.config.no_mgvat) {
    l_cl = scalar_mul(tp, contrastive_loss(tp, globals), inv_n);
    Tensor p = stack_globals(tp, globals);
    l_vat = vat_loss(tp, p, noise.graph, noise.targets, noise.tau);
  }

  Tensor weighted = scalar_mul(
      tp, add(tp, add(tp, l_aux, l_reg), add(tp, l_cl, l_vat)), model.config.beta);
  Tensor total = add(tp, l_rank, weighted);

  if (parts) {
    parts->l_rank = l_rank.value();
    parts->l_aux = l_aux.value();
    parts->l_reg = l_reg.value();
    parts->l_cl = l_cl.value();
    parts->l_vat = l_vat.value();
    parts->total = total.value();
  }
  return total;
}

namespace {

void check_finite(const LossParts& parts, int epoch, int batch) {
  const std::pair<const char*, double> named[] = {
      {"l_rank", parts.l_rank}, {"l_aux", parts.l_aux}, {"l_reg", parts.l_reg},
      {"l_cl", parts.l_cl},     {"l_vat", parts.l_vat}, {"total", parts.total}};
  for (const auto& [name, value] : named)
    if (!std::isfinite(value))
      throw std::runtime_error("training diverged: " + std::string(name) +
                               " is not finite at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch));
}

std::vector<CategorySpec> specs_for(const Dataset& ds, const std::vector<int>& ids) {
  std::vector<CategorySpec> out;
  for (int id : ids)
    for (const CategorySpec& c : ds.categories)
      if (c.id == id) out.push_back(c);
  return out;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Dataset& ds, const DatasetSplit& split,
                  std::ostream* jsonl) {
  if (split.train.empty()) throw std::invalid_argument("train: empty training split");

  Rng rng(cfg.seed);
  Model model = build_model(cfg, ds.vocab.size(), rng);
  auto proto_names = prototype_names(ds.categories, split.seen);
  std::vector<CategorySpec> val_specs = specs_for(ds, split.validation);

  TrainResult res;
  res.model = model;  // initialization checkpoint for 0 epochs
  res.best_val_f1 = -1.0;
  long step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto batches = batch_indices(static_cast<int>(split.train.size()), cfg.batch_size, rng, true);
    LossParts epoch_mean;
    for (size_t b = 0; b < batches.size(); ++b) {
      std::vector<const Sample*> batch;
      for (int idx : batches[b]) batch.push_back(&split.train[idx]);

      BatchNoise noise = draw_batch_noise(model, ds.vocab, batch, proto_names, rng);

      Tape tape;
      model.params.watch_all(tape);
      LossParts parts;
      Tensor loss = batch_loss(&tape, model, ds.vocab, batch, proto_names, noise, &parts);
      check_finite(parts, epoch, static_cast<int>(b));

      Gradients grads = backward(tape, loss);
      model.params.zero_grads();
      model.params.accumulate_grads(grads);
      model.params.detach_all();
      ++step;
      if (cfg.optimizer == "sgd")
        model.params.sgd_step(cfg.lr);
      else
        model.params.adam_step(cfg.lr, step);

      epoch_mean.l_rank += parts.l_rank;
      epoch_mean.l_aux += parts.l_aux;
      epoch_mean.l_reg += parts.l_reg;
      epoch_mean.l_cl += parts.l_cl;
      epoch_mean.l_vat += parts.l_vat;
      epoch_mean.total += parts.total;
    }
    const double nb = static_cast<double>(batches.size());
    epoch_mean.l_rank /= nb;
    epoch_mean.l_aux /= nb;
    epoch_mean.l_reg /= nb;
    epoch_mean.l_cl /= nb;
    epoch_mean.l_vat /= nb;
    epoch_mean.total /= nb;

    MetricsReport val = evaluate(model, ds.vocab, split.val, val_specs);
    EpochLog entry{epoch, epoch_mean, val.macro_f1, val.accuracy};
    res.log.push_back(entry);
    if (jsonl) {
      *jsonl << "{\"epoch\":" << epoch << ",\"l_rank\":" << fmt17(epoch_mean.l_rank)
             << ",\"l_aux\":" << fmt17(epoch_mean.l_aux)
             << ",\"l_reg\":" << fmt17(epoch_mean.l_reg)
             << ",\"l_cl\":" << fmt17(epoch_mean.l_cl)
             << ",\"l_vat\":" << fmt17(epoch_mean.l_vat)
             << ",\"total\":" << fmt17(epoch_mean.total)
             << ",\"val_f1\":" << fmt17(val.macro_f1)
             << ",\"val_acc\":" << fmt17(val.accuracy) << "}\n";
    }
    if (val.macro_f1 > res.best_val_f1) {
      res.best_val_f1 = val.macro_f1;
      res.best_epoch = epoch;
      res.model = model;
    }
  }
  res.final_params = model.params;
  res.rng_seed = rng.seed();
  res.rng_counter = rng.counter();
  return res;
}

MetricsReport evaluate(const Model& model, const Vocabulary& vocab,
                       const std::vector<Sample>& samples, const PrototypeSet& protos,
                       const std::vector<int>& ids, std::optional<int> forced_expert) {
  if (samples.empty()) throw std::invalid_argument("evaluate: empty sample list");
  if (ids.empty()) throw std::invalid_argument("evaluate: empty category set");

  // Assemble the prototype matrix from exactly the requested categories, so
  // prototypes outside the set are never read.
  std::optional<Tensor> matrix;
  for (int id : ids) {
    int idx = -1;
    for (int i = 0; i < protos.count(); ++i)
      if (protos.category_id(i) == id) idx = i;
    if (idx < 0)
      throw std::invalid_argument("evaluate: no prototype for category " + std::to_string(id));
    Tensor col = protos.proto(idx);
    matrix = matrix ? concat_cols(nullptr, *matrix, col) : col;
  }

  std::vector<int> gold, pred;
  for (const Sample& s : samples) {
    SampleOut out = forward_sample(nullptr, model, vocab, s, *matrix, ids, VmoeMode::Infer,
                                   nullptr, forced_expert);
    gold.push_back(s.label);
    pred.push_back(ids[predict(out.scores)]);
  }
  return compute_metrics(gold, pred);
}

MetricsReport evaluate(const Model& model, const Vocabulary& vocab,
                       const std::vector<Sample>& samples,
                       const std::vector<CategorySpec>& categories,
                       std::optional<int> forced_expert) {
  std::vector<int> ids;
  for (const CategorySpec& c : categories) ids.push_back(c.id);
  PrototypeSet protos = encode_prototypes(nullptr, model.params, model.enc, vocab,
                                          prototype_names(categories, ids));
  return evaluate(model, vocab, samples, protos, ids, forced_expert);
}

std::vector<MetricsReport> expert_report(const Model& model, const Vocabulary& vocab,
                                         const std::vector<Sample>& samples,
                                         const std::vector<CategorySpec>& categories) {
  if (model.config.no_vmoe)
    throw std::invalid_argument("expert_report: model was trained without the mixture");
  std::vector<MetricsReport> reports;
  for (int k = 0; k < model.config.experts; ++k)
    reports.push_back(evaluate(model, vocab, samples, categories, k));
  return reports;
}

void export_embeddings(const Model& model, const Vocabulary& vocab,
                       const std::vector<Sample>& samples,
                       const std::vector<CategorySpec>& categories, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_embeddings: cannot write " + path);

  std::vector<int> ids;
  for (const CategorySpec& c : categories) ids.push_back(c.id);
  PrototypeSet protos = encode_prototypes(nullptr, model.params, model.enc, vocab,
                                          prototype_names(categories, ids));
  Tensor matrix = protos.matrix(nullptr);

  bool header = false;
  for (const Sample& s : samples) {
    SampleOut fwd = forward_sample(nullptr, model, vocab, s, matrix, ids, VmoeMode::Infer,
                                   nullptr, std::nullopt);
    if (!header) {
      out << "id,label";
      for (int i = 0; i < fwd.u_tilde.size(); ++i) out << ",u" << i;
      out << "\n";
      header = true;
    }
    out << s.id << "," << s.label;
    for (int i = 0; i < fwd.u_tilde.size(); ++i) out << "," << fmt17(fwd.u_tilde[i]);
    out << "\n";
  }
}

namespace {

SweepRow run_cell(const TrainConfig& cfg, const DatasetConfig& dcfg, uint64_t seed,
                  const std::string& setting) {
  DatasetConfig dc = dcfg;
  TrainConfig tc = cfg;
  tc.seed = seed;
  tc.task = dc.task;
  tc.d_raw = dc.d_raw;
  tc.patches = dc.patches;

  Dataset ds = generate_dataset(dc, seed);
  DatasetSplit split = split_zero_shot(ds, dc.n_train, dc.n_val, dc.n_test, seed);
  TrainResult res = train(tc, ds, split);

  std::vector<CategorySpec> unseen_specs;
  for (int id : split.unseen)
    for (const CategorySpec& c : ds.categories)
      if (c.id == id) unseen_specs.push_back(c);

  SweepRow row;
  row.setting = setting;
  row.seed = seed;
  row.unseen = evaluate(res.model, ds.vocab, split.test, unseen_specs);
  return row;
}

}  // namespace

std::vector<SweepRow> sweep_experts(const TrainConfig& base, const DatasetConfig& dcfg,
                                    const std::vector<int>& ks,
                                    const std::vector<uint64_t>& seeds) {
  std::vector<SweepRow> rows;
  for (int k : ks) {
    TrainConfig cfg = base;
    cfg.experts = k;
    for (uint64_t seed : seeds)
      rows.push_back(run_cell(cfg, dcfg, seed, "experts=" + std::to_string(k)));
  }
  return rows;
}

std::vector<SweepRow> sweep_beta(const TrainConfig& base, const DatasetConfig& dcfg,
                                 const std::vector<double>& betas,
                                 const std::vector<uint64_t>& seeds) {
  std::vector<SweepRow> rows;
  for (double beta : betas) {
    TrainConfig cfg = base;
    cfg.beta = beta;
    char label[48];
    std::snprintf(label, sizeof label, "beta=%g", beta);
    for (uint64_t seed : seeds) rows.push_back(run_cell(cfg, dcfg, seed, label));
  }
  return rows;
}

std::vector<SweepRow> ablate(const TrainConfig& base, const DatasetConfig& dcfg,
                             const std::vector<uint64_t>& seeds) {
  std::vector<SweepRow> rows;
  for (uint64_t seed : seeds) rows.push_back(run_cell(base, dcfg, seed, "full"));
  TrainConfig nv = base;
  nv.no_vmoe = true;
  for (uint64_t seed : seeds) rows.push_back(run_cell(nv, dcfg, seed, "no_vmoe"));
  TrainConfig nm = base;
  nm.no_mgvat = true;
  for (uint64_t seed : seeds) rows.push_back(run_cell(nm, dcfg, seed, "no_mgvat"));
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_sweep_csv: cannot write " + path);
  out << "setting,seed,macro_precision,macro_recall,macro_f1,accuracy\n";
  for (const SweepRow& r : rows)
    out << r.setting << "," << r.seed << "," << fmt17(r.unseen.macro_precision) << ","
        << fmt17(r.unseen.macro_recall) << "," << fmt17(r.unseen.macro_f1) << ","
        << fmt17(r.unseen.accuracy) << "\n";
}

}  // namespace mgv
