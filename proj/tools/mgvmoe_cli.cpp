// Command-line front end: dataset generation, training, zero-shot evaluation,
// the two hyper-parameter sweeps, the ablation table, per-expert reports and
// embedding export. Every run is reproducible from (config, seed).

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mgv/train.hpp"

using namespace mgv;

namespace {

struct Options {
  TrainConfig train;
  std::string task = "met";
  std::string config_path;
  std::string out_dir = ".";
  uint64_t seed = 1;
};

DatasetConfig dataset_config(const Options& opt) {
  DatasetConfig dcfg;
  if (!opt.config_path.empty()) {
    dcfg = load_dataset_config(opt.config_path);
  } else if (opt.task == "mre") {
    dcfg = mre_preset();
  }
  dcfg.seed = opt.seed;
  return dcfg;
}

TrainConfig train_config(const Options& opt, const DatasetConfig& dcfg) {
  TrainConfig cfg = opt.train;
  cfg.seed = opt.seed;
  cfg.task = dcfg.task;
  cfg.d_raw = dcfg.d_raw;
  cfg.patches = dcfg.patches;
  return cfg;
}

std::string join(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "split,macro_precision,macro_recall,macro_f1,accuracy\n";
  char buf[64];
  for (const auto& [name, m] : rows) {
    out << name;
    for (double v : {m.macro_precision, m.macro_recall, m.macro_f1, m.accuracy}) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << "\n";
  }
}

std::vector<CategorySpec> specs_for(const Dataset& ds, const std::vector<int>& ids) {
  std::vector<CategorySpec> out;
  for (int id : ids)
    for (const CategorySpec& c : ds.categories)
      if (c.id == id) out.push_back(c);
  return out;
}

struct Workspace {
  Dataset ds;
  DatasetSplit split;
};

Workspace make_workspace(const DatasetConfig& dcfg, uint64_t seed) {
  Workspace w{generate_dataset(dcfg, seed), {}};
  w.split = split_zero_shot(w.ds, dcfg.n_train, dcfg.n_val, dcfg.n_test, seed);
  return w;
}

int cmd_generate(const Options& opt) {
  DatasetConfig dcfg = dataset_config(opt);
  Dataset ds = generate_dataset(dcfg, opt.seed);
  save_jsonl(ds.samples, join(opt.out_dir, "dataset.jsonl"));
  ds.vocab.save(join(opt.out_dir, "vocab.txt"));
  save_dataset_config(dcfg, join(opt.out_dir, "dataset.config"));
  std::cout << "wrote " << ds.samples.size() << " samples, vocab size " << ds.vocab.size()
            << " to " << opt.out_dir << "\n";
  return 0;
}

int cmd_train(const Options& opt) {
  DatasetConfig dcfg = dataset_config(opt);
  TrainConfig cfg = train_config(opt, dcfg);
  Workspace w = make_workspace(dcfg, opt.seed);

  std::ofstream log(join(opt.out_dir, "log.jsonl"));
  if (!log) throw std::runtime_error("cannot write " + join(opt.out_dir, "log.jsonl"));
  TrainResult res = train(cfg, w.ds, w.split, &log);

  save_checkpoint(join(opt.out_dir, "checkpoint.bin"), cfg, res.model.params, res.rng_seed,
                  res.rng_counter);
  write_metrics_csv(
      join(opt.out_dir, "metrics.csv"),
      {{"train", evaluate(res.model, w.ds.vocab, w.split.train, specs_for(w.ds, w.split.seen))},
       {"val",
        evaluate(res.model, w.ds.vocab, w.split.val, specs_for(w.ds, w.split.validation))},
       {"test",
        evaluate(res.model, w.ds.vocab, w.split.test, specs_for(w.ds, w.split.unseen))}});
  std::cout << "best epoch " << res.best_epoch << ", val F1 " << res.best_val_f1 << "\n";
  return 0;
}

int cmd_evaluate(const Options& opt) {
  Checkpoint ckpt = load_checkpoint(join(opt.out_dir, "checkpoint.bin"));
  Model model = model_from_checkpoint(ckpt);
  DatasetConfig dcfg = dataset_config(opt);
  dcfg.task = ckpt.config.task;
  Workspace w = make_workspace(dcfg, ckpt.config.seed);
  MetricsReport m =
      evaluate(model, w.ds.vocab, w.split.test, specs_for(w.ds, w.split.unseen));
  write_metrics_csv(join(opt.out_dir, "metrics.csv"), {{"test", m}});
  std::cout << "unseen test: acc " << m.accuracy << ", macro F1 " << m.macro_f1 << "\n";
  return 0;
}

int cmd_sweep_experts(const Options& opt) {
  DatasetConfig dcfg = dataset_config(opt);
  TrainConfig cfg = train_config(opt, dcfg);
  auto rows = sweep_experts(cfg, dcfg, {1, 2, 4, 8}, {1, 2, 3});
  write_sweep_csv(rows, join(opt.out_dir, "sweep_experts.csv"));
  std::cout << "wrote " << rows.size() << " rows\n";
  return 0;
}

int cmd_sweep_beta(const Options& opt) {
  DatasetConfig dcfg = dataset_config(opt);
  TrainConfig cfg = train_config(opt, dcfg);
  auto rows = sweep_beta(cfg, dcfg, {0.0, 0.1, 1.0, 10.0}, {1, 2, 3});
  write_sweep_csv(rows, join(opt.out_dir, "sweep_beta.csv"));
  std::cout << "wrote " << rows.size() << " rows\n";
  return 0;
}

int cmd_ablate(const Options& opt) {
  DatasetConfig dcfg = dataset_config(opt);
  TrainConfig cfg = train_config(opt, dcfg);
  auto rows = ablate(cfg, dcfg, {1, 2, 3});
  write_sweep_csv(rows, join(opt.out_dir, "ablation.csv"));
  std::cout << "wrote " << rows.size() << " rows\n";
  return 0;
}

int cmd_expert_report(const Options& opt) {
  Checkpoint ckpt = load_checkpoint(join(opt.out_dir, "checkpoint.bin"));
  Model model = model_from_checkpoint(ckpt);
  DatasetConfig dcfg = dataset_config(opt);
  dcfg.task = ckpt.config.task;
  Workspace w = make_workspace(dcfg, ckpt.config.seed);
  auto reports =
      expert_report(model, w.ds.vocab, w.split.test, specs_for(w.ds, w.split.unseen));
  std::vector<std::pair<std::string, MetricsReport>> rows;
  for (size_t k = 0; k < reports.size(); ++k)
    rows.emplace_back("expert" + std::to_string(k), reports[k]);
  write_metrics_csv(join(opt.out_dir, "expert_report.csv"), rows);
  std::cout << "wrote " << reports.size() << " expert rows\n";
  return 0;
}

int cmd_export_embeddings(const Options& opt) {
  Checkpoint ckpt = load_checkpoint(join(opt.out_dir, "checkpoint.bin"));
  Model model = model_from_checkpoint(ckpt);
  DatasetConfig dcfg = dataset_config(opt);
  dcfg.task = ckpt.config.task;
  Workspace w = make_workspace(dcfg, ckpt.config.seed);
  export_embeddings(model, w.ds.vocab, w.split.test, specs_for(w.ds, w.split.unseen),
                    join(opt.out_dir, "embeddings.csv"));
  std::cout << "wrote " << w.split.test.size() << " embedding rows\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-shot multimodal entity/relation classifier harness"};
  app.require_subcommand(1);

  Options opt;
  int (*handler)(const Options&) = nullptr;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--beta", opt.train.beta, "loss balance weight");
    sub->add_option("--experts", opt.train.experts, "number of expert modules");
    sub->add_option("--lr", opt.train.lr, "learning rate");
    sub->add_option("--batch-size", opt.train.batch_size, "samples per batch");
    sub->add_option("--epochs", opt.train.epochs, "training epochs");
    sub->add_option("--seed", opt.seed, "master seed");
    sub->add_option("--task", opt.task, "met or mre")
        ->check(CLI::IsMember({"met", "mre"}));
    sub->add_flag("--no-vmoe", opt.train.no_vmoe, "bypass the mixture layer");
    sub->add_flag("--no-mgvat", opt.train.no_mgvat, "disable graph losses");
    sub->add_option("--config", opt.config_path, "dataset config file (key = value)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory");
  };

  const std::pair<const char*, int (*)(const Options&)> commands[] = {
      {"generate", cmd_generate},
      {"train", cmd_train},
      {"evaluate", cmd_evaluate},
      {"sweep-experts", cmd_sweep_experts},
      {"sweep-beta", cmd_sweep_beta},
      {"ablate", cmd_ablate},
      {"expert-report", cmd_expert_report},
      {"export-embeddings", cmd_export_embeddings},
  };
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub);
    sub->callback([&handler, fn] { handler = fn; });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    return handler(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
