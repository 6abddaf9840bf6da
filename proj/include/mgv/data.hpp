#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mgv/encoders.hpp"
#include "mgv/rng.hpp"
#include "mgv/tensor.hpp"

namespace mgv {

// One synthetic category: its name tokens come from the same token cluster
// that generates the category's entity tokens, so the name encoding carries
// usable signal about the samples.
struct CategorySpec {
  int id = 0;
  std::vector<std::string> name_tokens;  // 1 to 3 cluster tokens
  std::vector<double> text_concept;      // dim d_raw
  std::vector<double> image_concept;     // dim d_raw
};

struct Sample {
  std::string id;
  std::vector<std::string> tokens;            // pre-marker sentence
  std::vector<std::pair<int, int>> spans;     // inclusive token ranges
  Tensor patches;                             // [|V|, d_raw]
  int label = -1;                             // category id
  Task task = Task::MET;

  bool operator==(const Sample& other) const;
};

struct DatasetConfig {
  Task task = Task::MET;
  int categories = 12;           // 22 for the MRE-style preset
  int samples_per_category = 40;
  int cluster_tokens = 200;      // split into one cluster per category
  int shared_tokens = 50;        // context pool common to all categories
  int patches = 8;               // |V|
  int d_raw = 16;
  double eta = 0.3;              // patch noise scale
  int n_train = 4, n_val = 4, n_test = 4;  // category counts per split
  uint64_t seed = 1;
};

inline DatasetConfig mre_preset() {
  DatasetConfig cfg;
  cfg.task = Task::MRE;
  cfg.categories = 22;
  cfg.n_train = 8;
  cfg.n_val = 7;
  cfg.n_test = 7;
  return cfg;
}

struct Dataset {
  DatasetConfig config;
  Vocabulary vocab;
  std::vector<CategorySpec> categories;
  std::vector<Sample> samples;
};

// Deterministic per seed. Entity tokens are drawn from the label category's
// cluster (mostly directly from its name tokens), context tokens from the
// shared pool, and patch rows are the image concept plus N(0, eta^2) noise.
Dataset generate_dataset(const DatasetConfig& cfg, uint64_t seed);

struct DatasetSplit {
  std::vector<int> seen, validation, unseen;  // pairwise disjoint category ids
  std::vector<Sample> train, val, test;
};

// Random disjoint category assignment (n_train, n_val, n_test sets), then
// samples routed by label. Categories left over when the counts do not sum to
// C are dropped.
DatasetSplit split_zero_shot(const Dataset& ds, int n_train, int n_val, int n_test,
                             uint64_t seed);

// One JSON object per line with exactly the fields
// id, tokens, spans, patches, label, task. Round trip is lossless.
void save_jsonl(const std::vector<Sample>& samples, const std::string& path);
std::vector<Sample> load_jsonl(const std::string& path);

// key = value text file holding the generation parameters.
void save_dataset_config(const DatasetConfig& cfg, const std::string& path);
DatasetConfig load_dataset_config(const std::string& path);

// Index batches covering [0, count) exactly once; the final batch may be
// short. Shuffling consumes the rng, so the order is deterministic per seed.
std::vector<std::vector<int>> batch_indices(int count, int batch_size, Rng& rng, bool shuffle);

}  // namespace mgv
