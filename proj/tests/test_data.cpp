#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "mgv/data.hpp"

using namespace mgv;

namespace {

DatasetConfig small_config() {
  DatasetConfig cfg;
  cfg.categories = 6;
  cfg.samples_per_category = 5;
  cfg.cluster_tokens = 30;
  cfg.shared_tokens = 10;
  cfg.n_train = 2;
  cfg.n_val = 2;
  cfg.n_test = 2;
  return cfg;
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  DatasetConfig cfg = small_config();
  Dataset a = generate_dataset(cfg, 7);
  Dataset b = generate_dataset(cfg, 7);
  Dataset c = generate_dataset(cfg, 8);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
  bool all_equal = a.samples.size() == c.samples.size();
  for (size_t i = 0; all_equal && i < a.samples.size(); ++i)
    all_equal = a.samples[i] == c.samples[i];
  CHECK_FALSE(all_equal);
}

TEST_CASE("noiseless grids are identical within a category") {
  DatasetConfig cfg = small_config();
  cfg.eta = 0.0;
  Dataset ds = generate_dataset(cfg, 1);
  const Sample* first_of[6] = {};
  for (const Sample& s : ds.samples) {
    if (!first_of[s.label]) {
      first_of[s.label] = &s;
      continue;
    }
    CHECK(s.patches.values() == first_of[s.label]->patches.values());
  }
  // Different categories still differ.
  CHECK_FALSE(first_of[0]->patches.values() == first_of[1]->patches.values());
}

TEST_CASE("spans index entity tokens drawn from the label cluster") {
  Dataset ds = generate_dataset(small_config(), 3);
  for (const Sample& s : ds.samples) {
    REQUIRE(s.spans.size() == 1);  // MET
    auto [a, b] = s.spans[0];
    REQUIRE(a >= 0);
    REQUIRE(b >= a);
    REQUIRE(b < (int)s.tokens.size());
    const std::string prefix = "c" + std::to_string(s.label) + "_";
    for (int i = a; i <= b; ++i) CHECK(s.tokens[i].substr(0, prefix.size()) == prefix);
  }
}

TEST_CASE("category names reuse the category's own cluster tokens") {
  Dataset ds = generate_dataset(small_config(), 4);
  for (const CategorySpec& spec : ds.categories) {
    REQUIRE(spec.name_tokens.size() >= 1);
    REQUIRE(spec.name_tokens.size() <= 3);
    const std::string prefix = "c" + std::to_string(spec.id) + "_";
    for (const std::string& t : spec.name_tokens) {
      CHECK(t.substr(0, prefix.size()) == prefix);
      CHECK(ds.vocab.id(t) >= Vocabulary::kNumReserved);
    }
    CHECK((int)spec.text_concept.size() == ds.config.d_raw);
    CHECK((int)spec.image_concept.size() == ds.config.d_raw);
  }
}

TEST_CASE("mre preset generates two disjoint spans") {
  DatasetConfig cfg = small_config();
  cfg.task = Task::MRE;
  Dataset ds = generate_dataset(cfg, 5);
  for (const Sample& s : ds.samples) {
    REQUIRE(s.spans.size() == 2);
    CHECK(s.spans[0].second < s.spans[1].first);
    CHECK(s.task == Task::MRE);
  }
}

TEST_CASE("every generated sentence survives marker tokenization") {
  for (Task task : {Task::MET, Task::MRE}) {
    DatasetConfig cfg = small_config();
    cfg.task = task;
    Dataset ds = generate_dataset(cfg, 6);
    EncoderConfig enc;
    for (const Sample& s : ds.samples)
      CHECK_NOTHROW(tokenize_with_markers(ds.vocab, s.tokens, s.spans, s.task, enc, false));
  }
}

TEST_CASE("generation rejects impossible configurations") {
  DatasetConfig cfg = small_config();
  cfg.categories = 5;  // 2 + 2 + 2 > 5
  CHECK_THROWS_AS(generate_dataset(cfg, 1), std::invalid_argument);
  DatasetConfig starved = small_config();
  starved.cluster_tokens = 3;
  CHECK_THROWS_AS(generate_dataset(starved, 1), std::invalid_argument);
}

TEST_CASE("zero-shot split is disjoint, complete and deterministic") {
  Dataset ds = generate_dataset(small_config(), 11);
  DatasetSplit s1 = split_zero_shot(ds, 2, 2, 2, 99);
  DatasetSplit s2 = split_zero_shot(ds, 2, 2, 2, 99);
  CHECK(s1.seen == s2.seen);
  CHECK(s1.unseen == s2.unseen);

  std::set<int> all;
  for (int id : s1.seen) all.insert(id);
  for (int id : s1.validation) all.insert(id);
  for (int id : s1.unseen) all.insert(id);
  CHECK(all.size() == 6);  // pairwise disjoint, covering every category

  CHECK(s1.train.size() == 10);
  CHECK(s1.val.size() == 10);
  CHECK(s1.test.size() == 10);
  for (const Sample& s : s1.train)
    CHECK(std::find(s1.seen.begin(), s1.seen.end(), s.label) != s1.seen.end());
  for (const Sample& s : s1.test)
    CHECK(std::find(s1.unseen.begin(), s1.unseen.end(), s.label) != s1.unseen.end());

  CHECK_THROWS_AS(split_zero_shot(ds, 3, 2, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_zero_shot(ds, 2, 2, 0, 1), std::invalid_argument);

  // Different seeds eventually produce a different assignment.
  bool differs = false;
  for (uint64_t seed = 0; seed < 10 && !differs; ++seed)
    differs = split_zero_shot(ds, 2, 2, 2, seed).seen != s1.seen;
  CHECK(differs);
}

TEST_CASE("jsonl round trip is lossless") {
  Dataset ds = generate_dataset(small_config(), 13);
  const std::string path = "data_test.jsonl";
  save_jsonl(ds.samples, path);
  std::vector<Sample> loaded = load_jsonl(path);
  REQUIRE(loaded.size() == ds.samples.size());
  for (size_t i = 0; i < loaded.size(); ++i) CHECK(loaded[i] == ds.samples[i]);
  std::remove(path.c_str());
}

TEST_CASE("jsonl error handling") {
  const std::string path = "data_bad.jsonl";
  {
    std::ofstream out(path);
  }
  CHECK(load_jsonl(path).empty());  // empty file -> empty list

  {
    std::ofstream out(path);
    out << R"({"id":"x","tokens":["a"],"spans":[[0,0]],"patches":[[1.0]],"label":0,"task":"met"})"
        << "\n";
    out << "{\"id\":\"y\", truncated\n";
  }
  try {
    load_jsonl(path);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  {
    std::ofstream out(path);
    out << R"({"id":"x","tokens":["a"],"spans":[[0,0]],"label":0,"task":"met"})" << "\n";
  }
  CHECK_THROWS_AS(load_jsonl(path), std::runtime_error);  // missing patches

  {
    std::ofstream out(path);
    out << R"({"id":"x","tokens":["a"],"spans":[[0,5]],"patches":[[1.0]],"label":0,"task":"met"})"
        << "\n";
  }
  CHECK_THROWS_AS(load_jsonl(path), std::runtime_error);  // span out of range
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_jsonl("no_such_file.jsonl"), std::runtime_error);
}

TEST_CASE("dataset config file round trip") {
  DatasetConfig cfg = mre_preset();
  cfg.eta = 0.12345678901234567;
  cfg.seed = 424242;
  const std::string path = "data_cfg.txt";
  save_dataset_config(cfg, path);
  DatasetConfig back = load_dataset_config(path);
  CHECK(back.task == Task::MRE);
  CHECK(back.categories == 22);
  CHECK(back.n_train == 8);
  CHECK(back.n_val == 7);
  CHECK(back.n_test == 7);
  CHECK(back.eta == cfg.eta);
  CHECK(back.seed == cfg.seed);
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "categories 12\n";
  }
  CHECK_THROWS_AS(load_dataset_config(path), std::runtime_error);
  {
    std::ofstream out(path);
    out << "mystery = 1\n";
  }
  CHECK_THROWS_AS(load_dataset_config(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("batch iteration partitions every epoch") {
  Rng rng(1);
  auto batches = batch_indices(10, 4, rng, false);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 4);
  CHECK(batches[2].size() == 2);
  CHECK(batches[0] == std::vector<int>{0, 1, 2, 3});  // shuffle off keeps order

  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + rng.uniform_int(30);
    const int bs = 1 + rng.uniform_int(8);
    Rng local(trial);
    auto shuffled = batch_indices(n, bs, local, true);
    std::set<int> seen;
    for (const auto& b : shuffled)
      for (int i : b) seen.insert(i);
    CHECK((int)seen.size() == n);  // exactly once each
  }

  Rng r1(5), r2(5);
  CHECK(batch_indices(17, 4, r1, true) == batch_indices(17, 4, r2, true));
  CHECK_THROWS_AS(batch_indices(5, 0, rng, false), std::invalid_argument);
}
