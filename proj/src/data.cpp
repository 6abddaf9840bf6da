#include "mgv/data.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mgv {

using nlohmann::json;

bool Sample::operator==(const Sample& other) const {
  return id == other.id && tokens == other.tokens && spans == other.spans &&
         patches.rows() == other.patches.rows() && patches.cols() == other.patches.cols() &&
         patches.values() == other.patches.values() && label == other.label &&
         task == other.task;
}

namespace {

std::string cluster_token(int category, int k) {
  return "c" + std::to_string(category) + "_t" + std::to_string(k);
}

std::string shared_token(int k) { return "ctx" + std::to_string(k); }

std::vector<double> concept_vector(Rng& rng, int d_raw) {
  std::vector<double> v(d_raw);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

Dataset generate_dataset(const DatasetConfig& cfg, uint64_t seed) {
  if (cfg.categories < cfg.n_train + cfg.n_val + cfg.n_test)
    throw std::invalid_argument("generate_dataset: " + std::to_string(cfg.categories) +
                                " categories cannot cover a " + std::to_string(cfg.n_train) +
                                "/" + std::to_string(cfg.n_val) + "/" +
                                std::to_string(cfg.n_test) + " split");
  if (cfg.cluster_tokens < cfg.categories)
    throw std::invalid_argument("generate_dataset: need at least one cluster token per category");

  Dataset ds;
  ds.config = cfg;
  ds.config.seed = seed;

  // Cluster tokens round-robin over categories, then the shared context pool.
  const int per_cluster = cfg.cluster_tokens / cfg.categories;
  const int leftover = cfg.cluster_tokens % cfg.categories;
  std::vector<std::vector<std::string>> clusters(cfg.categories);
  for (int c = 0; c < cfg.categories; ++c) {
    const int count = per_cluster + (c < leftover ? 1 : 0);
    for (int k = 0; k < count; ++k) {
      clusters[c].push_back(cluster_token(c, k));
      ds.vocab.add(clusters[c].back());
    }
  }
  std::vector<std::string> shared;
  for (int k = 0; k < cfg.shared_tokens; ++k) {
    shared.push_back(shared_token(k));
    ds.vocab.add(shared.back());
  }

  Rng rng(seed);
  for (int c = 0; c < cfg.categories; ++c) {
    CategorySpec spec;
    spec.id = c;
    const int name_len = 1 + rng.uniform_int(std::min<int>(3, (int)clusters[c].size()));
    for (int k = 0; k < name_len; ++k)
      spec.name_tokens.push_back(clusters[c][rng.uniform_int((int)clusters[c].size())]);
    spec.text_concept = concept_vector(rng, cfg.d_raw);
    spec.image_concept = concept_vector(rng, cfg.d_raw);
    ds.categories.push_back(std::move(spec));
  }

  auto draw_entity = [&](const CategorySpec& spec) {
    // Mostly reuse name tokens so prototypes match sample features; the rest
    // are cluster tokens that identify the category without naming it.
    if (!spec.name_tokens.empty() && rng.uniform() < 0.8)
      return spec.name_tokens[rng.uniform_int((int)spec.name_tokens.size())];
    return clusters[spec.id][rng.uniform_int((int)clusters[spec.id].size())];
  };

  const int spans_needed = cfg.task == Task::MET ? 1 : 2;
  for (int c = 0; c < cfg.categories; ++c) {
    const CategorySpec& spec = ds.categories[c];
    for (int s = 0; s < cfg.samples_per_category; ++s) {
      Sample sample;
      sample.id = std::string(task_name(cfg.task)) + "-" + std::to_string(c) + "-" +
                  std::to_string(s);
      sample.label = c;
      sample.task = cfg.task;

      // Context prefix, then entities separated by one context token each.
      const int prefix = 2 + rng.uniform_int(4);
      for (int k = 0; k < prefix; ++k)
        sample.tokens.push_back(shared[rng.uniform_int((int)shared.size())]);
      for (int e = 0; e < spans_needed; ++e) {
        const int span_len = 1 + rng.uniform_int(2);
        const int start = (int)sample.tokens.size();
        for (int k = 0; k < span_len; ++k) sample.tokens.push_back(draw_entity(spec));
        sample.spans.emplace_back(start, start + span_len - 1);
        sample.tokens.push_back(shared[rng.uniform_int((int)shared.size())]);
      }

      sample.patches = Tensor(cfg.patches, cfg.d_raw);
      for (int v = 0; v < cfg.patches; ++v)
        for (int f = 0; f < cfg.d_raw; ++f)
          sample.patches.at(v, f) = spec.image_concept[f] + cfg.eta * rng.normal();

      ds.samples.push_back(std::move(sample));
    }
  }
  return ds;
}

DatasetSplit split_zero_shot(const Dataset& ds, int n_train, int n_val, int n_test,
                             uint64_t seed) {
  const int c = (int)ds.categories.size();
  if (n_train < 1 || n_val < 1 || n_test < 1)
    throw std::invalid_argument("split_zero_shot: every split needs at least one category");
  if (n_train + n_val + n_test > c)
    throw std::invalid_argument("split_zero_shot: " + std::to_string(n_train + n_val + n_test) +
                                " categories requested, only " + std::to_string(c) +
                                " available");

  std::vector<int> ids;
  for (const CategorySpec& spec : ds.categories) ids.push_back(spec.id);
  Rng rng(seed);
  shuffle(rng, ids);

  DatasetSplit split;
  split.seen.assign(ids.begin(), ids.begin() + n_train);
  split.validation.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  split.unseen.assign(ids.begin() + n_train + n_val, ids.begin() + n_train + n_val + n_test);

  auto contains = [](const std::vector<int>& v, int x) {
    for (int y : v)
      if (y == x) return true;
    return false;
  };
  for (const Sample& s : ds.samples) {
    if (contains(split.seen, s.label))
      split.train.push_back(s);
    else if (contains(split.validation, s.label))
      split.val.push_back(s);
    else if (contains(split.unseen, s.label))
      split.test.push_back(s);
  }
  return split;
}

void save_jsonl(const std::vector<Sample>& samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_jsonl: cannot write " + path);
  for (const Sample& s : samples) {
    json j;
    j["id"] = s.id;
    j["tokens"] = s.tokens;
    json spans = json::array();
    for (const auto& [a, b] : s.spans) spans.push_back(json::array({a, b}));
    j["spans"] = spans;
    json grid = json::array();
    for (int v = 0; v < s.patches.rows(); ++v) {
      json row = json::array();
      for (int f = 0; f < s.patches.cols(); ++f) row.push_back(s.patches.at(v, f));
      grid.push_back(std::move(row));
    }
    j["patches"] = grid;
    j["label"] = s.label;
    j["task"] = task_name(s.task);
    out << j.dump() << "\n";
  }
}

std::vector<Sample> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_jsonl: cannot read " + path);
  std::vector<Sample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("load_jsonl: malformed JSON at " + where);
    for (const char* field : {"id", "tokens", "spans", "patches", "label", "task"})
      if (!j.contains(field))
        throw std::runtime_error("load_jsonl: missing field '" + std::string(field) + "' at " +
                                 where);
    try {
      Sample s;
      s.id = j["id"].get<std::string>();
      s.tokens = j["tokens"].get<std::vector<std::string>>();
      for (const json& pair : j["spans"])
        s.spans.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
      const json& grid = j["patches"];
      const int rows = (int)grid.size();
      const int cols = rows > 0 ? (int)grid[0].size() : 0;
      s.patches = Tensor(rows, cols);
      for (int v = 0; v < rows; ++v) {
        if ((int)grid[v].size() != cols)
          throw std::runtime_error("ragged patch grid");
        for (int f = 0; f < cols; ++f) s.patches.at(v, f) = grid[v][f].get<double>();
      }
      s.label = j["label"].get<int>();
      s.task = task_from_name(j["task"].get<std::string>());
      for (const auto& [a, b] : s.spans)
        if (a < 0 || b < a || b >= (int)s.tokens.size())
          throw std::runtime_error("span out of range");
      samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw std::runtime_error("load_jsonl: bad field at " + where + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("load_jsonl: " + std::string(e.what()) + " at " + where);
    }
  }
  return samples;
}

void save_dataset_config(const DatasetConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset_config: cannot write " + path);
  out << "task = " << task_name(cfg.task) << "\n";
  out << "categories = " << cfg.categories << "\n";
  out << "samples_per_category = " << cfg.samples_per_category << "\n";
  out << "cluster_tokens = " << cfg.cluster_tokens << "\n";
  out << "shared_tokens = " << cfg.shared_tokens << "\n";
  out << "patches = " << cfg.patches << "\n";
  out << "d_raw = " << cfg.d_raw << "\n";
  out.precision(17);
  out << "eta = " << cfg.eta << "\n";
  out << "n_train = " << cfg.n_train << "\n";
  out << "n_val = " << cfg.n_val << "\n";
  out << "n_test = " << cfg.n_test << "\n";
  out << "seed = " << cfg.seed << "\n";
}

DatasetConfig load_dataset_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset_config: cannot read " + path);
  DatasetConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("load_dataset_config: expected key = value at " + path + ":" +
                               std::to_string(line_no));
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "task")
      cfg.task = task_from_name(value);
    else if (key == "categories")
      cfg.categories = std::stoi(value);
    else if (key == "samples_per_category")
      cfg.samples_per_category = std::stoi(value);
    else if (key == "cluster_tokens")
      cfg.cluster_tokens = std::stoi(value);
    else if (key == "shared_tokens")
      cfg.shared_tokens = std::stoi(value);
    else if (key == "patches")
      cfg.patches = std::stoi(value);
    else if (key == "d_raw")
      cfg.d_raw = std::stoi(value);
    else if (key == "eta")
      cfg.eta = std::stod(value);
    else if (key == "n_train")
      cfg.n_train = std::stoi(value);
    else if (key == "n_val")
      cfg.n_val = std::stoi(value);
    else if (key == "n_test")
      cfg.n_test = std::stoi(value);
    else if (key == "seed")
      cfg.seed = std::stoull(value);
    else
      throw std::runtime_error("load_dataset_config: unknown key '" + key + "' at " + path +
                               ":" + std::to_string(line_no));
  }
  return cfg;
}

std::vector<std::vector<int>> batch_indices(int count, int batch_size, Rng& rng, bool shuffle_on) {
  if (batch_size < 1) throw std::invalid_argument("batch_indices: batch size must be positive");
  std::vector<int> order(count);
  for (int i = 0; i < count; ++i) order[i] = i;
  if (shuffle_on) shuffle(rng, order);
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < count; start += batch_size) {
    const int end = std::min(count, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

}  // namespace mgv
