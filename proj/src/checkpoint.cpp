#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mgv/train.hpp"

namespace mgv {

namespace {

constexpr char kMagic[4] = {'M', 'G', 'V', 'M'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return value;
}

void write_string(std::ofstream& out, const std::string& s) {
  write_pod(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
  const uint32_t len = read_pod<uint32_t>(in);
  if (len > (1u << 20)) throw std::runtime_error("checkpoint: implausible string length");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainConfig& cfg, const ParamStore& params,
                     uint64_t rng_seed, uint64_t rng_counter) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot write " + tmp);

    out.write(kMagic, sizeof kMagic);
    write_pod(out, kVersion);

    write_pod(out, cfg.beta);
    write_pod(out, static_cast<int32_t>(cfg.experts));
    write_pod(out, cfg.lr);
    write_pod(out, static_cast<int32_t>(cfg.batch_size));
    write_pod(out, static_cast<int32_t>(cfg.epochs));
    write_pod(out, cfg.seed);
    write_pod(out, static_cast<int32_t>(cfg.d));
    write_pod(out, static_cast<int32_t>(cfg.h));
    write_pod(out, static_cast<int32_t>(cfg.d_raw));
    write_pod(out, static_cast<int32_t>(cfg.patches));
    write_pod(out, static_cast<int32_t>(cfg.max_len));
    write_pod(out, cfg.vat_eps);
    write_pod(out, cfg.vat_xi);
    write_pod(out, static_cast<int32_t>(cfg.vat_steps));
    write_pod(out, static_cast<uint8_t>(cfg.task == Task::MRE ? 1 : 0));
    write_pod(out, static_cast<uint8_t>(cfg.no_vmoe ? 1 : 0));
    write_pod(out, static_cast<uint8_t>(cfg.no_mgvat ? 1 : 0));
    write_string(out, cfg.optimizer);

    write_pod(out, rng_seed);
    write_pod(out, rng_counter);

    write_pod(out, static_cast<uint32_t>(params.size()));
    for (const auto& [name, entry] : params) {
      write_string(out, name);
      write_pod(out, static_cast<int32_t>(entry.value.rows()));
      write_pod(out, static_cast<int32_t>(entry.value.cols()));
      out.write(reinterpret_cast<const char*>(entry.value.values().data()),
                static_cast<std::streamsize>(sizeof(double) * entry.value.size()));
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("save_checkpoint: cannot rename into " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot read " + path);

  char magic[4];
  in.read(magic, sizeof magic);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4))
    throw std::runtime_error("load_checkpoint: " + path + " is not a checkpoint file");
  const uint32_t version = read_pod<uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));

  Checkpoint ckpt;
  TrainConfig& cfg = ckpt.config;
  cfg.beta = read_pod<double>(in);
  cfg.experts = read_pod<int32_t>(in);
  cfg.lr = read_pod<double>(in);
  cfg.batch_size = read_pod<int32_t>(in);
  cfg.epochs = read_pod<int32_t>(in);
  cfg.seed = read_pod<uint64_t>(in);
  cfg.d = read_pod<int32_t>(in);
  cfg.h = read_pod<int32_t>(in);
  cfg.d_raw = read_pod<int32_t>(in);
  cfg.patches = read_pod<int32_t>(in);
  cfg.max_len = read_pod<int32_t>(in);
  cfg.vat_eps = read_pod<double>(in);
  cfg.vat_xi = read_pod<double>(in);
  cfg.vat_steps = read_pod<int32_t>(in);
  cfg.task = read_pod<uint8_t>(in) ? Task::MRE : Task::MET;
  cfg.no_vmoe = read_pod<uint8_t>(in) != 0;
  cfg.no_mgvat = read_pod<uint8_t>(in) != 0;
  cfg.optimizer = read_string(in);

  ckpt.rng_seed = read_pod<uint64_t>(in);
  ckpt.rng_counter = read_pod<uint64_t>(in);

  const uint32_t count = read_pod<uint32_t>(in);
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = read_string(in);
    const int rows = read_pod<int32_t>(in);
    const int cols = read_pod<int32_t>(in);
    Tensor t(rows, cols);
    in.read(reinterpret_cast<char*>(t.values().data()),
            static_cast<std::streamsize>(sizeof(double) * t.size()));
    if (!in) throw std::runtime_error("load_checkpoint: truncated tensor data in " + path);
    ckpt.params.create(name, std::move(t));
  }
  return ckpt;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  Model m;
  m.config = ckpt.config;
  m.enc = EncoderConfig{ckpt.config.d, ckpt.config.d_raw, ckpt.config.patches,
                        ckpt.config.max_len};
  m.vmoe = VmoeConfig{ckpt.config.d, ckpt.config.experts};
  m.head = TaskHeadConfig{ckpt.config.d, entity_dim_for(ckpt.config.task, ckpt.config.d),
                          ckpt.config.h};
  m.params = ckpt.params;
  return m;
}

}  // namespace mgv
