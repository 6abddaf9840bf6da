#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "mgv/tape.hpp"
#include "mgv/tensor.hpp"

namespace mgv {

// Named trainable tensors with accumulated gradients and Adam moment state.
// Iteration order is the (sorted) name order, so optimizer sweeps are
// deterministic.
class ParamStore {
 public:
  struct Entry {
    Tensor value;
    Tensor grad;
    Tensor m, v;  // first/second moment accumulators
  };

  Tensor& create(const std::string& name, Tensor init) {
    if (entries_.count(name)) throw std::invalid_argument("ParamStore: duplicate param " + name);
    Entry e{init, Tensor(init.rows(), init.cols()), Tensor(init.rows(), init.cols()),
            Tensor(init.rows(), init.cols())};
    return entries_.emplace(name, std::move(e)).first->second.value;
  }

  Tensor& get(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::invalid_argument("ParamStore: unknown param " + name);
    return it->second.value;
  }
  const Tensor& get(const std::string& name) const {
    return const_cast<ParamStore*>(this)->get(name);
  }
  bool has(const std::string& name) const { return entries_.count(name) > 0; }

  void zero_grads() {
    for (auto& [_, e] : entries_) std::fill(e.grad.values().begin(), e.grad.values().end(), 0.0);
  }

  // Registers every parameter as a tape leaf.
  void watch_all(Tape& tape) {
    for (auto& [_, e] : entries_) tape.watch(e.value);
  }

  // Pulls gradients for all watched parameters out of a backward result.
  void accumulate_grads(const Gradients& grads) {
    for (auto& [_, e] : entries_) {
      if (e.value.node < 0) continue;
      const Tensor& g = grads.wrt(e.value);
      for (int i = 0; i < g.size(); ++i) e.grad[i] += g[i];
    }
  }

  void detach_all() {
    for (auto& [_, e] : entries_) e.value.node = -1;
  }

  void sgd_step(double lr) {
    for (auto& [_, e] : entries_)
      for (int i = 0; i < e.value.size(); ++i) e.value[i] -= lr * e.grad[i];
  }

  // Adaptive moment estimation with bias correction; t is 1-based. The
  // epsilon is deliberately large: it caps the effective step for coordinates
  // whose gradients are persistently tiny, so directions the data never
  // exercises keep their initialization instead of random-walking at full lr.
  void adam_step(double lr, long t, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-4) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (auto& [_, e] : entries_) {
      for (int i = 0; i < e.value.size(); ++i) {
        const double g = e.grad[i];
        e.m[i] = beta1 * e.m[i] + (1.0 - beta1) * g;
        e.v[i] = beta2 * e.v[i] + (1.0 - beta2) * g * g;
        e.value[i] -= lr * (e.m[i] / bc1) / (std::sqrt(e.v[i] / bc2) + eps);
      }
    }
  }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace mgv
