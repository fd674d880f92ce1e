#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ghp/array.hpp"
#include "ghp/tape.hpp"

namespace ghp {

// Gradient table keyed by parameter name, insertion-ordered for determinism.
class GradTable {
 public:
  void add(const std::string& name, Array grad);
  void accumulate(const GradTable& other);  // element-wise add, shapes must match
  void scale(double c);
  const Array* find(const std::string& name) const;
  const std::vector<std::pair<std::string, Array>>& items() const { return items_; }
  bool empty() const { return items_.empty(); }

 private:
  std::vector<std::pair<std::string, Array>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Named trainable arrays with per-parameter Adam moment accumulators.
class ParamStore {
 public:
  void add(const std::string& name, Array init);
  bool has(const std::string& name) const;
  Array& value(const std::string& name);
  const Array& value(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::uint64_t step() const { return step_; }
  // clears Adam moments and the step counter (posterior reset)
  void reset_moments();
  std::size_t param_count() const { return order_.size(); }
  std::size_t total_size() const;

  // serialization access
  const Array& moment1(const std::string& name) const;
  const Array& moment2(const std::string& name) const;
  void restore_entry(const std::string& name, Array value, Array m1, Array m2);
  void set_step(std::uint64_t s) { step_ = s; }

  friend void adam_step(ParamStore& store, const GradTable& grads, double lr);

 private:
  struct Entry {
    Array value, m, v;
  };
  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;

  std::vector<std::string> order_;
  std::unordered_map<std::string, Entry> entries_;
  std::uint64_t step_ = 0;
};

// One Adam update (β₁=0.9, β₂=0.999, ε=1e-8) applied to exactly the
// parameters present in `grads`; other entries keep their values and moments.
void adam_step(ParamStore& store, const GradTable& grads, double lr);

// FNV-1a over raw parameter bytes; used for frozen-network assertions.
std::uint64_t params_checksum(const ParamStore& store);

// Binds a ParamStore into a tape: each parameter becomes a leaf Var on first
// use, and gradients can be collected back by name after backward().
class ParamBinding {
 public:
  ParamBinding(Tape& tape, ParamStore& store, bool track_gradients = true)
      : tape_(&tape), store_(&store), track_(track_gradients) {}

  Var operator[](const std::string& name);
  GradTable collect_grads() const;
  ParamStore& store() { return *store_; }

 private:
  Tape* tape_;
  ParamStore* store_;
  bool track_;
  std::vector<std::pair<std::string, Var>> bound_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace ghp
