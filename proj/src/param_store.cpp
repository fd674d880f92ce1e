#include "ghp/param_store.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace ghp {

void GradTable::add(const std::string& name, Array grad) {
  auto it = index_.find(name);
  if (it != index_.end()) {
    Array& g = items_[it->second].second;
    if (!g.same_shape(grad))
      throw std::invalid_argument("GradTable: shape mismatch accumulating '" + name + "'");
    for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += grad.data[i];
    return;
  }
  index_[name] = items_.size();
  items_.emplace_back(name, std::move(grad));
}

void GradTable::accumulate(const GradTable& other) {
  for (const auto& [name, g] : other.items_) add(name, g);
}

void GradTable::scale(double c) {
  for (auto& [name, g] : items_)
    for (double& v : g.data) v *= c;
}

const Array* GradTable::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &items_[it->second].second;
}

void ParamStore::add(const std::string& name, Array init) {
  if (entries_.count(name)) throw std::invalid_argument("ParamStore: duplicate parameter '" + name + "'");
  Entry e;
  e.m = Array::zeros(init.shape);
  e.v = Array::zeros(init.shape);
  e.value = std::move(init);
  entries_.emplace(name, std::move(e));
  order_.push_back(name);
}

bool ParamStore::has(const std::string& name) const { return entries_.count(name) != 0; }

ParamStore::Entry& ParamStore::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::invalid_argument("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::invalid_argument("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

Array& ParamStore::value(const std::string& name) { return entry(name).value; }
const Array& ParamStore::value(const std::string& name) const { return entry(name).value; }
const Array& ParamStore::moment1(const std::string& name) const { return entry(name).m; }
const Array& ParamStore::moment2(const std::string& name) const { return entry(name).v; }

void ParamStore::restore_entry(const std::string& name, Array value, Array m1, Array m2) {
  Entry& e = entry(name);
  if (!e.value.same_shape(value))
    throw std::invalid_argument("ParamStore: restore shape mismatch for '" + name + "'");
  e.value = std::move(value);
  e.m = std::move(m1);
  e.v = std::move(m2);
}

void ParamStore::reset_moments() {
  for (auto& [name, e] : entries_) {
    e.m = Array::zeros(e.value.shape);
    e.v = Array::zeros(e.value.shape);
  }
  step_ = 0;
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& name : order_) n += entry(name).value.size();
  return n;
}

void adam_step(ParamStore& store, const GradTable& grads, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: learning_rate must be > 0");
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  store.step_ += 1;
  double t = static_cast<double>(store.step_);
  double c1 = 1.0 - std::pow(b1, t);
  double c2 = 1.0 - std::pow(b2, t);
  for (const auto& [name, g] : grads.items()) {
    auto& e = store.entry(name);
    if (!e.value.same_shape(g))
      throw std::invalid_argument("adam_step: gradient shape mismatch for '" + name + "'");
    if (!g.all_finite())
      throw std::runtime_error("adam_step: non-finite gradient for parameter '" + name + "'");
    for (std::size_t i = 0; i < g.size(); ++i) {
      double gi = g.data[i];
      e.m.data[i] = b1 * e.m.data[i] + (1.0 - b1) * gi;
      e.v.data[i] = b2 * e.v.data[i] + (1.0 - b2) * gi * gi;
      double mhat = e.m.data[i] / c1;
      double vhat = e.v.data[i] / c2;
      e.value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

std::uint64_t params_checksum(const ParamStore& store) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& name : store.names()) {
    feed(name.data(), name.size());
    const Array& v = store.value(name);
    feed(v.data.data(), v.data.size() * sizeof(double));
  }
  return h;
}

Var ParamBinding::operator[](const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) return bound_[it->second].second;
  Var v = tape_->input(store_->value(name), track_);
  index_[name] = bound_.size();
  bound_.emplace_back(name, v);
  return v;
}

GradTable ParamBinding::collect_grads() const {
  GradTable out;
  for (const auto& [name, var] : bound_) out.add(name, tape_->grad_or_zero(var));
  return out;
}

}  // namespace ghp
