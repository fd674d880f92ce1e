#include "ghp/latent.hpp"

#include <cmath>
#include <stdexcept>

namespace ghp {

const char* factor_kind_name(FactorKind k) {
  switch (k) {
    case FactorKind::Dynamics: return "dynamics";
    case FactorKind::Agent: return "agent";
    case FactorKind::Reward: return "reward";
  }
  return "?";
}

FactorKind factor_kind_from_name(std::string_view s) {
  if (s == "dynamics") return FactorKind::Dynamics;
  if (s == "agent") return FactorKind::Agent;
  if (s == "reward") return FactorKind::Reward;
  throw std::invalid_argument("unknown factor kind '" + std::string(s) + "'");
}

LatentLayout LatentLayout::joint(int dim, const std::string& name) {
  LatentLayout l;
  l.mode = LatentMode::Joint;
  l.factors = {FactorSpec{name, dim, FactorKind::Dynamics}};
  l.validate();
  return l;
}

LatentLayout LatentLayout::structured(std::vector<FactorSpec> factors) {
  LatentLayout l;
  l.mode = LatentMode::Structured;
  l.factors = std::move(factors);
  l.validate();
  return l;
}

int LatentLayout::total_dim() const {
  int n = 0;
  for (const auto& f : factors) n += f.dim;
  return n;
}

std::vector<int> LatentLayout::dyn_factors() const {
  std::vector<int> out;
  if (empty()) return out;
  if (mode == LatentMode::Joint) {
    out.push_back(0);
    return out;
  }
  for (std::size_t i = 0; i < factors.size(); ++i)
    if (factors[i].kind != FactorKind::Reward) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> LatentLayout::rew_factors() const {
  std::vector<int> out;
  if (empty()) return out;
  if (mode == LatentMode::Joint) {
    out.push_back(0);
    return out;
  }
  for (std::size_t i = 0; i < factors.size(); ++i)
    if (factors[i].kind == FactorKind::Reward) out.push_back(static_cast<int>(i));
  return out;
}

int LatentLayout::dyn_dim() const {
  int n = 0;
  for (int i : dyn_factors()) n += factors[i].dim;
  return n;
}

int LatentLayout::rew_dim() const {
  int n = 0;
  for (int i : rew_factors()) n += factors[i].dim;
  return n;
}

int LatentLayout::factor_index(std::string_view name) const {
  for (std::size_t i = 0; i < factors.size(); ++i)
    if (factors[i].name == name) return static_cast<int>(i);
  return -1;
}

void LatentLayout::validate() const {
  if (empty()) return;  // latent-free baseline
  for (const auto& f : factors) {
    if (f.dim <= 0) throw std::invalid_argument("latent factor '" + f.name + "' must have positive dim");
    if (f.name.empty()) throw std::invalid_argument("latent factor with empty name");
  }
  for (std::size_t i = 0; i < factors.size(); ++i)
    for (std::size_t j = i + 1; j < factors.size(); ++j)
      if (factors[i].name == factors[j].name)
        throw std::invalid_argument("duplicate latent factor name '" + factors[i].name + "'");
  if (mode == LatentMode::Joint && factors.size() != 1)
    throw std::invalid_argument("joint latent mode requires exactly one factor");
  if (mode == LatentMode::Structured && factors.size() < 2)
    throw std::invalid_argument("structured latent mode requires at least two factors");
}

TaskPosterior::TaskPosterior(int task_id, const LatentLayout& layout)
    : task_id_(task_id), layout_(&layout) {
  for (const auto& f : layout.factors) {
    params_.add(f.name + ".mu", Array::zeros({static_cast<std::size_t>(f.dim)}));
    params_.add(f.name + ".log_std", Array::zeros({static_cast<std::size_t>(f.dim)}));
  }
}

std::string TaskPosterior::mu_name(int factor) const {
  return layout_->factors.at(factor).name + ".mu";
}
std::string TaskPosterior::ls_name(int factor) const {
  return layout_->factors.at(factor).name + ".log_std";
}

void TaskPosterior::reset_to_prior() {
  for (const auto& f : layout_->factors) {
    params_.value(f.name + ".mu") = Array::zeros({static_cast<std::size_t>(f.dim)});
    params_.value(f.name + ".log_std") = Array::zeros({static_cast<std::size_t>(f.dim)});
  }
  params_.reset_moments();
}

Var TaskPosterior::sample_reparam(Tape& t, ParamBinding& self, int factor, const Array& eps) const {
  if (factor < 0 || factor >= static_cast<int>(layout_->factors.size()))
    throw std::invalid_argument("sample_reparam: factor index out of range");
  if (static_cast<int>(eps.size()) != layout_->factors[factor].dim)
    throw std::invalid_argument("sample_reparam: eps dim mismatch for factor '" +
                                layout_->factors[factor].name + "'");
  Var mu = self[mu_name(factor)];
  Var ls = self[ls_name(factor)];
  return t.add(mu, t.mul(t.exp(ls), t.constant(eps)));
}

Var TaskPosterior::sample_reparam(Tape& t, ParamBinding& self, std::string_view factor,
                                  const Array& eps) const {
  int idx = layout_->factor_index(factor);
  if (idx < 0)
    throw std::invalid_argument("sample_reparam: unknown factor '" + std::string(factor) + "'");
  return sample_reparam(t, self, idx, eps);
}

void TaskPosterior::sample_raw(int factor, Rng& rng, std::span<double> out) const {
  const Array& mu = params_.value(mu_name(factor));
  const Array& ls = params_.value(ls_name(factor));
  for (std::size_t i = 0; i < mu.size(); ++i)
    out[i] = mu.data[i] + std::exp(ls.data[i]) * rng.normal();
}

Var TaskPosterior::factor_kl(Tape& t, ParamBinding& self, int factor) const {
  const auto& f = layout_->factors.at(factor);
  Var mu = self[mu_name(factor)];
  Var ls = self[ls_name(factor)];
  Var lv = t.scale(ls, 2.0);  // log σ² = 2 log σ
  std::size_t d = static_cast<std::size_t>(f.dim);
  return t.kl_diag_gaussian(mu, lv, Array::zeros({d}), Array::zeros({d}));
}

Var TaskPosterior::kl_to_prior(Tape& t, ParamBinding& self) const {
  if (layout_->empty()) return t.constant(0.0);
  Var acc = factor_kl(t, self, 0);
  for (std::size_t i = 1; i < layout_->factors.size(); ++i)
    acc = t.add(acc, factor_kl(t, self, static_cast<int>(i)));
  return acc;
}

double TaskPosterior::kl_value() const {
  double acc = 0.0;
  for (std::size_t fi = 0; fi < layout_->factors.size(); ++fi) {
    const Array& mu = params_.value(mu_name(static_cast<int>(fi)));
    const Array& ls = params_.value(ls_name(static_cast<int>(fi)));
    for (std::size_t i = 0; i < mu.size(); ++i) {
      double lv = 2.0 * ls.data[i];
      acc += 0.5 * (std::exp(lv) + mu.data[i] * mu.data[i] - 1.0 - lv);
    }
  }
  return acc;
}

std::vector<double> TaskPosterior::factor_mean(int factor) const {
  return params_.value(mu_name(factor)).data;
}

std::vector<double> TaskPosterior::factor_std(int factor) const {
  std::vector<double> out = params_.value(ls_name(factor)).data;
  for (double& v : out) v = std::exp(v);
  return out;
}

Var positive_transform(Tape& t, Var z) { return t.softplus(z); }
double positive_transform(double z) { return softplus(z); }

}  // namespace ghp
