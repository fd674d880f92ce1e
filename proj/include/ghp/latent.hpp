#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghp/param_store.hpp"
#include "ghp/rng.hpp"
#include "ghp/tape.hpp"

namespace ghp {

// Which model a latent factor feeds. Dynamics- and agent-kind factors feed
// the dynamics model; reward-kind factors feed the reward model. In joint
// mode the single factor feeds both regardless of kind.
enum class FactorKind { Dynamics, Agent, Reward };

struct FactorSpec {
  std::string name;
  int dim = 0;
  FactorKind kind = FactorKind::Dynamics;
};

enum class LatentMode { Joint, Structured };

struct LatentLayout {
  LatentMode mode = LatentMode::Joint;
  std::vector<FactorSpec> factors;

  static LatentLayout none() { return LatentLayout{LatentMode::Joint, {}}; }
  static LatentLayout joint(int dim, const std::string& name = "z");
  static LatentLayout structured(std::vector<FactorSpec> factors);

  bool empty() const { return factors.empty(); }
  int total_dim() const;
  int dyn_dim() const;
  int rew_dim() const;
  std::vector<int> dyn_factors() const;  // factor indices wired into the dynamics model
  std::vector<int> rew_factors() const;
  int factor_index(std::string_view name) const;  // -1 when missing
  void validate() const;
};

const char* factor_kind_name(FactorKind k);
FactorKind factor_kind_from_name(std::string_view s);

// Per-task diagonal-Gaussian variational posterior over every latent factor.
// Parameters are "<factor>.mu" and "<factor>.log_std"; the prior is N(0, I).
class TaskPosterior {
 public:
  TaskPosterior(int task_id, const LatentLayout& layout);

  int task_id() const { return task_id_; }
  const LatentLayout& layout() const { return *layout_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // µ = 0, log-std = 0 for every factor; optimizer moments cleared
  void reset_to_prior();

  // z = µ + exp(log_std)·ε with the provided ε (shape {dim}); differentiable
  // w.r.t. µ and log_std through `self`
  Var sample_reparam(Tape& tape, ParamBinding& self, int factor, const Array& eps) const;
  Var sample_reparam(Tape& tape, ParamBinding& self, std::string_view factor,
                     const Array& eps) const;

  void sample_raw(int factor, Rng& rng, std::span<double> out) const;

  Var factor_kl(Tape& tape, ParamBinding& self, int factor) const;
  Var kl_to_prior(Tape& tape, ParamBinding& self) const;  // sum over factors
  double kl_value() const;

  std::vector<double> factor_mean(int factor) const;
  std::vector<double> factor_std(int factor) const;

 private:
  std::string mu_name(int factor) const;
  std::string ls_name(int factor) const;

  int task_id_;
  const LatentLayout* layout_;
  ParamStore params_;
};

// Elementwise softplus; maps an unconstrained latent to a positive parameter.
Var positive_transform(Tape& tape, Var z);
double positive_transform(double z);

}  // namespace ghp
