#pragma once

#include <span>
#include <vector>

#include "ghp/gaussian_net.hpp"
#include "ghp/normalizer.hpp"
#include "ghp/rng.hpp"

namespace ghp {

enum class ModelRole { Dynamics, Reward };

// M independently parameterized Gaussian-head networks whose predictive
// distribution is the uniform mixture over members. The dynamics role
// predicts the state delta; the reward role predicts the scalar reward.
class ProbabilisticEnsemble {
 public:
  ProbabilisticEnsemble(ModelRole role, int members, const NetSpec& spec, Rng& init_rng);

  ModelRole role() const { return role_; }
  int size() const { return static_cast<int>(members_.size()); }
  GaussianHeadNet& member(int i) { return members_[i]; }
  const GaussianHeadNet& member(int i) const { return members_[i]; }
  Normalizer& normalizer() { return normalizer_; }
  const Normalizer& normalizer() const { return normalizer_; }
  const NetSpec& spec() const { return spec_; }

  using Workspace = GaussianHeadNet::Workspace;

  // Dynamics: input is normalized (s ++ a) ++ z, output is delta-state.
  void predict_dyn(int member, std::span<const double> s, std::span<const double> a,
                   std::span<const double> z, std::span<double> mean_delta,
                   std::span<double> log_var, Workspace& ws) const;
  void sample_next_state(int member, std::span<const double> s, std::span<const double> a,
                         std::span<const double> z, Rng& rng, std::span<double> next_state,
                         Workspace& ws) const;

  // Reward: input is normalized (s ++ a ++ s') ++ z, output is scalar.
  void predict_reward(int member, std::span<const double> s, std::span<const double> a,
                      std::span<const double> s_next, std::span<const double> z, double& mean,
                      double& log_var, Workspace& ws) const;
  double sample_reward(int member, std::span<const double> s, std::span<const double> a,
                       std::span<const double> s_next, std::span<const double> z, Rng& rng,
                       Workspace& ws) const;

  // log[(1/M) Σ_m p_m(target | inputs)] via log-sum-exp. For the dynamics
  // role the target is the next state (density of the delta); for the reward
  // role s_next is the observed next state and target is the reward.
  double mixture_log_prob(std::span<const double> s, std::span<const double> a,
                          std::span<const double> s_next, std::span<const double> z,
                          std::span<const double> target) const;

  // Normalized data blocks for taped training passes.
  Array make_dyn_inputs(const Array& states, const Array& actions) const;
  Array make_rew_inputs(const Array& states, const Array& actions, const Array& next_states) const;

  // Pairwise parameter L2 distance (member diversity diagnostics).
  double param_l2_distance(int i, int j) const;

 private:
  void assemble_dyn_input(std::span<const double> s, std::span<const double> a,
                          std::span<const double> z, std::vector<double>& buf) const;
  void assemble_rew_input(std::span<const double> s, std::span<const double> a,
                          std::span<const double> s_next, std::span<const double> z,
                          std::vector<double>& buf) const;

  ModelRole role_;
  NetSpec spec_;
  std::vector<GaussianHeadNet> members_;
  Normalizer normalizer_;
};

// log density of a diagonal Gaussian given mean/log-variance vectors
double diag_gaussian_log_density(std::span<const double> x, std::span<const double> mean,
                                 std::span<const double> log_var);

}  // namespace ghp
