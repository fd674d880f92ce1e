#include "ghp/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ghp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

double diag_gaussian_log_density(std::span<const double> x, std::span<const double> mean,
                                 std::span<const double> log_var) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - mean[i];
    acc += d * d * std::exp(-log_var[i]) + log_var[i] + kLog2Pi;
  }
  return -0.5 * acc;
}

ProbabilisticEnsemble::ProbabilisticEnsemble(ModelRole role, int members, const NetSpec& spec,
                                             Rng& init_rng)
    : role_(role), spec_(spec), normalizer_(spec.data_dim) {
  if (members < 1) throw std::invalid_argument("ProbabilisticEnsemble: need at least one member");
  members_.reserve(members);
  for (int i = 0; i < members; ++i) members_.emplace_back(spec, init_rng);
}

void ProbabilisticEnsemble::assemble_dyn_input(std::span<const double> s, std::span<const double> a,
                                               std::span<const double> z,
                                               std::vector<double>& buf) const {
  std::size_t ds = s.size(), da = a.size();
  if (static_cast<int>(ds + da) != spec_.data_dim)
    throw std::invalid_argument("ensemble dynamics: state+action dims do not match spec");
  if (static_cast<int>(z.size()) != spec_.latent_dim)
    throw std::invalid_argument("ensemble dynamics: latent dim mismatch");
  buf.resize(spec_.in_dim());
  std::vector<double> raw(ds + da);
  std::copy(s.begin(), s.end(), raw.begin());
  std::copy(a.begin(), a.end(), raw.begin() + ds);
  normalizer_.normalize(raw, std::span<double>(buf.data(), ds + da));
  std::copy(z.begin(), z.end(), buf.begin() + ds + da);
}

void ProbabilisticEnsemble::assemble_rew_input(std::span<const double> s, std::span<const double> a,
                                               std::span<const double> s_next,
                                               std::span<const double> z,
                                               std::vector<double>& buf) const {
  std::size_t ds = s.size(), da = a.size(), dn = s_next.size();
  if (static_cast<int>(ds + da + dn) != spec_.data_dim)
    throw std::invalid_argument("ensemble reward: state+action+next dims do not match spec");
  if (static_cast<int>(z.size()) != spec_.latent_dim)
    throw std::invalid_argument("ensemble reward: latent dim mismatch");
  buf.resize(spec_.in_dim());
  std::vector<double> raw(ds + da + dn);
  std::copy(s.begin(), s.end(), raw.begin());
  std::copy(a.begin(), a.end(), raw.begin() + ds);
  std::copy(s_next.begin(), s_next.end(), raw.begin() + ds + da);
  normalizer_.normalize(raw, std::span<double>(buf.data(), ds + da + dn));
  std::copy(z.begin(), z.end(), buf.begin() + ds + da + dn);
}

void ProbabilisticEnsemble::predict_dyn(int member, std::span<const double> s,
                                        std::span<const double> a, std::span<const double> z,
                                        std::span<double> mean_delta, std::span<double> log_var,
                                        Workspace& ws) const {
  thread_local std::vector<double> buf;
  assemble_dyn_input(s, a, z, buf);
  members_[member].forward_raw(buf, mean_delta, log_var, ws);
}

void ProbabilisticEnsemble::sample_next_state(int member, std::span<const double> s,
                                              std::span<const double> a, std::span<const double> z,
                                              Rng& rng, std::span<double> next_state,
                                              Workspace& ws) const {
  std::size_t ds = s.size();
  thread_local std::vector<double> mean, lv;
  mean.resize(ds);
  lv.resize(ds);
  predict_dyn(member, s, a, z, mean, lv, ws);
  for (std::size_t i = 0; i < ds; ++i)
    next_state[i] = s[i] + mean[i] + std::exp(0.5 * lv[i]) * rng.normal();
}

void ProbabilisticEnsemble::predict_reward(int member, std::span<const double> s,
                                           std::span<const double> a,
                                           std::span<const double> s_next,
                                           std::span<const double> z, double& mean,
                                           double& log_var, Workspace& ws) const {
  thread_local std::vector<double> buf;
  assemble_rew_input(s, a, s_next, z, buf);
  double m[1], l[1];
  members_[member].forward_raw(buf, m, l, ws);
  mean = m[0];
  log_var = l[0];
}

double ProbabilisticEnsemble::sample_reward(int member, std::span<const double> s,
                                            std::span<const double> a,
                                            std::span<const double> s_next,
                                            std::span<const double> z, Rng& rng,
                                            Workspace& ws) const {
  double mean, lv;
  predict_reward(member, s, a, s_next, z, mean, lv, ws);
  return mean + std::exp(0.5 * lv) * rng.normal();
}

double ProbabilisticEnsemble::mixture_log_prob(std::span<const double> s, std::span<const double> a,
                                               std::span<const double> s_next,
                                               std::span<const double> z,
                                               std::span<const double> target) const {
  Workspace ws;
  std::vector<double> logps;
  logps.reserve(members_.size());
  if (role_ == ModelRole::Dynamics) {
    std::size_t ds = s.size();
    std::vector<double> mean(ds), lv(ds), delta(ds);
    for (std::size_t i = 0; i < ds; ++i) delta[i] = target[i] - s[i];
    for (int m = 0; m < size(); ++m) {
      predict_dyn(m, s, a, z, mean, lv, ws);
      logps.push_back(diag_gaussian_log_density(delta, mean, lv));
    }
  } else {
    double mean, lv;
    for (int m = 0; m < size(); ++m) {
      predict_reward(m, s, a, s_next, z, mean, lv, ws);
      double mv[1] = {mean}, lvv[1] = {lv};
      logps.push_back(diag_gaussian_log_density(target, mv, lvv));
    }
  }
  double mx = *std::max_element(logps.begin(), logps.end());
  double acc = 0.0;
  for (double lp : logps) acc += std::exp(lp - mx);
  return mx + std::log(acc) - std::log(static_cast<double>(size()));
}

Array ProbabilisticEnsemble::make_dyn_inputs(const Array& states, const Array& actions) const {
  std::size_t b = states.rows(), ds = states.cols(), da = actions.cols();
  if (actions.rows() != b) throw std::invalid_argument("make_dyn_inputs: batch mismatch");
  Array out = Array::zeros({b, ds + da});
  std::vector<double> raw(ds + da), norm(ds + da);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t i = 0; i < ds; ++i) raw[i] = states.at(r, i);
    for (std::size_t i = 0; i < da; ++i) raw[ds + i] = actions.at(r, i);
    normalizer_.normalize(raw, norm);
    for (std::size_t i = 0; i < ds + da; ++i) out.at(r, i) = norm[i];
  }
  return out;
}

Array ProbabilisticEnsemble::make_rew_inputs(const Array& states, const Array& actions,
                                             const Array& next_states) const {
  std::size_t b = states.rows(), ds = states.cols(), da = actions.cols(), dn = next_states.cols();
  if (actions.rows() != b || next_states.rows() != b)
    throw std::invalid_argument("make_rew_inputs: batch mismatch");
  Array out = Array::zeros({b, ds + da + dn});
  std::vector<double> raw(ds + da + dn), norm(ds + da + dn);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t i = 0; i < ds; ++i) raw[i] = states.at(r, i);
    for (std::size_t i = 0; i < da; ++i) raw[ds + i] = actions.at(r, i);
    for (std::size_t i = 0; i < dn; ++i) raw[ds + da + i] = next_states.at(r, i);
    normalizer_.normalize(raw, norm);
    for (std::size_t i = 0; i < ds + da + dn; ++i) out.at(r, i) = norm[i];
  }
  return out;
}

double ProbabilisticEnsemble::param_l2_distance(int i, int j) const {
  const ParamStore& a = members_[i].params();
  const ParamStore& b = members_[j].params();
  double acc = 0.0;
  for (const auto& name : a.names()) {
    const Array& va = a.value(name);
    const Array& vb = b.value(name);
    for (std::size_t k = 0; k < va.size(); ++k) {
      double d = va.data[k] - vb.data[k];
      acc += d * d;
    }
  }
  return std::sqrt(acc);
}

}  // namespace ghp
