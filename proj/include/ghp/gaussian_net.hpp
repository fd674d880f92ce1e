#pragma once

#include <span>
#include <string>
#include <vector>

#include "ghp/param_store.hpp"
#include "ghp/rng.hpp"
#include "ghp/tape.hpp"

namespace ghp {

struct NetSpec {
  int data_dim = 0;    // normalized observable inputs (state/action/next-state parts)
  int latent_dim = 0;  // latent inputs appended after the data block
  int out_dim = 0;
  std::vector<int> hidden;

  int in_dim() const { return data_dim + latent_dim; }
  bool operator==(const NetSpec&) const = default;
};

// Multilayer network with a Gaussian head: outputs a mean and a log-variance
// per output dimension. Hidden activation is swish; the log-variance is
// soft-bounded strictly inside (kLogVarMin, kLogVarMax). Output-layer weights
// start at zero so an untrained net predicts zero mean.
class GaussianHeadNet {
 public:
  GaussianHeadNet(const NetSpec& spec, Rng& init_rng);

  const NetSpec& spec() const { return spec_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  struct TapedOut {
    Var mean, log_var;
  };
  // data: {B, data_dim} constant; latents: rank-1 Vars broadcast across rows.
  TapedOut forward(Tape& tape, ParamBinding& self, const Array& data,
                   std::span<const Var> latents) const;

  // Raw forward for planning: input = data part ++ latent part, already
  // normalized by the caller. Writes out_dim means and log-variances.
  struct Workspace {
    std::vector<double> a, b;
  };
  void forward_raw(std::span<const double> input, std::span<double> mean,
                   std::span<double> log_var, Workspace& ws) const;

  static double bound_log_var(double raw);
  Var bound_log_var(Tape& tape, Var raw) const;

  static constexpr double kLogVarMax = 0.5;
  static constexpr double kLogVarMin = -10.0;

 private:
  NetSpec spec_;
  ParamStore params_;
  std::vector<std::string> w_names_, b_names_;  // hidden layers then output
};

}  // namespace ghp
