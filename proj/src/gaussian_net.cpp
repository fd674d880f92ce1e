#include "ghp/gaussian_net.hpp"

#include <cmath>
#include <stdexcept>

namespace ghp {

GaussianHeadNet::GaussianHeadNet(const NetSpec& spec, Rng& init_rng) : spec_(spec) {
  if (spec.out_dim <= 0 || spec.in_dim() <= 0)
    throw std::invalid_argument("GaussianHeadNet: dimensions must be positive");
  int in = spec.in_dim();
  for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
    int out = spec.hidden[l];
    std::string wn = "h" + std::to_string(l) + ".w";
    std::string bn = "h" + std::to_string(l) + ".b";
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Array w = Array::zeros({static_cast<std::size_t>(out), static_cast<std::size_t>(in)});
    for (double& v : w.data) v = init_rng.uniform(-bound, bound);
    Array b = Array::zeros({static_cast<std::size_t>(out)});
    for (double& v : b.data) v = init_rng.uniform(-bound, bound);
    params_.add(wn, std::move(w));
    params_.add(bn, std::move(b));
    w_names_.push_back(wn);
    b_names_.push_back(bn);
    in = out;
  }
  // zero-initialized head: untrained nets predict zero mean and the bound(0)
  // log-variance, so early plans see "no change" dynamics and zero reward
  std::size_t head = 2 * static_cast<std::size_t>(spec.out_dim);
  params_.add("out.w", Array::zeros({head, static_cast<std::size_t>(in)}));
  params_.add("out.b", Array::zeros({head}));
  w_names_.push_back("out.w");
  b_names_.push_back("out.b");
}

double GaussianHeadNet::bound_log_var(double raw) {
  double lv = kLogVarMax - softplus(kLogVarMax - raw);
  return kLogVarMin + softplus(lv - kLogVarMin);
}

Var GaussianHeadNet::bound_log_var(Tape& t, Var raw) const {
  // lv = max − softplus(max − raw); lv = min + softplus(lv − min)
  Var upper = t.add_const(t.scale(t.softplus(t.add_const(t.scale(raw, -1.0), kLogVarMax)), -1.0),
                          kLogVarMax);
  return t.add_const(t.softplus(t.add_const(upper, -kLogVarMin)), kLogVarMin);
}

GaussianHeadNet::TapedOut GaussianHeadNet::forward(Tape& t, ParamBinding& self, const Array& data,
                                                   std::span<const Var> latents) const {
  if (static_cast<int>(data.cols()) != spec_.data_dim && spec_.data_dim > 0)
    throw std::invalid_argument("GaussianHeadNet: data width " + std::to_string(data.cols()) +
                                " != spec data_dim " + std::to_string(spec_.data_dim));
  std::vector<Var> parts;
  if (spec_.data_dim > 0) parts.push_back(t.constant(data));
  for (Var z : latents) parts.push_back(z);
  Var x = parts.size() == 1 ? parts[0] : t.concat_cols(parts);
  if (static_cast<int>(t.value(x).cols()) != spec_.in_dim())
    throw std::invalid_argument("GaussianHeadNet: assembled input width " +
                                std::to_string(t.value(x).cols()) + " != spec in_dim " +
                                std::to_string(spec_.in_dim()));

  std::size_t nh = spec_.hidden.size();
  for (std::size_t l = 0; l < nh; ++l)
    x = t.swish(t.affine(x, self[w_names_[l]], self[b_names_[l]]));
  Var head = t.affine(x, self[w_names_[nh]], self[b_names_[nh]]);
  std::size_t d = static_cast<std::size_t>(spec_.out_dim);
  Var mean = t.slice_cols(head, 0, d);
  Var raw_lv = t.slice_cols(head, d, 2 * d);
  return {mean, bound_log_var(t, raw_lv)};
}

void GaussianHeadNet::forward_raw(std::span<const double> input, std::span<double> mean,
                                  std::span<double> log_var, Workspace& ws) const {
  if (static_cast<int>(input.size()) != spec_.in_dim())
    throw std::invalid_argument("GaussianHeadNet: raw input size " + std::to_string(input.size()) +
                                " != spec in_dim " + std::to_string(spec_.in_dim()));
  std::size_t maxw = input.size();
  for (int h : spec_.hidden) maxw = std::max(maxw, static_cast<std::size_t>(h));
  maxw = std::max(maxw, 2 * static_cast<std::size_t>(spec_.out_dim));
  ws.a.resize(maxw);
  ws.b.resize(maxw);

  const double* cur = input.data();
  std::size_t cur_n = input.size();
  double* nxt = ws.a.data();
  for (std::size_t l = 0; l < w_names_.size(); ++l) {
    const Array& w = params_.value(w_names_[l]);
    const Array& b = params_.value(b_names_[l]);
    std::size_t m = w.shape[0], nin = w.shape[1];
    bool last = l + 1 == w_names_.size();
    for (std::size_t j = 0; j < m; ++j) {
      const double* wj = w.data.data() + j * nin;
      double acc = b.data[j];
      for (std::size_t k = 0; k < nin; ++k) acc += wj[k] * cur[k];
      nxt[j] = last ? acc : acc * sigmoid(acc);
    }
    cur = nxt;
    cur_n = m;
    nxt = (nxt == ws.a.data()) ? ws.b.data() : ws.a.data();
  }
  std::size_t d = static_cast<std::size_t>(spec_.out_dim);
  for (std::size_t j = 0; j < d; ++j) {
    mean[j] = cur[j];
    log_var[j] = bound_log_var(cur[d + j]);
  }
}

}  // namespace ghp
