#include "ghp/model_pool.hpp"

#include <stdexcept>

namespace ghp {

ModelPool::ModelPool(LatentLayout layout, int members, const NetSpec& dyn_spec,
                     const NetSpec& rew_spec, std::span<const int> task_ids, Rng& init_rng)
    : layout_(std::move(layout)),
      dyn_(ModelRole::Dynamics, members, dyn_spec, init_rng),
      rew_(ModelRole::Reward, members, rew_spec, init_rng),
      task_ids_(task_ids.begin(), task_ids.end()) {
  layout_.validate();
  if (dyn_spec.latent_dim != layout_.dyn_dim())
    throw std::invalid_argument("ModelPool: dynamics latent_dim does not match layout");
  if (rew_spec.latent_dim != layout_.rew_dim())
    throw std::invalid_argument("ModelPool: reward latent_dim does not match layout");
  posteriors_.reserve(task_ids_.size());
  for (int id : task_ids_) posteriors_.emplace_back(id, layout_);
}

TaskPosterior* ModelPool::posterior_for(int task_id) {
  for (auto& p : posteriors_)
    if (p.task_id() == task_id) return &p;
  return nullptr;
}

const TaskPosterior* ModelPool::posterior_for(int task_id) const {
  for (const auto& p : posteriors_)
    if (p.task_id() == task_id) return &p;
  return nullptr;
}

std::uint64_t ModelPool::network_checksum() const {
  std::uint64_t h = 0;
  for (int m = 0; m < dyn_.size(); ++m)
    h = mix_seed(h, params_checksum(dyn_.member(m).params()));
  for (int m = 0; m < rew_.size(); ++m)
    h = mix_seed(h, params_checksum(rew_.member(m).params()));
  return h;
}

}  // namespace ghp
