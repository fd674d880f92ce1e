#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ghp/ensemble.hpp"
#include "ghp/latent.hpp"

namespace ghp {

// A dynamics/reward ensemble pair plus the variational posteriors of the
// tasks it is trained on. Latent-variable modes use one pool over all tasks;
// the specialist baseline uses one pool per task; the generalist uses one
// pool with an empty layout.
class ModelPool {
 public:
  ModelPool(LatentLayout layout, int members, const NetSpec& dyn_spec, const NetSpec& rew_spec,
            std::span<const int> task_ids, Rng& init_rng);
  ModelPool(const ModelPool&) = delete;
  ModelPool& operator=(const ModelPool&) = delete;

  const LatentLayout& layout() const { return layout_; }
  ProbabilisticEnsemble& dyn() { return dyn_; }
  const ProbabilisticEnsemble& dyn() const { return dyn_; }
  ProbabilisticEnsemble& rew() { return rew_; }
  const ProbabilisticEnsemble& rew() const { return rew_; }
  const std::vector<int>& task_ids() const { return task_ids_; }
  int members() const { return dyn_.size(); }

  TaskPosterior* posterior_for(int task_id);
  const TaskPosterior* posterior_for(int task_id) const;
  std::vector<TaskPosterior>& posteriors() { return posteriors_; }
  const std::vector<TaskPosterior>& posteriors() const { return posteriors_; }

  // checksum over every network parameter (both ensembles, all members)
  std::uint64_t network_checksum() const;

 private:
  LatentLayout layout_;
  ProbabilisticEnsemble dyn_;
  ProbabilisticEnsemble rew_;
  std::vector<int> task_ids_;
  std::vector<TaskPosterior> posteriors_;
};

}  // namespace ghp
