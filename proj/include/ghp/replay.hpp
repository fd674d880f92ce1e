#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace ghp {

// One observed environment step.
struct TransitionRecord {
  std::vector<double> state, action, next_state;
  double reward = 0.0;
  bool done = false;
  int task_id = -1;
};

// Append-only per-task transition storage.
class ReplayBuffer {
 public:
  void register_task(int task_id) { per_task_[task_id]; }

  void append(TransitionRecord rec) {
    auto it = per_task_.find(rec.task_id);
    if (it == per_task_.end())
      throw std::invalid_argument("ReplayBuffer: unregistered task " + std::to_string(rec.task_id));
    it->second.push_back(std::move(rec));
  }

  bool has_task(int task_id) const { return per_task_.count(task_id) != 0; }

  const std::vector<TransitionRecord>& records(int task_id) const {
    auto it = per_task_.find(task_id);
    if (it == per_task_.end())
      throw std::invalid_argument("ReplayBuffer: unknown task " + std::to_string(task_id));
    return it->second;
  }

  std::size_t size(int task_id) const { return records(task_id).size(); }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& [id, recs] : per_task_) n += recs.size();
    return n;
  }

  std::vector<int> task_ids() const {
    std::vector<int> out;
    out.reserve(per_task_.size());
    for (const auto& [id, recs] : per_task_) out.push_back(id);
    return out;
  }

 private:
  std::map<int, std::vector<TransitionRecord>> per_task_;
};

}  // namespace ghp
