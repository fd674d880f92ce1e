#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ghp/model_pool.hpp"
#include "ghp/replay.hpp"
#include "ghp/rng.hpp"

namespace ghp {

// Transition batch from a single task, laid out as matrices for the tape.
struct Minibatch {
  int task_id = -1;
  Array states, actions, next_states, deltas, rewards;  // {B,·}, rewards {B,1}
  std::size_t task_buffer_size = 0;  // N_task, for the B/N KL scaling

  std::size_t batch_size() const { return states.rows(); }
};

Minibatch make_minibatch(std::span<const TransitionRecord> records,
                         std::span<const std::size_t> indices, std::size_t task_buffer_size);

struct LossVars {
  Var total, dyn_nll, rew_nll, kl_scaled;
  std::vector<std::pair<std::string, Var>> factor_kls;  // scaled, sum to kl_scaled
};

// total = dyn_nll + rew_nll + kl (kl already carries the B/N scaling)
struct LossReport {
  double total = 0, dyn_nll = 0, rew_nll = 0, kl = 0;
  std::vector<std::pair<std::string, double>> factor_kls;
};

struct LossOptions {
  int latent_samples = 2;      // M reparameterized draws per evaluation
  double kl_scale = 1.0;       // B / N_task
  bool track_model_grads = true;
};

// Negative-ELBO minibatch loss for one ensemble member pair. The layout
// decides the wiring: joint mode feeds the single factor to both models,
// structured mode feeds dynamics/agent factors to the dynamics model and
// reward factors to the reward model, with one KL per factor. A null
// `rew`/`rew_binding` drops the reward term; a null posterior (latent-free
// baseline) drops sampling and the KL.
LossVars build_loss(Tape& tape, GaussianHeadNet& dyn_member, const ProbabilisticEnsemble& dyn,
                    ParamBinding& dyn_binding, GaussianHeadNet* rew_member,
                    const ProbabilisticEnsemble* rew, ParamBinding* rew_binding,
                    const TaskPosterior* posterior, ParamBinding* post_binding,
                    const Minibatch& batch, const LossOptions& options, Rng& eps_rng);

LossReport loss_report(const Tape& tape, const LossVars& vars);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 64;
  double lr = 1e-3;
  int latent_samples = 2;
  int threads = 1;
};

struct TrainPhaseReport {
  double first_epoch_mean_loss = 0.0;
  double last_epoch_mean_loss = 0.0;
  std::size_t batches = 0;
  bool finite = true;
};

// One training phase: for every ensemble member, `epochs` epochs of
// minibatch Adam over that member's bootstrap resample of each task buffer,
// tasks interleaved round-robin. Variational parameters receive the
// member-averaged gradient once per batch step. Normalizers are refit from
// the pool's full dataset first.
TrainPhaseReport train_phase(const ReplayBuffer& buffer, ModelPool& pool,
                             const TrainConfig& config, std::uint64_t phase_seed);

struct InferenceConfig {
  int iterations = 100;
  double lr = 5e-3;  // already includes any test-time multiplier
  int batch_cap = 32;
  int latent_samples = 2;
  int threads = 1;
};

// Posterior-only SVI on observed test-task data: networks stay frozen, the
// posterior takes `iterations` Adam steps on the member-averaged loss over
// (a subsample of) all data observed so far. Empty data is a warned no-op.
void testtime_inference(ModelPool& pool, TaskPosterior& posterior,
                        std::span<const TransitionRecord> observed, const InferenceConfig& config,
                        std::uint64_t seed);

}  // namespace ghp
