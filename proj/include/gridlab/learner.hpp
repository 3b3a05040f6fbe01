#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gridlab/agent.hpp"
#include "gridlab/config.hpp"
#include "gridlab/tasks.hpp"

namespace gridlab {

// One actor-side record: at most `unroll` steps and at most one terminal
// step, which closes the record. Bootstrap observation included when the
// episode continues past the cut.
struct Trajectory {
  std::vector<int> instruction;
  std::vector<Frame> frames;
  std::vector<Action> actions;
  std::vector<float> behavior_log_probs;
  std::vector<float> rewards;
  std::vector<float> prev_rewards;
  bool done = false;
  Frame bootstrap_frame;
  float bootstrap_prev_reward = 0.0f;
  Tensor h0, c0;  // memory LSTM state entering the record
  std::int64_t params_version = 0;
  double episode_return = -1.0;  // set on terminal records

  int length() const { return static_cast<int>(frames.size()); }
};

// Bounded FIFO between actors and the learner.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(size_t capacity) : capacity_(capacity) {}

  bool push(T item) {
    std::unique_lock lk(mu_);
    cv_push_.wait(lk, [&] { return closed_ || q_.size() < capacity_; });
    if (closed_) return false;
    q_.push_back(std::move(item));
    cv_pop_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lk(mu_);
    cv_pop_.wait(lk, [&] { return closed_ || !q_.empty(); });
    if (q_.empty()) return std::nullopt;
    T item = std::move(q_.front());
    q_.pop_front();
    cv_push_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    cv_push_.notify_all();
    cv_pop_.notify_all();
  }

  size_t size() const {
    std::lock_guard lk(mu_);
    return q_.size();
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_push_, cv_pop_;
  std::deque<T> q_;
  size_t capacity_;
  bool closed_ = false;
};

// Atomically published immutable parameter snapshots; actors pick up the
// latest at episode boundaries.
class SnapshotStore {
 public:
  struct Snapshot {
    std::shared_ptr<const AgentParams> params;
    std::int64_t version = 0;
  };

  void publish(const AgentParams& params) {
    auto next = std::make_shared<AgentParams>(params);
    std::lock_guard lk(mu_);
    ++version_;
    snap_ = {std::move(next), version_};
  }

  Snapshot get() const {
    std::lock_guard lk(mu_);
    return snap_;
  }

 private:
  mutable std::mutex mu_;
  Snapshot snap_;
  std::int64_t version_ = 0;
};

struct LossResult {
  double loss = 0;
  double pg_loss = 0;
  double value_loss = 0;
  double entropy = 0;      // mean per step
  double value_error = 0;  // mean squared target error per step
  double max_rho = 0;      // largest clipped importance ratio in the batch
  std::vector<Tensor> grads;  // one per parameter tensor
};

// V-trace actor-critic loss over a batch of trajectories:
//   -sum adv_t log pi(a_t) + beta_v * 1/2 sum (vs_t - V_t)^2
//   - beta_e * sum entropy(pi_t),  averaged per step.
// Targets (vs, adv) are constants with respect to the parameters.
LossResult compute_loss(const AgentParams& params,
                        const std::vector<Trajectory>& batch,
                        const ExperimentConfig& cfg);

struct TrainResult {
  AgentParams params;
  std::string metrics_csv;
  std::string final_checkpoint;
  std::int64_t frames = 0;
  std::int64_t steps = 0;
};

// Runs one training job (one replica): actors feed a bounded queue, the
// learner consumes batches and publishes snapshots. `deterministic` runs
// one synchronous in-thread actor instead. Metrics go to
// <out_dir>/metrics_<tag>.csv, checkpoints to <out_dir>/ckpt_<tag>_*.bin.
TrainResult run_training(const ExperimentConfig& cfg, const SplitSpec& split,
                         std::uint64_t seed, const std::string& tag);

}  // namespace gridlab
