#include "gridlab/learner.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include "gridlab/evaluate.hpp"
#include "gridlab/language.hpp"
#include "gridlab/optimizer.hpp"
#include "gridlab/vtrace.hpp"

namespace gridlab {
namespace {

AgentArch arch_from_config(const ExperimentConfig& cfg, int vocab_size,
                           bool classifier) {
  AgentArch arch;
  arch.in_h = cfg.derived.frame_h;
  arch.in_w = cfg.derived.frame_w;
  arch.channels = cfg.channels;
  arch.embed_dim = cfg.embed_dim;
  arch.lang_hidden = cfg.lang_hidden;
  arch.mem_hidden = cfg.lstm_hidden;
  arch.actions = cfg.derived.actions;
  arch.vocab_size = vocab_size;
  arch.prev_reward_input = cfg.derived.prev_reward;
  arch.classifier = classifier;
  arch.finalize();
  return arch;
}

// Environment-stepping side of training: owns one episode stream and emits
// trajectories cut at terminal steps or the unroll limit.
class Actor {
 public:
  Actor(const ExperimentConfig& cfg, const SplitSpec& split, const Vocab& vocab,
        const AgentArch& arch, std::uint64_t seed, int actor_id)
      : split_(split),
        vocab_(vocab),
        arch_(arch),
        view_(cfg.derived.view),
        unroll_(cfg.unroll) {
    RngStream base = derive_stream(seed, streams::kActorBase + actor_id);
    rng_sample_ = base.split(1);
    rng_act_ = base.split(2);
  }

  bool at_episode_boundary() const { return !ws_ || ws_->done; }

  Trajectory collect(const AgentParams& params, std::int64_t version) {
    if (at_episode_boundary()) start_episode();
    Trajectory traj;
    traj.instruction = instr_;
    traj.h0 = state_.h;
    traj.c0 = state_.c;
    traj.params_version = version;
    while (traj.length() < unroll_ && !ws_->done) {
      Frame obs = render(*ws_, view_);
      const AgentOutput out =
          agent_step(params, obs, instr_, prev_reward_, state_);
      const Action a = act_sample(out.policy, rng_act_);
      auto [next, res] = step(*ws_, a);
      traj.frames.push_back(std::move(obs));
      traj.actions.push_back(a);
      traj.behavior_log_probs.push_back(out.log_policy[static_cast<int>(a)]);
      traj.rewards.push_back(static_cast<float>(res.reward));
      traj.prev_rewards.push_back(prev_reward_);
      *ws_ = std::move(next);
      prev_reward_ = static_cast<float>(res.reward);
    }
    traj.done = ws_->done;
    if (ws_->done) {
      traj.episode_return = ws_->accumulated_return;
    } else {
      traj.bootstrap_frame = render(*ws_, view_);
      traj.bootstrap_prev_reward = prev_reward_;
    }
    return traj;
  }

 private:
  void start_episode() {
    EpisodeSpec spec = sample_episode(split_, Phase::train, rng_sample_);
    instr_ = tokenize_encode(spec.instruction, vocab_);
    ws_ = reset(spec);
    state_ = initial_state(arch_);
    prev_reward_ = 0.0f;
  }

  const SplitSpec& split_;
  const Vocab& vocab_;
  const AgentArch& arch_;
  ViewConfig view_;
  int unroll_;
  RngStream rng_sample_, rng_act_;
  std::optional<WorldState> ws_;
  std::vector<int> instr_;
  AgentState state_;
  float prev_reward_ = 0.0f;
};

}  // namespace

LossResult compute_loss(const AgentParams& params,
                        const std::vector<Trajectory>& batch,
                        const ExperimentConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("compute_loss: empty batch");

  std::vector<const Frame*> all_frames;
  for (const auto& traj : batch) {
    for (const auto& f : traj.frames) all_frames.push_back(&f);
    if (!traj.done) all_frames.push_back(&traj.bootstrap_frame);
  }

  Tape tape;
  AgentNet<float> net(tape, params, /*needs_grad=*/true);
  const auto frames_id = tape.value(frames_to_tensor(all_frames), false);
  const auto conv = net.conv_stack(frames_id);

  std::int64_t row = 0;
  std::vector<Tape::Id> act_h, boot_h;
  for (const auto& traj : batch) {
    const auto lang = net.encode_instruction(traj.instruction);
    auto h = tape.value(traj.h0, false);
    auto c = tape.value(traj.c0, false);
    for (int t = 0; t < traj.length(); ++t) {
      const auto vis = tape.slice_rows(conv, row++, 1);
      std::tie(h, c) = net.memory_step(vis, lang, traj.prev_rewards[t], h, c);
      act_h.push_back(h);
    }
    if (!traj.done) {
      const auto vis = tape.slice_rows(conv, row++, 1);
      auto [hb, cb] =
          net.memory_step(vis, lang, traj.bootstrap_prev_reward, h, c);
      (void)cb;
      boot_h.push_back(hb);
    }
  }

  const std::int64_t sum_t = static_cast<std::int64_t>(act_h.size());
  const auto h_all = tape.concat_rows(act_h);
  const auto logp = tape.log_softmax(net.policy_logits(h_all));
  const auto v_act = tape.reshape(net.values(h_all), {sum_t});
  std::vector<float> boot_values;
  if (!boot_h.empty()) {
    const auto v_boot = net.values(tape.concat_rows(boot_h));
    boot_values.assign(tape.val(v_boot).data.begin(),
                       tape.val(v_boot).data.end());
  }

  // v-trace targets are computed outside the tape: constants w.r.t. params
  const auto& values_f = tape.val(v_act).data;
  const auto& logp_v = tape.val(logp);
  const int a_count = static_cast<int>(logp_v.dim(1));

  std::vector<float> vs_all;
  std::vector<float> pg_w;
  std::vector<std::int64_t> action_cols;
  vs_all.reserve(sum_t);
  pg_w.reserve(sum_t);
  double max_rho = 0.0;
  std::int64_t r0 = 0;
  size_t boot_idx = 0;
  for (const auto& traj : batch) {
    const int T = traj.length();
    std::vector<double> rewards(T), values(T), target_lp(T), behavior_lp(T);
    std::vector<bool> dones(T, false);
    for (int t = 0; t < T; ++t) {
      rewards[t] = traj.rewards[t];
      values[t] = values_f[r0 + t];
      target_lp[t] =
          logp_v.data[(r0 + t) * a_count + static_cast<int>(traj.actions[t])];
      behavior_lp[t] = traj.behavior_log_probs[t];
      action_cols.push_back(static_cast<std::int64_t>(traj.actions[t]));
      max_rho = std::max(
          max_rho, std::min(cfg.rho_bar, std::exp(target_lp[t] - behavior_lp[t])));
    }
    if (traj.done) dones[T - 1] = true;
    const double bootstrap = traj.done ? 0.0 : boot_values[boot_idx++];
    const VTraceOutput vt =
        vtrace(rewards, values, bootstrap, target_lp, behavior_lp, dones,
               cfg.gamma, cfg.rho_bar, cfg.c_bar);
    for (int t = 0; t < T; ++t) {
      vs_all.push_back(static_cast<float>(vt.vs[t]));
      pg_w.push_back(static_cast<float>(-vt.pg_adv[t] / sum_t));
    }
    r0 += T;
  }

  const auto picked = tape.pick(logp, action_cols);
  const auto pg = tape.dot_const(picked, pg_w);
  const auto verr = tape.sub_const(v_act, vs_all);
  const auto sqsum = tape.sum(tape.square(verr));
  const auto vloss =
      tape.scale(sqsum, static_cast<float>(cfg.beta_v * 0.5 / sum_t));
  const auto entsum = tape.sum(tape.entropy_rows(logp));
  const auto entloss =
      tape.scale(entsum, static_cast<float>(-cfg.beta_e / sum_t));
  const auto loss = tape.add_scalars({pg, vloss, entloss});

  LossResult out;
  out.loss = tape.val(loss).data[0];
  out.pg_loss = tape.val(pg).data[0];
  out.value_loss = tape.val(vloss).data[0];
  out.entropy = tape.val(entsum).data[0] / sum_t;
  out.value_error = tape.val(sqsum).data[0] / sum_t;
  out.max_rho = max_rho;
  if (!std::isfinite(out.loss))
    throw std::runtime_error("compute_loss: non-finite loss");

  tape.backward(loss);
  out.grads.reserve(params.tensors.size());
  for (size_t i = 0; i < params.tensors.size(); ++i)
    out.grads.push_back(tape.grad(net.ids[i]));
  return out;
}

TrainResult run_training(const ExperimentConfig& cfg, const SplitSpec& split,
                         std::uint64_t seed, const std::string& tag) {
  if (!cfg.derived.valid)
    throw std::logic_error("run_training: config not validated");

  const Vocab vocab = build_vocab(split);
  AgentArch arch = arch_from_config(cfg, vocab.size(), /*classifier=*/false);
  RngStream init_rng = derive_stream(seed, streams::kWeightInit);
  AgentParams params = init_agent_params(arch, init_rng);
  RmsProp opt{cfg.lr, cfg.rmsprop_rho, cfg.rmsprop_eps, {}};

  std::filesystem::create_directories(cfg.out_dir);
  const std::string csv_path = cfg.out_dir + "/metrics_" + tag + ".csv";
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  csv << "step,frames,mean_return_train,train_acc,test_acc,loss,entropy,"
         "value_error,params_version\n";

  SnapshotStore store;
  store.publish(params);
  BoundedQueue<Trajectory> queue(static_cast<size_t>(cfg.queue_capacity));
  std::atomic<bool> stop{false};
  std::exception_ptr actor_error;
  std::mutex error_mu;
  std::vector<std::thread> actor_threads;

  const bool sync = cfg.deterministic;
  std::optional<Actor> sync_actor;
  if (sync) {
    sync_actor.emplace(cfg, split, vocab, arch, seed, 0);
  } else {
    for (int a = 0; a < cfg.actors; ++a) {
      actor_threads.emplace_back([&, a] {
        try {
          Actor actor(cfg, split, vocab, arch, seed, a);
          auto snap = store.get();
          while (!stop.load(std::memory_order_relaxed)) {
            if (actor.at_episode_boundary()) snap = store.get();
            if (!queue.push(actor.collect(*snap.params, snap.version))) break;
          }
        } catch (...) {
          {
            std::lock_guard lk(error_mu);
            if (!actor_error) actor_error = std::current_exception();
          }
          stop.store(true);
          queue.close();
        }
      });
    }
  }

  auto shutdown = [&] {
    stop.store(true);
    queue.close();
    for (auto& t : actor_threads)
      if (t.joinable()) t.join();
    actor_threads.clear();
  };

  TrainResult result;
  std::deque<double> recent_returns;
  double train_acc = std::nan("");
  double test_acc = std::nan("");
  std::int64_t frames = 0;
  std::int64_t next_checkpoint = cfg.checkpoint_every_frames;

  try {
    for (std::int64_t step_i = 1; step_i <= cfg.total_steps; ++step_i) {
      std::vector<Trajectory> batch;
      batch.reserve(static_cast<size_t>(cfg.batch));
      for (int k = 0; k < cfg.batch; ++k) {
        if (sync) {
          batch.push_back(sync_actor->collect(params, step_i));
        } else {
          auto t = queue.pop();
          if (!t) throw std::runtime_error("trajectory queue closed early");
          batch.push_back(std::move(*t));
        }
      }
      for (const auto& t : batch) {
        frames += t.length();
        if (t.done) {
          recent_returns.push_back(t.episode_return);
          if (recent_returns.size() > 100) recent_returns.pop_front();
        }
      }

      LossResult loss = compute_loss(params, batch, cfg);
      std::vector<Tensor*> ptrs;
      ptrs.reserve(params.tensors.size());
      for (auto& nt : params.tensors) ptrs.push_back(&nt.t);
      opt.step(ptrs, loss.grads);
      if (!sync) store.publish(params);

      if (step_i % cfg.eval_every_steps == 0 || step_i == cfg.total_steps) {
        RngStream eval_rng = derive_stream(seed, streams::kEval).split(
            static_cast<std::uint64_t>(step_i));
        train_acc = evaluate_params(params, split, Phase::train,
                                    cfg.derived.view, cfg.eval_train_episodes,
                                    eval_rng.split(1))
                        .accuracy;
        test_acc = evaluate_params(params, split, Phase::test, cfg.derived.view,
                                   cfg.eval_train_episodes, eval_rng.split(2))
                       .accuracy;
      }

      double mean_ret = std::nan("");
      if (!recent_returns.empty()) {
        mean_ret = 0;
        for (double r : recent_returns) mean_ret += r;
        mean_ret /= static_cast<double>(recent_returns.size());
      }
      csv << step_i << ',' << frames << ',' << mean_ret << ',' << train_acc
          << ',' << test_acc << ',' << loss.loss << ',' << loss.entropy << ','
          << loss.value_error << ',' << (sync ? step_i : store.get().version)
          << '\n';

      if (cfg.checkpoint_every_frames > 0 && frames >= next_checkpoint) {
        save_agent(cfg.out_dir + "/ckpt_" + tag + "_f" + std::to_string(frames) +
                       ".bin",
                   params);
        next_checkpoint += cfg.checkpoint_every_frames;
      }
    }
  } catch (...) {
    shutdown();
    {
      std::lock_guard lk(error_mu);
      if (actor_error) std::rethrow_exception(actor_error);
    }
    throw;
  }
  shutdown();
  {
    std::lock_guard lk(error_mu);
    if (actor_error) std::rethrow_exception(actor_error);
  }

  csv.flush();
  result.final_checkpoint = cfg.out_dir + "/ckpt_" + tag + "_final.bin";
  save_agent(result.final_checkpoint, params);
  result.params = std::move(params);
  result.metrics_csv = csv_path;
  result.frames = frames;
  result.steps = cfg.total_steps;
  return result;
}

}  // namespace gridlab
