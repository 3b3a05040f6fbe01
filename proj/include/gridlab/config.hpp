#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gridlab/render.hpp"
#include "gridlab/tasks.hpp"

namespace gridlab {

enum class Regime { agent, classifier };

// Everything a run needs, loadable from a flat key=value file. See README
// for the key table; unknown keys are an error.
struct ExperimentConfig {
  TaskKind task = TaskKind::find;
  Regime regime = Regime::agent;

  SplitParams split;

  ViewMode view_mode = ViewMode::allocentric_fixed;
  int px_per_cell = 0;    // 0: mode default
  int window_cells = 0;   // 0: mode default
  bool agent_visible_when_carrying = false;

  // agent architecture
  std::array<int, 3> channels{64, 64, 32};
  int lstm_hidden = 128;
  int lang_hidden = 128;
  int embed_dim = 32;
  std::string prev_reward_input = "auto";  // auto | on | off

  // learner
  double gamma = 0.99;
  double rho_bar = 1.0;
  double c_bar = 1.0;
  double lr = 2e-4;
  double beta_v = 0.5;
  double beta_e = 0.01;
  double rmsprop_rho = 0.99;
  double rmsprop_eps = 1e-5;
  int unroll = 20;
  int batch = 16;
  int actors = 4;
  int queue_capacity = 8;
  std::int64_t total_steps = 2000;
  std::int64_t checkpoint_every_frames = 100000;
  bool deterministic = false;

  // classifier regime
  int classifier_examples = 4096;
  int classifier_steps = 2000;
  int classifier_batch = 32;

  // evaluation / harness
  int eval_episodes = 1000;
  int eval_train_episodes = 200;
  int eval_every_steps = 200;
  int replicas = 5;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string compare_view_mode;  // non-empty: second condition + t-test
  bool dump_frames = false;

  // filled by validate()
  struct Derived {
    ViewConfig view;
    int frame_w = 0, frame_h = 0;
    int vocab_size = 0;
    int actions = kNumActions;
    bool prev_reward = false;
    bool valid = false;
  } derived;
};

// Applies one key=value pair. Throws std::invalid_argument for unknown keys
// or unparsable values.
void apply_kv(ExperimentConfig& cfg, const std::string& key,
              const std::string& value);

// Checks every constraint and computes the derived block. Returns one
// message per violated constraint (empty means valid); never throws on bad
// values, never leaves derived partially filled.
std::vector<std::string> validate_config(ExperimentConfig& cfg);

// Parse + validate; throws std::runtime_error listing every error.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
void validate_or_throw(ExperimentConfig& cfg);

}  // namespace gridlab
