#include "gridlab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gridlab/language.hpp"

namespace gridlab {
namespace {

bool parse_bool(const std::string& v, bool* out) {
  if (v == "true" || v == "1" || v == "on") { *out = true; return true; }
  if (v == "false" || v == "0" || v == "off") { *out = false; return true; }
  return false;
}

bool parse_task(const std::string& v, TaskKind* out) {
  for (TaskKind t : {TaskKind::find, TaskKind::lift, TaskKind::put,
                     TaskKind::negfind, TaskKind::collect}) {
    if (v == task_name(t)) { *out = t; return true; }
  }
  return false;
}

template <typename T>
T parse_num(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  T x;
  in >> x;
  if (in.fail() || !in.eof())
    throw std::invalid_argument(key + ": cannot parse value '" + v + "'");
  return x;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_kv(ExperimentConfig& cfg, const std::string& key,
              const std::string& value) {
  auto bad = [&](const std::string& why) {
    throw std::invalid_argument(key + ": " + why + " (got '" + value + "')");
  };

  if (key == "task") {
    if (!parse_task(value, &cfg.task)) bad("unknown task");
  } else if (key == "regime") {
    if (value == "agent") cfg.regime = Regime::agent;
    else if (value == "classifier") cfg.regime = Regime::classifier;
    else bad("expected agent|classifier");
  } else if (key == "split.mode") {
    cfg.split.mode = value;
  } else if (key == "split.negation_train_size") {
    cfg.split.negation_train_size = parse_num<int>(key, value);
  } else if (key == "split.collect_language") {
    if (!parse_bool(value, &cfg.split.collect_language)) bad("expected bool");
  } else if (key == "split.negfind_negative_fraction") {
    cfg.split.negfind_negative_fraction = parse_num<double>(key, value);
  } else if (key == "split.put_lift_fraction") {
    cfg.split.put_lift_fraction = parse_num<double>(key, value);
  } else if (key == "split.lift_train_shapes") {
    cfg.split.lift_train_shapes = parse_num<int>(key, value);
  } else if (key == "episode.time_limit") {
    cfg.split.time_limit = parse_num<int>(key, value);
  } else if (key == "view.mode") {
    if (!parse_view_mode(value, &cfg.view_mode)) bad("unknown view mode");
  } else if (key == "view.px_per_cell") {
    cfg.px_per_cell = parse_num<int>(key, value);
  } else if (key == "view.window_cells") {
    cfg.window_cells = parse_num<int>(key, value);
  } else if (key == "view.agent_visible_when_carrying") {
    if (!parse_bool(value, &cfg.agent_visible_when_carrying)) bad("expected bool");
  } else if (key == "agent.channels") {
    std::istringstream in(value);
    std::string part;
    std::vector<int> ch;
    while (std::getline(in, part, ','))
      ch.push_back(parse_num<int>(key, trim(part)));
    if (ch.size() != 3) bad("expected three comma-separated channel counts");
    cfg.channels = {ch[0], ch[1], ch[2]};
  } else if (key == "agent.lstm_hidden") {
    cfg.lstm_hidden = parse_num<int>(key, value);
  } else if (key == "agent.lang_hidden") {
    cfg.lang_hidden = parse_num<int>(key, value);
  } else if (key == "agent.embed_dim") {
    cfg.embed_dim = parse_num<int>(key, value);
  } else if (key == "agent.prev_reward_input") {
    if (value != "auto" && value != "on" && value != "off")
      bad("expected auto|on|off");
    cfg.prev_reward_input = value;
  } else if (key == "learner.gamma") {
    cfg.gamma = parse_num<double>(key, value);
  } else if (key == "learner.rho_bar") {
    cfg.rho_bar = parse_num<double>(key, value);
  } else if (key == "learner.c_bar") {
    cfg.c_bar = parse_num<double>(key, value);
  } else if (key == "learner.lr") {
    cfg.lr = parse_num<double>(key, value);
  } else if (key == "learner.beta_v") {
    cfg.beta_v = parse_num<double>(key, value);
  } else if (key == "learner.beta_e") {
    cfg.beta_e = parse_num<double>(key, value);
  } else if (key == "learner.rmsprop_rho") {
    cfg.rmsprop_rho = parse_num<double>(key, value);
  } else if (key == "learner.rmsprop_eps") {
    cfg.rmsprop_eps = parse_num<double>(key, value);
  } else if (key == "learner.unroll") {
    cfg.unroll = parse_num<int>(key, value);
  } else if (key == "learner.batch") {
    cfg.batch = parse_num<int>(key, value);
  } else if (key == "learner.actors") {
    cfg.actors = parse_num<int>(key, value);
  } else if (key == "learner.queue_capacity") {
    cfg.queue_capacity = parse_num<int>(key, value);
  } else if (key == "learner.total_steps") {
    cfg.total_steps = parse_num<std::int64_t>(key, value);
  } else if (key == "learner.checkpoint_every_frames") {
    cfg.checkpoint_every_frames = parse_num<std::int64_t>(key, value);
  } else if (key == "learner.deterministic") {
    if (!parse_bool(value, &cfg.deterministic)) bad("expected bool");
  } else if (key == "classifier.examples") {
    cfg.classifier_examples = parse_num<int>(key, value);
  } else if (key == "classifier.steps") {
    cfg.classifier_steps = parse_num<int>(key, value);
  } else if (key == "classifier.batch") {
    cfg.classifier_batch = parse_num<int>(key, value);
  } else if (key == "eval.episodes") {
    cfg.eval_episodes = parse_num<int>(key, value);
  } else if (key == "eval.train_episodes") {
    cfg.eval_train_episodes = parse_num<int>(key, value);
  } else if (key == "eval.every_steps") {
    cfg.eval_every_steps = parse_num<int>(key, value);
  } else if (key == "replicas") {
    cfg.replicas = parse_num<int>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_num<std::uint64_t>(key, value);
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else if (key == "compare.view_mode") {
    cfg.compare_view_mode = value;
  } else if (key == "render.dump_frames") {
    if (!parse_bool(value, &cfg.dump_frames)) bad("expected bool");
  } else {
    throw std::invalid_argument("unknown configuration key: " + key);
  }
}

std::vector<std::string> validate_config(ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  cfg.derived = {};

  ViewConfig view = make_view(cfg.view_mode, cfg.px_per_cell, cfg.window_cells,
                              cfg.agent_visible_when_carrying);

  if (view.window_cells % 2 == 0)
    errors.push_back("view.window_cells: must be odd, got " +
                     std::to_string(view.window_cells));
  if (view.px_per_cell < 3)
    errors.push_back("view.px_per_cell: must be >= 3");
  switch (cfg.view_mode) {
    case ViewMode::allocentric_fixed:
      if (view.window_cells != kGridCells)
        errors.push_back("view.window_cells: allocentric_fixed must cover the "
                         "11-cell grid exactly");
      break;
    case ViewMode::egocentric_partial:
      if (view.window_cells > kGridCells)
        errors.push_back(
            "view.window_cells: egocentric_partial window larger than the "
            "grid; use egocentric_full for a fully observable window");
      break;
    case ViewMode::egocentric_full:
      // fully observable requires the room in view at the extreme offsets
      if (view.window_cells < kGridCells + 2 * (kInteriorMax - kGridCells / 2))
        errors.push_back("view.window_cells: egocentric_full window too small "
                         "to keep the room visible");
      break;
    case ViewMode::allocentric_large:
      if (view.window_cells < kGridCells)
        errors.push_back("view.window_cells: allocentric_large window smaller "
                         "than the grid");
      break;
  }

  if (cfg.task == TaskKind::negfind) {
    const int n1 = cfg.split.negation_train_size;
    if (n1 < 1 || n1 + 8 > kGlyphUniverseMaxN)
      errors.push_back("split.negation_train_size: out of range [1, 504]");
  }
  if (cfg.task == TaskKind::lift &&
      (cfg.split.lift_train_shapes < 1 || cfg.split.lift_train_shapes > 9))
    errors.push_back("split.lift_train_shapes: must be in [1, 9]");
  if (cfg.task == TaskKind::find && cfg.split.mode != "standard" &&
      cfg.split.mode != "typical_color")
    errors.push_back("split.mode: expected standard|typical_color");
  if (cfg.split.negfind_negative_fraction < 0 ||
      cfg.split.negfind_negative_fraction > 1)
    errors.push_back("split.negfind_negative_fraction: must be in [0, 1]");
  if (cfg.split.put_lift_fraction < 0 || cfg.split.put_lift_fraction > 1)
    errors.push_back("split.put_lift_fraction: must be in [0, 1]");
  if (cfg.split.time_limit < 1)
    errors.push_back("episode.time_limit: must be >= 1");

  for (int c : cfg.channels)
    if (c < 1) errors.push_back("agent.channels: counts must be >= 1");
  if (cfg.lstm_hidden < 1) errors.push_back("agent.lstm_hidden: must be >= 1");
  if (cfg.lang_hidden < 1) errors.push_back("agent.lang_hidden: must be >= 1");
  if (cfg.embed_dim < 1) errors.push_back("agent.embed_dim: must be >= 1");

  if (cfg.gamma <= 0 || cfg.gamma > 1)
    errors.push_back("learner.gamma: must be in (0, 1]");
  if (cfg.rho_bar < cfg.c_bar)
    errors.push_back("learner.rho_bar: must be >= learner.c_bar");
  if (cfg.c_bar < 0) errors.push_back("learner.c_bar: must be >= 0");
  if (cfg.lr <= 0) errors.push_back("learner.lr: must be > 0");
  if (cfg.unroll < 1) errors.push_back("learner.unroll: must be >= 1");
  if (cfg.batch < 1) errors.push_back("learner.batch: must be >= 1");
  if (cfg.actors < 1) errors.push_back("learner.actors: must be >= 1");
  if (cfg.queue_capacity < 1)
    errors.push_back("learner.queue_capacity: must be >= 1");
  if (cfg.total_steps < 0) errors.push_back("learner.total_steps: must be >= 0");
  if (cfg.eval_episodes < 1) errors.push_back("eval.episodes: must be >= 1");
  if (cfg.eval_train_episodes < 1)
    errors.push_back("eval.train_episodes: must be >= 1");
  if (cfg.eval_every_steps < 1)
    errors.push_back("eval.every_steps: must be >= 1");
  if (cfg.replicas < 1) errors.push_back("replicas: must be >= 1");
  if (!cfg.compare_view_mode.empty()) {
    ViewMode m;
    if (!parse_view_mode(cfg.compare_view_mode, &m))
      errors.push_back("compare.view_mode: unknown view mode");
  }

  if (!errors.empty()) return errors;

  cfg.derived.view = view;
  cfg.derived.frame_w = view.window_cells * view.px_per_cell;
  cfg.derived.frame_h = cfg.derived.frame_w;
  cfg.derived.actions = kNumActions;
  cfg.derived.prev_reward =
      cfg.prev_reward_input == "on" ||
      (cfg.prev_reward_input == "auto" && cfg.task == TaskKind::collect);

  // vocabulary size falls out of the split protocol
  RngStream rng = derive_stream(cfg.seed, streams::kSplitBuild);
  try {
    SplitSpec split = build_split(cfg.task, cfg.split, rng);
    cfg.derived.vocab_size = build_vocab(split).size();
  } catch (const std::exception& e) {
    errors.push_back(std::string("split: ") + e.what());
    return errors;
  }

  cfg.derived.valid = true;
  return errors;
}

void validate_or_throw(ExperimentConfig& cfg) {
  auto errors = validate_config(cfg);
  if (errors.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errors) msg += "\n  - " + e;
  throw std::runtime_error(msg);
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected key=value, got '" + t + "'");
    apply_kv(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  validate_or_throw(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace gridlab
