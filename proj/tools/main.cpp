// gridlab command-line front end.

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gridlab/config.hpp"
#include "gridlab/envd.hpp"
#include "gridlab/evaluate.hpp"
#include "gridlab/experiment.hpp"
#include "gridlab/language.hpp"
#include "gridlab/learner.hpp"
#include "gridlab/oracle.hpp"
#include "gridlab/stats.hpp"

namespace gl = gridlab;

namespace {

gl::ExperimentConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    gl::ExperimentConfig cfg;
    gl::validate_or_throw(cfg);
    return cfg;
  }
  return gl::load_config(path);
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string part;
  while (std::getline(in, part, ',')) out.push_back(std::stod(part));
  return out;
}

gl::SplitSpec split_for(const gl::ExperimentConfig& cfg) {
  gl::RngStream rng = gl::derive_stream(cfg.seed, gl::streams::kSplitBuild);
  return gl::build_split(cfg.task, cfg.split, rng);
}

int cmd_train(const std::string& config_path) {
  gl::ExperimentConfig cfg = load_or_default(config_path);
  if (cfg.regime == gl::Regime::classifier) {
    const auto report = gl::train_classifier(cfg);
    std::cout << "classifier train_acc=" << report.train_acc
              << " test_acc=" << report.test_acc
              << " checkpoint=" << report.checkpoint << "\n";
    return 0;
  }
  const auto report = gl::run_experiment(cfg);
  for (const auto& cond : report.conditions) {
    std::cout << "condition " << cond.name << ": train "
              << cond.train_acc.mean << " +- " << cond.train_acc.sd << ", test "
              << cond.test_acc.mean << " +- " << cond.test_acc.sd << " ("
              << cond.replicas.size() << " replicas)\n";
    for (const auto& fail : cond.failures) std::cout << "  FAILED " << fail << "\n";
  }
  if (report.test_acc_ttest) {
    std::cout << "t(" << report.test_acc_ttest->df
              << ") = " << report.test_acc_ttest->t
              << ", p = " << report.test_acc_ttest->p << "\n";
  }
  std::cout << "report: " << report.report_path << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint,
             const std::string& phase, int episodes) {
  gl::ExperimentConfig cfg = load_or_default(config_path);
  const gl::SplitSpec split = split_for(cfg);
  const gl::Vocab vocab = gl::build_vocab(split);

  gl::AgentArch arch;
  arch.in_h = cfg.derived.frame_h;
  arch.in_w = cfg.derived.frame_w;
  arch.channels = cfg.channels;
  arch.embed_dim = cfg.embed_dim;
  arch.lang_hidden = cfg.lang_hidden;
  arch.mem_hidden = cfg.lstm_hidden;
  arch.vocab_size = vocab.size();
  arch.prev_reward_input = cfg.derived.prev_reward;
  arch.finalize();

  const gl::AgentParams params = gl::load_agent(checkpoint, arch);
  const int n = episodes > 0 ? episodes : cfg.eval_episodes;
  const auto result = gl::evaluate_params(
      params, split, phase == "test" ? gl::Phase::test : gl::Phase::train,
      cfg.derived.view, n, gl::derive_stream(cfg.seed, gl::streams::kEval));
  std::cout << "phase=" << phase << " episodes=" << n
            << " accuracy=" << result.accuracy
            << " mean_return=" << result.mean_return
            << " mean_length=" << result.mean_length << "\n";
  return 0;
}

int cmd_oracle(const std::string& task, const std::string& mode, int episodes,
               std::uint64_t seed) {
  gl::ExperimentConfig cfg;
  gl::apply_kv(cfg, "task", task);
  cfg.seed = seed;
  gl::validate_or_throw(cfg);
  const gl::SplitSpec split = split_for(cfg);

  gl::OracleMode m;
  if (mode == "optimal_bfs") m = gl::OracleMode::optimal_bfs;
  else if (mode == "random_first_pick") m = gl::OracleMode::random_first_pick;
  else if (mode == "color_only") m = gl::OracleMode::color_only;
  else if (mode == "shape_only") m = gl::OracleMode::shape_only;
  else throw std::invalid_argument("unknown oracle mode: " + mode);

  const auto stats = gl::oracle_run(split, gl::Phase::train, m, episodes,
                                    gl::derive_stream(seed, gl::streams::kEval));
  std::cout << "task=" << task << " mode=" << mode << " episodes=" << episodes
            << " mean_return=" << stats.mean_return
            << " mean_length=" << stats.mean_length
            << " accuracy=" << stats.accuracy;
  if (m == gl::OracleMode::color_only || m == gl::OracleMode::shape_only)
    std::cout << " expected_accuracy=" << stats.expected_accuracy;
  std::cout << "\n";
  return 0;
}

int cmd_splits(const std::string& config_path, const std::string& out) {
  gl::ExperimentConfig cfg = load_or_default(config_path);
  const std::string json = gl::split_to_json(split_for(cfg));
  if (out.empty()) {
    std::cout << json << "\n";
  } else {
    std::ofstream f(out);
    f << json << "\n";
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

int cmd_render(const std::string& config_path, std::uint64_t seed, int steps,
               const std::string& out_dir) {
  gl::ExperimentConfig cfg = load_or_default(config_path);
  const gl::SplitSpec split = split_for(cfg);
  gl::RngStream rng = gl::derive_stream(seed, gl::streams::kEpisodeSampling);
  const gl::EpisodeSpec spec = gl::sample_episode(split, gl::Phase::train, rng);
  std::filesystem::create_directories(out_dir);
  gl::WorldState ws = gl::reset(spec);
  std::cout << "instruction: " << spec.instruction << "\n";
  gl::RngStream act = rng.split(1);
  for (int t = 0; t <= steps && !ws.done; ++t) {
    const gl::Frame frame = gl::render(ws, cfg.derived.view);
    char name[64];
    std::snprintf(name, sizeof(name), "%s/frame_%03d.ppm", out_dir.c_str(), t);
    gl::write_ppm(frame, name);
    if (ws.done) break;
    ws = gl::step(ws, static_cast<gl::Action>(act.next_below(4))).first;
  }
  std::cout << "frames in " << out_dir << "\n";
  return 0;
}

int cmd_ttest(const std::string& a_csv, const std::string& b_csv) {
  const auto a = parse_list(a_csv);
  const auto b = parse_list(b_csv);
  const auto r = gl::ttest(a, b);
  std::cout << "t(" << r.df << ") = " << r.t << ", p = " << r.p;
  if (r.zero_variance) std::cout << "  [zero pooled variance]";
  std::cout << "\n";
  return 0;
}

int cmd_serve(const std::string& config_path, const std::string& addr,
              const std::string& task, const std::string& view,
              std::uint64_t seed) {
  gl::ExperimentConfig cfg = load_or_default(config_path);
  if (!task.empty()) gl::apply_kv(cfg, "task", task);
  if (!view.empty()) gl::apply_kv(cfg, "view.mode", view);
  if (seed != 0) cfg.seed = seed;
  gl::validate_or_throw(cfg);

  std::string host = "127.0.0.1";
  int port = 7741;
  const auto colon = addr.rfind(':');
  if (colon != std::string::npos) {
    host = addr.substr(0, colon);
    port = std::stoi(addr.substr(colon + 1));
  } else if (!addr.empty()) {
    host = addr;
  }
  std::cout << "serving " << gl::task_name(cfg.task) << " on " << host << ":"
            << port << "\n";
  return gl::serve_forever(cfg, host, port);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid-world laboratory for language-conditioned RL"};
  app.require_subcommand(1);

  std::string config_path, checkpoint, phase = "test", out, addr = "127.0.0.1:7741";
  std::string task = "find", mode = "optimal_bfs", view, a_csv, b_csv;
  int episodes = 0, steps = 40;
  std::uint64_t seed = 1;

  auto* train = app.add_subcommand("train", "train replicas and write a report");
  train->add_option("--config", config_path, "key=value config file");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--config", config_path);
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--phase", phase, "train|test");
  eval->add_option("--episodes", episodes);

  auto* oracle = app.add_subcommand("oracle", "run a scripted oracle policy");
  oracle->add_option("--task", task);
  oracle->add_option("--mode", mode,
                     "optimal_bfs|random_first_pick|color_only|shape_only");
  oracle->add_option("--episodes", episodes)->default_val(10000);
  oracle->add_option("--seed", seed);

  auto* splits = app.add_subcommand("splits", "dump the train/test split as JSON");
  splits->add_option("--config", config_path);
  splits->add_option("--out", out);

  auto* render = app.add_subcommand("render", "dump an episode as PPM frames");
  render->add_option("--config", config_path);
  render->add_option("--seed", seed);
  render->add_option("--steps", steps);
  render->add_option("--out", out)->default_val("frames");

  auto* ttest = app.add_subcommand("ttest", "two-sample pooled-variance t test");
  ttest->add_option("--a", a_csv, "comma-separated samples")->required();
  ttest->add_option("--b", b_csv, "comma-separated samples")->required();

  auto* serve = app.add_subcommand("serve", "run the TCP environment service");
  serve->add_option("--config", config_path);
  serve->add_option("--addr", addr, "host:port");
  serve->add_option("--task", task);
  serve->add_option("--view", view);
  serve->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config_path);
    if (*eval) return cmd_eval(config_path, checkpoint, phase, episodes);
    if (*oracle) return cmd_oracle(task, mode, episodes, seed);
    if (*splits) return cmd_splits(config_path, out);
    if (*render) return cmd_render(config_path, seed, steps, out);
    if (*ttest) return cmd_ttest(a_csv, b_csv);
    if (*serve) return cmd_serve(config_path, addr, task, view, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
