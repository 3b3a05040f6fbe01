#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>

#include "gridlab/evaluate.hpp"
#include "gridlab/language.hpp"
#include "gridlab/experiment.hpp"
#include "gridlab/oracle.hpp"

using namespace gridlab;

namespace {

ExperimentConfig tiny_experiment_config(const std::string& dir) {
  ExperimentConfig cfg;
  cfg.px_per_cell = 3;
  cfg.channels = {4, 4, 2};
  cfg.lstm_hidden = 8;
  cfg.lang_hidden = 8;
  cfg.embed_dim = 4;
  cfg.unroll = 10;
  cfg.batch = 2;
  cfg.total_steps = 3;
  cfg.deterministic = true;
  cfg.eval_episodes = 12;
  cfg.eval_train_episodes = 8;
  cfg.eval_every_steps = 3;
  cfg.checkpoint_every_frames = 0;
  cfg.replicas = 2;
  cfg.out_dir = (std::filesystem::temp_directory_path() / dir).string();
  validate_or_throw(cfg);
  return cfg;
}

}  // namespace

TEST_CASE("evaluate: a uniform random policy touches the right object half "
          "the time, and scores below half overall") {
  ExperimentConfig cfg = tiny_experiment_config("gridlab_eval_test");
  RngStream srng = derive_stream(cfg.seed, streams::kSplitBuild);
  const SplitSpec split = build_split(cfg.task, cfg.split, srng);
  const Vocab vocab = build_vocab(split);
  AgentArch arch;
  arch.in_h = cfg.derived.frame_h;
  arch.in_w = cfg.derived.frame_w;
  arch.channels = cfg.channels;
  arch.embed_dim = cfg.embed_dim;
  arch.lang_hidden = cfg.lang_hidden;
  arch.mem_hidden = cfg.lstm_hidden;
  arch.vocab_size = vocab.size();
  arch.finalize();
  RngStream rng = derive_stream(99, streams::kWeightInit);
  AgentParams params = init_agent_params(arch, rng);
  for (auto& nt : params.tensors)
    std::fill(nt.t.data.begin(), nt.t.data.end(), 0.0f);  // uniform policy

  const EvalResult res =
      evaluate_params(params, split, Phase::test, cfg.derived.view, 3000,
                      derive_stream(60, 1), /*greedy=*/false);
  CHECK(std::abs(res.first_event_correct - 0.5) < 0.03);
  CHECK(res.accuracy < 0.5);
}

TEST_CASE("experiment: replica report with means, SDs and determinism") {
  ExperimentConfig cfg = tiny_experiment_config("gridlab_exp_test");
  const ExperimentReport r1 = run_experiment(cfg);
  REQUIRE(r1.conditions.size() == 1);
  const ConditionReport& cond = r1.conditions[0];
  REQUIRE(cond.replicas.size() == 2);
  CHECK(cond.failures.empty());
  CHECK(cond.train_acc.n == 2);
  for (const auto& rep : cond.replicas) {
    CHECK(rep.train_acc >= 0.0);
    CHECK(rep.train_acc <= 1.0);
    CHECK(std::filesystem::exists(rep.checkpoint));
    CHECK(std::filesystem::exists(rep.metrics_csv));
  }
  CHECK(std::filesystem::exists(r1.report_path));

  std::ifstream in(r1.report_path);
  std::string body((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(body.find("train_acc_mean") != std::string::npos);
  CHECK(body.find("test_acc_sd") != std::string::npos);

  // deterministic mode: the same config reruns to the same report
  const ExperimentReport r2 = run_experiment(cfg);
  CHECK(report_to_json(r1) == report_to_json(r2));
}

TEST_CASE("experiment: two conditions produce a t-test") {
  ExperimentConfig cfg = tiny_experiment_config("gridlab_exp2_test");
  cfg.compare_view_mode = "egocentric_partial";
  validate_or_throw(cfg);
  const ExperimentReport report = run_experiment(cfg);
  REQUIRE(report.conditions.size() == 2);
  CHECK(report.conditions[0].name == "allocentric_fixed");
  CHECK(report.conditions[1].name == "egocentric_partial");
  REQUIRE(report.test_acc_ttest.has_value());
  CHECK(report.test_acc_ttest->df == 2);
  const std::string json = report_to_json(report);
  CHECK(json.find("test_acc_ttest") != std::string::npos);
}

TEST_CASE("classifier: the label oracle reads object columns") {
  EpisodeSpec spec;
  spec.task = TaskKind::find;
  spec.objects = {{{palette10()[0], builtin_shapes()[0]}, {4, 2}},
                  {{palette10()[1], builtin_shapes()[1]}, {6, 7}}};
  spec.agent_start = {1, 1};
  spec.correct = {0};
  CHECK(classifier_label(spec) == 0);  // target left of the distractor
  spec.correct = {1};
  CHECK(classifier_label(spec) == 1);
  spec.objects[1].second = {6, 2};  // same column: no label
  CHECK(!classifier_label(spec).has_value());
}

TEST_CASE("classifier: memorizes a 32-example dataset") {
  ExperimentConfig cfg = tiny_experiment_config("gridlab_clf_test");
  cfg.regime = Regime::classifier;
  cfg.classifier_examples = 32;
  cfg.classifier_steps = 800;
  cfg.classifier_batch = 16;
  cfg.lr = 2e-3;
  cfg.eval_episodes = 16;
  validate_or_throw(cfg);
  const ClassifierReport report = train_classifier(cfg);
  CHECK(report.train_examples == 32);
  CHECK(report.train_acc == 1.0);  // overfit sanity oracle
  CHECK(std::filesystem::exists(report.checkpoint));
}

TEST_CASE("oracle supremacy: evaluated policies never beat the bfs oracle") {
  ExperimentConfig cfg = tiny_experiment_config("gridlab_sup_test");
  RngStream srng = derive_stream(cfg.seed, streams::kSplitBuild);
  const SplitSpec split = build_split(cfg.task, cfg.split, srng);
  const OracleStats oracle = oracle_run(split, Phase::test,
                                        OracleMode::optimal_bfs, 300,
                                        derive_stream(61, 1));
  const Vocab vocab = build_vocab(split);
  AgentArch arch;
  arch.in_h = cfg.derived.frame_h;
  arch.in_w = cfg.derived.frame_w;
  arch.channels = cfg.channels;
  arch.embed_dim = cfg.embed_dim;
  arch.lang_hidden = cfg.lang_hidden;
  arch.mem_hidden = cfg.lstm_hidden;
  arch.vocab_size = vocab.size();
  arch.finalize();
  RngStream rng = derive_stream(62, streams::kWeightInit);
  const AgentParams params = init_agent_params(arch, rng);
  const EvalResult res = evaluate_params(params, split, Phase::test,
                                         cfg.derived.view, 300,
                                         derive_stream(63, 1));
  CHECK(res.mean_return <= oracle.mean_return);
}
