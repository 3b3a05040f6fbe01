#include "gridlab/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gridlab/evaluate.hpp"
#include "gridlab/language.hpp"
#include "gridlab/optimizer.hpp"

namespace gridlab {
namespace {

ConditionReport run_condition(const ExperimentConfig& cfg,
                              const std::string& name) {
  ConditionReport report;
  report.name = name;
  report.eval_episodes = cfg.eval_episodes;

  RngStream split_rng = derive_stream(cfg.seed, streams::kSplitBuild);
  const SplitSpec split = build_split(cfg.task, cfg.split, split_rng);

  std::vector<double> trains, tests;
  for (int r = 0; r < cfg.replicas; ++r) {
    const std::uint64_t replica_seed = cfg.seed + 1000 * static_cast<std::uint64_t>(r);
    const std::string tag = name + "_r" + std::to_string(r);
    try {
      TrainResult tr = run_training(cfg, split, replica_seed, tag);
      RngStream eval_rng = derive_stream(replica_seed, streams::kEval);
      const EvalResult train_eval =
          evaluate_params(tr.params, split, Phase::train, cfg.derived.view,
                          cfg.eval_episodes, eval_rng.split(1));
      const EvalResult test_eval =
          evaluate_params(tr.params, split, Phase::test, cfg.derived.view,
                          cfg.eval_episodes, eval_rng.split(2));
      ReplicaResult rr;
      rr.replica = r;
      rr.seed = replica_seed;
      rr.train_acc = train_eval.accuracy;
      rr.test_acc = test_eval.accuracy;
      rr.train_return = train_eval.mean_return;
      rr.test_return = test_eval.mean_return;
      rr.metrics_csv = tr.metrics_csv;
      rr.checkpoint = tr.final_checkpoint;
      report.replicas.push_back(std::move(rr));
      trains.push_back(train_eval.accuracy);
      tests.push_back(test_eval.accuracy);
    } catch (const std::exception& e) {
      report.failures.push_back("replica " + std::to_string(r) + ": " + e.what());
    }
  }
  report.train_acc = mean_sd(trains);
  report.test_acc = mean_sd(tests);
  return report;
}

nlohmann::json condition_json(const ConditionReport& c) {
  nlohmann::json j;
  j["condition"] = c.name;
  j["eval_episodes"] = c.eval_episodes;
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : c.replicas) {
    reps.push_back({{"replica", r.replica},
                    {"seed", r.seed},
                    {"train_acc", r.train_acc},
                    {"test_acc", r.test_acc},
                    {"train_return", r.train_return},
                    {"test_return", r.test_return},
                    {"metrics_csv", r.metrics_csv},
                    {"checkpoint", r.checkpoint}});
  }
  j["replicas"] = reps;
  j["train_acc_mean"] = c.train_acc.mean;
  j["train_acc_sd"] = c.train_acc.sd;
  j["test_acc_mean"] = c.test_acc.mean;
  j["test_acc_sd"] = c.test_acc.sd;
  j["failures"] = c.failures;
  return j;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::json j;
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : report.conditions) conds.push_back(condition_json(c));
  j["conditions"] = conds;
  if (report.test_acc_ttest) {
    j["test_acc_ttest"] = {{"t", report.test_acc_ttest->t},
                           {"df", report.test_acc_ttest->df},
                           {"p", report.test_acc_ttest->p},
                           {"zero_variance", report.test_acc_ttest->zero_variance}};
  }
  return j.dump(2);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (!cfg.derived.valid)
    throw std::logic_error("run_experiment: config not validated");
  std::filesystem::create_directories(cfg.out_dir);

  ExperimentReport report;
  report.conditions.push_back(
      run_condition(cfg, view_mode_name(cfg.view_mode)));

  if (!cfg.compare_view_mode.empty()) {
    ExperimentConfig other = cfg;
    parse_view_mode(cfg.compare_view_mode, &other.view_mode);
    other.px_per_cell = 0;   // let the mode pick its defaults
    other.window_cells = 0;
    validate_or_throw(other);
    report.conditions.push_back(
        run_condition(other, view_mode_name(other.view_mode)));
  }

  for (const auto& c : report.conditions)
    if (c.replicas.empty())
      throw std::runtime_error("experiment: every replica of condition '" +
                               c.name + "' failed: " +
                               (c.failures.empty() ? "?" : c.failures[0]));

  if (report.conditions.size() == 2 &&
      report.conditions[0].replicas.size() >= 2 &&
      report.conditions[1].replicas.size() >= 2) {
    std::vector<double> a, b;
    for (const auto& r : report.conditions[0].replicas) a.push_back(r.test_acc);
    for (const auto& r : report.conditions[1].replicas) b.push_back(r.test_acc);
    report.test_acc_ttest = ttest(a, b);
  }

  report.report_path = cfg.out_dir + "/report.json";
  std::ofstream out(report.report_path);
  out << report_to_json(report) << '\n';
  return report;
}

std::optional<int> classifier_label(const EpisodeSpec& spec) {
  if (spec.objects.size() != 2) return std::nullopt;
  const int target = spec.correct.at(0);
  const int other = 1 - target;
  const int tc = spec.objects[target].second.col;
  const int oc = spec.objects[other].second.col;
  if (tc == oc) return std::nullopt;
  return tc < oc ? 0 : 1;
}

ClassifierReport train_classifier(const ExperimentConfig& cfg) {
  if (!cfg.derived.valid)
    throw std::logic_error("train_classifier: config not validated");
  if (cfg.task != TaskKind::find)
    throw std::invalid_argument(
        "train_classifier: the still-image regime uses the find task");

  RngStream split_rng = derive_stream(cfg.seed, streams::kSplitBuild);
  const SplitSpec split = build_split(cfg.task, cfg.split, split_rng);
  const Vocab vocab = build_vocab(split);

  AgentArch arch;
  arch.in_h = cfg.derived.frame_h;
  arch.in_w = cfg.derived.frame_w;
  arch.channels = cfg.channels;
  arch.embed_dim = cfg.embed_dim;
  arch.lang_hidden = cfg.lang_hidden;
  arch.mem_hidden = cfg.lstm_hidden;
  arch.vocab_size = vocab.size();
  arch.prev_reward_input = false;
  arch.classifier = true;
  arch.finalize();

  RngStream init_rng = derive_stream(cfg.seed, streams::kWeightInit);
  AgentParams params = init_agent_params(arch, init_rng);
  RmsProp opt{cfg.lr, cfg.rmsprop_rho, cfg.rmsprop_eps, {}};

  struct Example {
    Frame frame;
    std::vector<int> instr;
    int label = 0;
  };
  auto make_dataset = [&](Phase phase, int count, RngStream rng) {
    std::vector<Example> data;
    data.reserve(static_cast<size_t>(count));
    while (static_cast<int>(data.size()) < count) {
      EpisodeSpec spec = sample_episode(split, phase, rng);
      const auto label = classifier_label(spec);
      if (!label) continue;  // column tie: no left/right ground truth
      Example ex;
      ex.frame = render(reset(spec), cfg.derived.view);
      ex.instr = tokenize_encode(spec.instruction, vocab);
      ex.label = *label;
      data.push_back(std::move(ex));
    }
    return data;
  };

  RngStream data_rng = derive_stream(cfg.seed, streams::kClassifierData);
  const auto train_set =
      make_dataset(Phase::train, cfg.classifier_examples, data_rng.split(1));
  const auto test_set =
      make_dataset(Phase::test, cfg.eval_episodes, data_rng.split(2));

  auto run_batch = [&](const std::vector<const Example*>& batch, bool learn) {
    Tape tape;
    AgentNet<float> net(tape, params, learn);
    std::vector<const Frame*> frames;
    frames.reserve(batch.size());
    for (const auto* ex : batch) frames.push_back(&ex->frame);
    const auto conv = net.conv_stack(tape.value(frames_to_tensor(frames), false));
    std::vector<Tape::Id> rows;
    for (size_t i = 0; i < batch.size(); ++i) {
      const auto lang = net.encode_instruction(batch[i]->instr);
      auto h = tape.value(Tensor({1, arch.mem_hidden}), false);
      auto c = tape.value(Tensor({1, arch.mem_hidden}), false);
      const auto vis = tape.slice_rows(conv, static_cast<std::int64_t>(i), 1);
      std::tie(h, c) = net.memory_step(vis, lang, std::nullopt, h, c);
      rows.push_back(h);
    }
    const auto logp =
        tape.log_softmax(net.classifier_logits(tape.concat_rows(rows)));
    std::vector<std::int64_t> labels;
    labels.reserve(batch.size());
    int correct = 0;
    const auto& lv = tape.val(logp);
    for (size_t i = 0; i < batch.size(); ++i) {
      labels.push_back(batch[i]->label);
      const int pred = lv.data[i * 2] >= lv.data[i * 2 + 1] ? 0 : 1;
      if (pred == batch[i]->label) ++correct;
    }
    if (learn) {
      const auto picked = tape.pick(logp, labels);
      const auto loss =
          tape.scale(tape.sum(picked), -1.0f / static_cast<float>(batch.size()));
      tape.backward(loss);
      std::vector<Tensor> grads;
      grads.reserve(params.tensors.size());
      for (size_t i = 0; i < params.tensors.size(); ++i)
        grads.push_back(tape.grad(net.ids[i]));
      std::vector<Tensor*> ptrs;
      for (auto& nt : params.tensors) ptrs.push_back(&nt.t);
      opt.step(ptrs, grads);
    }
    return correct;
  };

  RngStream batch_rng = data_rng.split(3);
  for (int s = 0; s < cfg.classifier_steps; ++s) {
    std::vector<const Example*> batch;
    batch.reserve(static_cast<size_t>(cfg.classifier_batch));
    for (int k = 0; k < cfg.classifier_batch; ++k)
      batch.push_back(&train_set[batch_rng.next_below(
          static_cast<std::uint32_t>(train_set.size()))]);
    run_batch(batch, /*learn=*/true);
  }

  auto accuracy_on = [&](const std::vector<Example>& data) {
    int correct = 0;
    constexpr int kChunk = 64;
    for (size_t at = 0; at < data.size(); at += kChunk) {
      std::vector<const Example*> batch;
      for (size_t i = at; i < std::min(data.size(), at + kChunk); ++i)
        batch.push_back(&data[i]);
      correct += run_batch(batch, /*learn=*/false);
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
  };

  ClassifierReport report;
  report.train_acc = accuracy_on(train_set);
  report.test_acc = accuracy_on(test_set);
  report.train_examples = static_cast<int>(train_set.size());
  report.test_examples = static_cast<int>(test_set.size());
  report.steps = cfg.classifier_steps;
  std::filesystem::create_directories(cfg.out_dir);
  report.checkpoint = cfg.out_dir + "/classifier.bin";
  save_agent(report.checkpoint, params);
  return report;
}

}  // namespace gridlab
