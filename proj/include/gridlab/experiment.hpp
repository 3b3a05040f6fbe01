#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridlab/config.hpp"
#include "gridlab/learner.hpp"
#include "gridlab/stats.hpp"

namespace gridlab {

struct ReplicaResult {
  int replica = 0;
  std::uint64_t seed = 0;
  double train_acc = 0;
  double test_acc = 0;
  double train_return = 0;
  double test_return = 0;
  std::string metrics_csv;
  std::string checkpoint;
};

struct ConditionReport {
  std::string name;
  std::vector<ReplicaResult> replicas;
  MeanSd train_acc;
  MeanSd test_acc;
  int eval_episodes = 0;
  std::vector<std::string> failures;  // replica index: message
};

struct ExperimentReport {
  std::vector<ConditionReport> conditions;
  std::optional<TTestResult> test_acc_ttest;  // two-condition runs
  std::string report_path;
};

// Trains `replicas` independently seeded runs (two conditions when
// compare.view_mode is set), evaluates each on both phases, writes
// <out_dir>/report.json and returns the parsed report. Failed replicas are
// recorded, not fatal, unless every replica of a condition fails.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct ClassifierReport {
  double train_acc = 0;
  double test_acc = 0;
  int train_examples = 0;
  int test_examples = 0;
  int steps = 0;
  std::string checkpoint;
};

// The still-image regime: same encoder stack, two-way head, supervised
// cross-entropy on first frames; label = side of the target object.
ClassifierReport train_classifier(const ExperimentConfig& cfg);

// Label oracle for a two-object layout: 0 when the target sits in a column
// left of the distractor, 1 when right; nullopt when tied.
std::optional<int> classifier_label(const EpisodeSpec& spec);

std::string report_to_json(const ExperimentReport& report);

}  // namespace gridlab
