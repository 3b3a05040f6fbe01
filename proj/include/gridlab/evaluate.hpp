#pragma once

#include "gridlab/agent.hpp"
#include "gridlab/tasks.hpp"

namespace gridlab {

struct EvalResult {
  // find/lift/put/negfind: fraction of episodes with return 1;
  // collect: mean normalized return over episodes whose first pickup was
  // correct (the conditioned metric)
  double accuracy = 0;
  double mean_return = 0;
  double mean_length = 0;
  double conditioned_return = 0;       // collect only
  double first_event_correct = 0;      // among episodes that touched an object
  int episodes = 0;
};

// Greedy (or sampled) rollouts of a fixed parameter snapshot. Episodes are
// derived from per-index child streams, so results do not depend on thread
// scheduling. Never mutates params.
EvalResult evaluate_params(const AgentParams& params, const SplitSpec& split,
                           Phase phase, const ViewConfig& view, int episodes,
                           RngStream rng, bool greedy = true);

}  // namespace gridlab
