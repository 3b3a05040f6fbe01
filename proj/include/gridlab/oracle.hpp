#pragma once

#include <optional>
#include <vector>

#include "gridlab/tasks.hpp"

namespace gridlab {

enum class OracleMode { optimal_bfs, random_first_pick, color_only, shape_only };

struct OracleStats {
  double mean_return = 0;
  double mean_length = 0;
  double accuracy = 0;  // realized success rate
  // degenerate oracles: exact expectation, stratified over the two confound
  // kinds, so the 0.75 ceiling is checkable without Monte Carlo noise
  double expected_accuracy = 0;
  int episodes = 0;
};

// Shortest action path between interior cells avoiding the given cells;
// nullopt when unreachable. Deterministic tie-breaking.
std::optional<std::vector<Action>> bfs_path(Position from, Position to,
                                            const std::vector<Position>& avoid);

// Scripted policies with privileged world access. optimal_bfs works on
// find/lift/put/negfind/collect; random_first_pick on collect; color_only
// and shape_only on the find (color-shape) task.
OracleStats oracle_run(const SplitSpec& split, Phase phase, OracleMode mode,
                       int episodes, RngStream rng);

}  // namespace gridlab
