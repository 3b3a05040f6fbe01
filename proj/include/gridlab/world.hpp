#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridlab/types.hpp"

namespace gridlab {

enum class TaskKind { find, lift, put, negfind, collect };

const char* task_name(TaskKind t);

enum class Verb { find, lift, put, collect };

// Inputs of the instruction template; the rendered string lives next to it
// so the two can be checked against each other.
struct InstrSpec {
  Verb verb = Verb::find;
  bool negated = false;
  std::string color_word;  // empty when the template has no color slot
  std::string shape_word;
  bool with_language = true;  // collect-only: false drops the instruction
};

// A fully sampled episode: layout, instruction and reward rule.
struct EpisodeSpec {
  TaskKind task = TaskKind::find;
  std::vector<std::pair<ObjectSpec, Position>> objects;
  std::optional<Position> bed;  // put task only
  Position agent_start;
  InstrSpec instr;
  std::string instruction;
  std::vector<int> correct;  // object ids (indices into objects)
  int time_limit = kDefaultTimeLimit;
};

enum class StepEvent {
  none,
  correct_pickup,
  wrong_pickup,
  correct_find,
  wrong_find,
  correct_put,
  wrong_put,
  timeout,
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
  StepEvent event = StepEvent::none;
};

// Full simulator state. A value type: step() returns a new state, so
// independent instances can be advanced concurrently.
struct WorldState {
  EpisodeSpec spec;
  std::vector<std::optional<Position>> object_pos;  // nullopt: carried/collected
  std::vector<bool> collected;
  Position agent;
  std::optional<int> carried;
  int step_count = 0;
  bool done = false;
  double accumulated_return = 0.0;

  int object_at(Position p) const;  // object id or -1
  bool is_correct(int object_id) const;
  int remaining_correct() const;
};

// Validates the spec and builds the initial state. Throws
// std::invalid_argument describing every violated constraint.
WorldState reset(const EpisodeSpec& spec);

// Pure transition. Throws std::logic_error when called on a done state.
std::pair<WorldState, StepResult> step(const WorldState& state, Action a);

// Object count mandated per task (excluding the bed).
int mandated_object_count(TaskKind task);

}  // namespace gridlab
