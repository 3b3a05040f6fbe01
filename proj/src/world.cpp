#include "gridlab/world.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace gridlab {

const char* task_name(TaskKind t) {
  switch (t) {
    case TaskKind::find: return "find";
    case TaskKind::lift: return "lift";
    case TaskKind::put: return "put";
    case TaskKind::negfind: return "negfind";
    case TaskKind::collect: return "collect";
  }
  return "?";
}

int mandated_object_count(TaskKind task) {
  return task == TaskKind::collect ? 8 : 2;
}

int WorldState::object_at(Position p) const {
  for (int i = 0; i < static_cast<int>(object_pos.size()); ++i) {
    if (object_pos[i] && *object_pos[i] == p) return i;
  }
  return -1;
}

bool WorldState::is_correct(int object_id) const {
  return std::find(spec.correct.begin(), spec.correct.end(), object_id) !=
         spec.correct.end();
}

int WorldState::remaining_correct() const {
  int n = 0;
  for (int id : spec.correct) {
    if (!collected[id]) ++n;
  }
  return n;
}

WorldState reset(const EpisodeSpec& spec) {
  std::ostringstream err;
  auto fail = [&err](const std::string& msg) { err << msg << "; "; };

  if (static_cast<int>(spec.objects.size()) != mandated_object_count(spec.task))
    fail("objects: task " + std::string(task_name(spec.task)) + " requires " +
         std::to_string(mandated_object_count(spec.task)) + " objects, got " +
         std::to_string(spec.objects.size()));
  if (spec.task == TaskKind::put && !spec.bed) fail("bed: put task requires a bed");
  if (spec.task != TaskKind::put && spec.bed) fail("bed: only the put task has a bed");
  if (spec.time_limit < 1) fail("time_limit: must be >= 1");
  if (spec.correct.empty()) fail("correct: empty correct set");
  for (int id : spec.correct) {
    if (id < 0 || id >= static_cast<int>(spec.objects.size()))
      fail("correct: object id " + std::to_string(id) + " out of range");
  }

  std::vector<Position> taken;
  for (size_t i = 0; i < spec.objects.size(); ++i) {
    Position p = spec.objects[i].second;
    if (!in_interior(p))
      fail("objects[" + std::to_string(i) + "]: placement not interior");
    if (std::find(taken.begin(), taken.end(), p) != taken.end())
      fail("objects[" + std::to_string(i) + "]: overlapping placement");
    taken.push_back(p);
  }
  if (spec.bed) {
    if (!in_interior(*spec.bed)) fail("bed: placement not interior");
    if (std::find(taken.begin(), taken.end(), *spec.bed) != taken.end())
      fail("bed: overlaps an object");
    taken.push_back(*spec.bed);
  }
  if (!in_interior(spec.agent_start)) fail("agent_start: not interior");
  if (std::find(taken.begin(), taken.end(), spec.agent_start) != taken.end())
    fail("agent_start: occupied cell");

  std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("invalid EpisodeSpec: " + msg);

  WorldState s;
  s.spec = spec;
  s.object_pos.reserve(spec.objects.size());
  for (const auto& [obj, pos] : spec.objects) {
    (void)obj;
    s.object_pos.push_back(pos);
  }
  s.collected.assign(spec.objects.size(), false);
  s.agent = spec.agent_start;
  return s;
}

std::pair<WorldState, StepResult> step(const WorldState& state, Action a) {
  if (state.done) throw std::logic_error("step called on a finished episode");

  WorldState s = state;
  StepResult r;
  s.step_count += 1;

  Position prev = s.agent;
  Position np = moved(prev, a);
  if (!in_interior(np)) np = prev;  // walls block, the step is still spent

  const bool moved_cell = !(np == prev);
  const int hit = moved_cell ? s.object_at(np) : -1;

  switch (s.spec.task) {
    case TaskKind::find:
    case TaskKind::lift:
    case TaskKind::negfind:
      if (hit >= 0) {
        s.done = true;
        if (s.is_correct(hit)) {
          r.reward = 1.0;
          r.event = StepEvent::correct_find;
        } else {
          r.event = StepEvent::wrong_find;
        }
      }
      break;
    case TaskKind::put:
      if (hit >= 0) {
        if (!s.carried) {
          s.carried = hit;
          s.object_pos[hit] = std::nullopt;  // rides on the agent's head
          r.event = s.is_correct(hit) ? StepEvent::correct_pickup
                                      : StepEvent::wrong_pickup;
        } else {
          // swap: what we carry lands on the square we came from
          s.object_pos[*s.carried] = prev;
          s.carried = hit;
          s.object_pos[hit] = std::nullopt;
          r.event = s.is_correct(hit) ? StepEvent::correct_pickup
                                      : StepEvent::wrong_pickup;
        }
      } else if (s.spec.bed && np == *s.spec.bed && s.carried) {
        s.done = true;
        if (s.is_correct(*s.carried)) {
          r.reward = 1.0;
          r.event = StepEvent::correct_put;
        } else {
          r.event = StepEvent::wrong_put;
        }
      }
      break;
    case TaskKind::collect:
      if (hit >= 0) {
        if (s.is_correct(hit)) {
          r.reward = 1.0;
          r.event = StepEvent::correct_pickup;
          s.collected[hit] = true;
          s.object_pos[hit] = std::nullopt;
          if (s.remaining_correct() == 0) s.done = true;
        } else {
          s.done = true;  // no reward, episode over
          r.event = StepEvent::wrong_pickup;
        }
      }
      break;
  }

  s.agent = np;
  if (!s.done && s.step_count >= s.spec.time_limit) {
    s.done = true;
    if (r.event == StepEvent::none) r.event = StepEvent::timeout;
  }
  s.accumulated_return += r.reward;
  r.done = s.done;
  return {std::move(s), r};
}

}  // namespace gridlab
