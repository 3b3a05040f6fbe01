#include "gridlab/oracle.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <stdexcept>

namespace gridlab {
namespace {

constexpr std::array<Action, 4> kActionOrder = {Action::up, Action::down,
                                                Action::left, Action::right};

// walks the path through the world; returns the final state
WorldState follow(WorldState ws, const std::vector<Action>& path) {
  for (Action a : path) {
    if (ws.done) break;
    ws = step(ws, a).first;
  }
  return ws;
}

struct Rollout {
  double ret = 0;
  int length = 0;
};

Rollout finish(const WorldState& ws) { return {ws.accumulated_return, ws.step_count}; }

// single-target episode: walk to `target`, avoiding every other object
Rollout run_single_target(const EpisodeSpec& spec, int target) {
  WorldState ws = reset(spec);
  std::vector<Position> avoid;
  for (size_t i = 0; i < spec.objects.size(); ++i)
    if (static_cast<int>(i) != target) avoid.push_back(spec.objects[i].second);
  auto path = bfs_path(ws.agent, spec.objects[target].second, avoid);
  if (!path) throw std::runtime_error("oracle: unsolvable layout");
  ws = follow(std::move(ws), *path);
  return finish(ws);
}

Rollout run_put(const EpisodeSpec& spec) {
  WorldState ws = reset(spec);
  const int target = spec.correct.at(0);
  std::vector<Position> avoid;
  for (size_t i = 0; i < spec.objects.size(); ++i)
    if (static_cast<int>(i) != target) avoid.push_back(spec.objects[i].second);
  auto path = bfs_path(ws.agent, spec.objects[target].second, avoid);
  if (!path) throw std::runtime_error("oracle: target unreachable");
  ws = follow(std::move(ws), *path);
  if (ws.done) return finish(ws);
  auto to_bed = bfs_path(ws.agent, *spec.bed, avoid);
  if (!to_bed) throw std::runtime_error("oracle: bed unreachable");
  ws = follow(std::move(ws), *to_bed);
  return finish(ws);
}

// collect every gridded object of the given ids, avoiding the others;
// waits out the clock if a remaining target is walled in
Rollout run_collect_type(WorldState ws, const std::vector<int>& wanted) {
  while (!ws.done) {
    std::vector<Position> avoid;
    for (size_t i = 0; i < ws.object_pos.size(); ++i) {
      if (!ws.object_pos[i]) continue;
      if (std::find(wanted.begin(), wanted.end(), static_cast<int>(i)) ==
          wanted.end())
        avoid.push_back(*ws.object_pos[i]);
    }
    std::optional<std::vector<Action>> best;
    for (int id : wanted) {
      if (!ws.object_pos[id]) continue;
      std::vector<Position> avoid_others = avoid;
      for (int other : wanted)
        if (other != id && ws.object_pos[other])
          avoid_others.push_back(*ws.object_pos[other]);
      auto path = bfs_path(ws.agent, *ws.object_pos[id], avoid_others);
      if (path && (!best || path->size() < best->size())) best = path;
    }
    if (!best) {
      // nothing reachable: burn a step without touching an object if possible
      Action safe = kActionOrder[0];
      for (Action a : kActionOrder) {
        const Position np = moved(ws.agent, a);
        if (!in_interior(np) || ws.object_at(np) == -1) {
          safe = a;
          break;
        }
      }
      ws = step(ws, safe).first;
      continue;
    }
    ws = follow(std::move(ws), *best);
  }
  return finish(ws);
}

}  // namespace

std::optional<std::vector<Action>> bfs_path(Position from, Position to,
                                            const std::vector<Position>& avoid) {
  if (!in_interior(from) || !in_interior(to))
    throw std::invalid_argument("bfs_path: endpoints must be interior");
  std::array<std::array<int, kGridCells>, kGridCells> prev{};
  for (auto& row : prev) row.fill(-1);
  for (Position p : avoid) prev[p.row][p.col] = -2;
  if (prev[to.row][to.col] == -2) return std::nullopt;
  if (from == to) return std::vector<Action>{};

  std::deque<Position> frontier{from};
  prev[from.row][from.col] = 4;  // sentinel: start
  while (!frontier.empty()) {
    const Position cur = frontier.front();
    frontier.pop_front();
    for (int ai = 0; ai < 4; ++ai) {
      const Position nxt = moved(cur, kActionOrder[ai]);
      if (!in_interior(nxt) || prev[nxt.row][nxt.col] != -1) continue;
      prev[nxt.row][nxt.col] = ai;
      if (nxt == to) {
        std::vector<Action> path;
        Position p = nxt;
        while (!(p == from)) {
          const int a = prev[p.row][p.col];
          path.push_back(kActionOrder[a]);
          switch (kActionOrder[a]) {
            case Action::up: p.row += 1; break;
            case Action::down: p.row -= 1; break;
            case Action::left: p.col += 1; break;
            case Action::right: p.col -= 1; break;
          }
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      frontier.push_back(nxt);
    }
  }
  return std::nullopt;
}

OracleStats oracle_run(const SplitSpec& split, Phase phase, OracleMode mode,
                       int episodes, RngStream rng) {
  const bool degenerate =
      mode == OracleMode::color_only || mode == OracleMode::shape_only;
  if (degenerate && split.task != TaskKind::find)
    throw std::invalid_argument("oracle: color/shape-only modes need the find task");
  if (mode == OracleMode::random_first_pick && split.task != TaskKind::collect)
    throw std::invalid_argument("oracle: random_first_pick needs the collect task");

  OracleStats stats;
  stats.episodes = episodes;
  double ret = 0, len = 0;
  std::int64_t successes = 0;
  // confound-kind strata for the exact ceiling of the degenerate oracles
  double strat_sum[2] = {0, 0};
  std::int64_t strat_n[2] = {0, 0};

  for (int e = 0; e < episodes; ++e) {
    RngStream ep_rng = rng.split(static_cast<std::uint64_t>(e));
    RngStream pick_rng = ep_rng.split(1);
    EpisodeSpec spec = sample_episode(split, phase, ep_rng);
    Rollout r;
    switch (mode) {
      case OracleMode::optimal_bfs: {
        if (spec.task == TaskKind::put) {
          r = run_put(spec);
        } else if (spec.task == TaskKind::collect) {
          r = run_collect_type(reset(spec), spec.correct);
        } else {
          r = run_single_target(spec, spec.correct.at(0));
        }
        break;
      }
      case OracleMode::random_first_pick: {
        // commit to one of the two object types at random
        const bool chose_correct = pick_rng.next_bool();
        std::vector<int> wanted;
        for (int i = 0; i < static_cast<int>(spec.objects.size()); ++i) {
          const bool is_correct =
              std::find(spec.correct.begin(), spec.correct.end(), i) !=
              spec.correct.end();
          if (is_correct == chose_correct) wanted.push_back(i);
        }
        r = run_collect_type(reset(spec), wanted);
        break;
      }
      case OracleMode::color_only:
      case OracleMode::shape_only: {
        const int target = spec.correct.at(0);
        const auto& tgt = spec.objects[target].first;
        std::vector<int> matches;
        for (int i = 0; i < static_cast<int>(spec.objects.size()); ++i) {
          const auto& obj = spec.objects[i].first;
          const bool match = mode == OracleMode::color_only
                                 ? obj.color.name == tgt.color.name
                                 : obj.shape.name == tgt.shape.name;
          if (match) matches.push_back(i);
        }
        const bool ambiguous = matches.size() > 1;
        const int chosen =
            ambiguous
                ? matches[pick_rng.next_below(
                      static_cast<std::uint32_t>(matches.size()))]
                : matches.at(0);
        r = run_single_target(spec, chosen);
        strat_sum[ambiguous] += ambiguous ? 0.5 : 1.0;
        strat_n[ambiguous] += 1;
        break;
      }
    }
    ret += r.ret;
    len += r.length;
    if (split.task == TaskKind::collect ? r.ret >= 4.0 : r.ret >= 1.0)
      ++successes;
  }

  stats.mean_return = ret / episodes;
  stats.mean_length = len / episodes;
  stats.accuracy = static_cast<double>(successes) / episodes;
  if (degenerate) {
    const double amb = strat_n[1] ? strat_sum[1] / strat_n[1] : 0.0;
    const double uniq = strat_n[0] ? strat_sum[0] / strat_n[0] : 0.0;
    stats.expected_accuracy = 0.5 * amb + 0.5 * uniq;
  }
  return stats;
}

}  // namespace gridlab
