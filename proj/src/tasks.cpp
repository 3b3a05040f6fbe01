#include "gridlab/tasks.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include "gridlab/language.hpp"

namespace gridlab {
namespace {

constexpr int kPaletteSize = 10;
constexpr int kBuiltinShapes = 10;

template <typename T>
void seeded_shuffle(std::vector<T>& v, RngStream& rng) {
  for (size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.next_below(static_cast<std::uint32_t>(i))]);
}

Position draw_free_cell(std::vector<Position>& taken, RngStream& rng) {
  while (true) {
    Position p{kInteriorMin + static_cast<int>(rng.next_below(kInteriorCells)),
               kInteriorMin + static_cast<int>(rng.next_below(kInteriorCells))};
    if (std::find(taken.begin(), taken.end(), p) == taken.end()) {
      taken.push_back(p);
      return p;
    }
  }
}

ObjectSpec resolve(const SplitSpec& split, int color, int shape) {
  ObjectSpec o;
  o.color = color >= 0 ? split.colors[color] : Color{"", kBackgroundRgb};
  o.shape = split.shapes[shape];
  return o;
}

InstrCombo pick_uniform(const std::vector<InstrCombo>& combos, RngStream& rng) {
  return combos[rng.next_below(static_cast<std::uint32_t>(combos.size()))];
}

// same-phase combos differing from (c, s) in exactly one attribute
std::vector<InstrCombo> one_attr_neighbors(const SplitSpec& split,
                                           const InstrCombo& target,
                                           bool same_color, bool train_only) {
  std::vector<InstrCombo> out;
  const int ncolors = static_cast<int>(split.colors.size());
  const int nshapes = static_cast<int>(split.shapes.size());
  if (same_color) {
    for (int s = 0; s < nshapes; ++s) {
      if (s == target.shape) continue;
      if (train_only && !split.train_combo_grid[target.color][s]) continue;
      out.push_back({target.verb, false, target.color, s});
    }
  } else {
    for (int c = 0; c < ncolors; ++c) {
      if (c == target.color) continue;
      if (train_only && !split.train_combo_grid[c][target.shape]) continue;
      out.push_back({target.verb, false, c, target.shape});
    }
  }
  return out;
}

void fill_instr(EpisodeSpec& ep, const SplitSpec& split, const InstrCombo& c) {
  ep.instr.verb = c.verb;
  ep.instr.negated = c.negated;
  ep.instr.color_word = c.color >= 0 ? split.colors[c.color].name : "";
  ep.instr.shape_word = split.shapes[c.shape].name;
  ep.instr.with_language = split.collect_language || c.verb != Verb::collect;
  ep.instruction = instruction_for(ep);
}

EpisodeSpec sample_find(const SplitSpec& split, Phase phase, RngStream& rng) {
  const auto& combos = phase == Phase::train ? split.train : split.test;
  InstrCombo target = pick_uniform(combos, rng);

  // the confound matches the target's color or its shape, 50/50; in training
  // the confound must itself be a training combination
  bool same_color = rng.next_bool();
  const bool train_only = phase == Phase::train;
  auto cands = one_attr_neighbors(split, target, same_color, train_only);
  if (cands.empty()) {
    same_color = !same_color;
    cands = one_attr_neighbors(split, target, same_color, train_only);
  }
  if (cands.empty())
    throw std::logic_error("no one-attribute confound available");
  InstrCombo distractor = pick_uniform(cands, rng);

  EpisodeSpec ep;
  ep.task = split.task;
  ep.time_limit = split.time_limit;
  std::vector<Position> taken;
  ep.objects.push_back({resolve(split, target.color, target.shape),
                        draw_free_cell(taken, rng)});
  ep.objects.push_back({resolve(split, distractor.color, distractor.shape),
                        draw_free_cell(taken, rng)});
  ep.agent_start = draw_free_cell(taken, rng);
  ep.correct = {0};
  fill_instr(ep, split, target);
  return ep;
}

EpisodeSpec sample_lift_or_put(const SplitSpec& split, Phase phase,
                               RngStream& rng) {
  InstrCombo combo;
  if (split.task == TaskKind::put && phase == Phase::train) {
    // training mixes lift and put trials
    std::vector<InstrCombo> lifts, puts;
    for (const auto& c : split.train)
      (c.verb == Verb::lift ? lifts : puts).push_back(c);
    combo = rng.next_bool(split.put_lift_fraction) ? pick_uniform(lifts, rng)
                                                   : pick_uniform(puts, rng);
  } else {
    combo = pick_uniform(phase == Phase::train ? split.train : split.test, rng);
  }

  const int nshapes = static_cast<int>(split.shapes.size());
  int other = static_cast<int>(rng.next_below(nshapes - 1));
  if (other >= combo.shape) ++other;

  EpisodeSpec ep;
  ep.task = combo.verb == Verb::put ? TaskKind::put : TaskKind::lift;
  ep.time_limit = split.time_limit;
  std::vector<Position> taken;
  ep.objects.push_back({resolve(split, split.shape_color[combo.shape], combo.shape),
                        draw_free_cell(taken, rng)});
  ep.objects.push_back({resolve(split, split.shape_color[other], other),
                        draw_free_cell(taken, rng)});
  if (ep.task == TaskKind::put) ep.bed = draw_free_cell(taken, rng);
  ep.agent_start = draw_free_cell(taken, rng);
  ep.correct = {0};
  fill_instr(ep, split, combo);
  return ep;
}

EpisodeSpec sample_negfind(const SplitSpec& split, Phase phase, RngStream& rng) {
  InstrCombo combo;
  if (phase == Phase::train) {
    std::vector<InstrCombo> pos, neg;
    for (const auto& c : split.train) (c.negated ? neg : pos).push_back(c);
    combo = rng.next_bool(split.negfind_negative_fraction)
                ? pick_uniform(neg, rng)
                : pick_uniform(pos, rng);
  } else {
    combo = pick_uniform(split.test, rng);
  }

  const int nshapes = static_cast<int>(split.shapes.size());
  int other = static_cast<int>(rng.next_below(nshapes - 1));
  if (other >= combo.shape) ++other;

  EpisodeSpec ep;
  ep.task = TaskKind::negfind;
  ep.time_limit = split.time_limit;
  const int ncolors = static_cast<int>(split.colors.size());
  std::vector<Position> taken;
  // object 0 is always the named shape; the negation flips which one pays
  ep.objects.push_back(
      {resolve(split, static_cast<int>(rng.next_below(ncolors)), combo.shape),
       draw_free_cell(taken, rng)});
  ep.objects.push_back(
      {resolve(split, static_cast<int>(rng.next_below(ncolors)), other),
       draw_free_cell(taken, rng)});
  ep.agent_start = draw_free_cell(taken, rng);
  ep.correct = {combo.negated ? 1 : 0};
  fill_instr(ep, split, combo);
  return ep;
}

EpisodeSpec sample_collect(const SplitSpec& split, Phase phase, RngStream& rng) {
  const auto& combos = phase == Phase::train ? split.train : split.test;

  // target must have a same-phase combo differing in exactly one attribute
  std::vector<int> valid;
  std::vector<std::vector<int>> neighbors(combos.size());
  for (size_t i = 0; i < combos.size(); ++i) {
    for (size_t j = 0; j < combos.size(); ++j) {
      if (i == j) continue;
      const bool cs = combos[i].color == combos[j].color;
      const bool ss = combos[i].shape == combos[j].shape;
      if (cs != ss) neighbors[i].push_back(static_cast<int>(j));
    }
    if (!neighbors[i].empty()) valid.push_back(static_cast<int>(i));
  }
  if (valid.empty())
    throw std::logic_error("collect split has no one-attribute pair");

  const int ti = valid[rng.next_below(static_cast<std::uint32_t>(valid.size()))];
  const InstrCombo target = combos[ti];
  const auto& nb = neighbors[ti];
  const InstrCombo distractor =
      combos[nb[rng.next_below(static_cast<std::uint32_t>(nb.size()))]];

  EpisodeSpec ep;
  ep.task = TaskKind::collect;
  ep.time_limit = split.time_limit;
  std::vector<Position> taken;
  for (int k = 0; k < 4; ++k)
    ep.objects.push_back({resolve(split, target.color, target.shape),
                          draw_free_cell(taken, rng)});
  for (int k = 0; k < 4; ++k)
    ep.objects.push_back({resolve(split, distractor.color, distractor.shape),
                          draw_free_cell(taken, rng)});
  ep.agent_start = draw_free_cell(taken, rng);
  ep.correct = {0, 1, 2, 3};
  fill_instr(ep, split, target);
  return ep;
}

}  // namespace

std::string instruction_for_combo(const SplitSpec& split, const InstrCombo& c) {
  return render_instruction(
      c.verb, c.negated, c.color >= 0 ? split.colors[c.color].name : "",
      split.shapes[c.shape].name,
      split.collect_language || c.verb != Verb::collect);
}

SplitSpec build_split(TaskKind task, const SplitParams& params, RngStream& rng) {
  SplitSpec sp;
  sp.task = task;
  sp.collect_language = params.collect_language;
  sp.negfind_negative_fraction = params.negfind_negative_fraction;
  sp.put_lift_fraction = params.put_lift_fraction;
  sp.time_limit = params.time_limit;
  sp.colors = palette10();
  sp.shapes = builtin_shapes();

  switch (task) {
    case TaskKind::find: {
      sp.train_combo_grid.assign(kPaletteSize,
                                 std::vector<bool>(kBuiltinShapes, false));
      if (params.mode == "standard") {
        // train on c*s, c^*s and c*s^; test on c^*s^
        for (int c = 0; c < kPaletteSize; ++c) {
          for (int s = 0; s < kBuiltinShapes; ++s) {
            const bool held_c = c >= kNumTrainColors;
            const bool held_s = s >= kNumTrainShapes;
            InstrCombo combo{Verb::find, false, c, s};
            if (held_c && held_s) {
              sp.test.push_back(combo);
            } else {
              sp.train.push_back(combo);
              sp.train_combo_grid[c][s] = true;
            }
          }
        }
      } else if (params.mode == "typical_color") {
        // held-out shapes are seen in a single "typical" color during
        // training; test pairs them with every other color
        const int typical = 4;  // yellow
        for (int c = 0; c < kPaletteSize; ++c) {
          for (int s = 0; s < kBuiltinShapes; ++s) {
            InstrCombo combo{Verb::find, false, c, s};
            if (s < kNumTrainShapes || c == typical) {
              sp.train.push_back(combo);
              sp.train_combo_grid[c][s] = true;
            } else {
              sp.test.push_back(combo);
            }
          }
        }
      } else {
        throw std::invalid_argument("unknown find split mode: " + params.mode);
      }
      break;
    }
    case TaskKind::lift: {
      if (params.lift_train_shapes < 1 ||
          params.lift_train_shapes >= kBuiltinShapes)
        throw std::invalid_argument(
            "lift split needs 1 <= lift_train_shapes < 10, got " +
            std::to_string(params.lift_train_shapes));
      sp.shape_color.resize(kBuiltinShapes);
      for (int i = 0; i < kBuiltinShapes; ++i) sp.shape_color[i] = i;
      std::vector<int> order(kBuiltinShapes);
      for (int i = 0; i < kBuiltinShapes; ++i) order[i] = i;
      seeded_shuffle(order, rng);
      for (int i = 0; i < kBuiltinShapes; ++i)
        sp.train.push_back({Verb::find, false, -1, i});
      for (int i = 0; i < kBuiltinShapes; ++i) {
        InstrCombo c{Verb::lift, false, -1, order[i]};
        if (i < params.lift_train_shapes)
          sp.train.push_back(c);
        else
          sp.test.push_back(c);
      }
      break;
    }
    case TaskKind::put: {
      sp.shape_color.resize(kBuiltinShapes);
      for (int i = 0; i < kBuiltinShapes; ++i) sp.shape_color[i] = i;
      std::vector<int> order(kBuiltinShapes);
      for (int i = 0; i < kBuiltinShapes; ++i) order[i] = i;
      seeded_shuffle(order, rng);
      // all ten objects appear in lifting trials; three also in putting
      // trials, the remaining seven only at test time
      for (int i = 0; i < kBuiltinShapes; ++i)
        sp.train.push_back({Verb::lift, false, -1, i});
      for (int i = 0; i < kBuiltinShapes; ++i) {
        InstrCombo c{Verb::put, false, -1, order[i]};
        if (i < 3)
          sp.train.push_back(c);
        else
          sp.test.push_back(c);
      }
      break;
    }
    case TaskKind::negfind: {
      const int n1 = params.negation_train_size;
      const int n2 = 8;
      if (n1 < 1 || n1 + n2 > kGlyphUniverseMaxN)
        throw std::invalid_argument("negation_train_size out of range: " +
                                    std::to_string(n1));
      const GlyphUniverse u = glyph_universe(n1 + n2, rng.next_u64());
      sp.shapes.clear();
      for (int i = 0; i < u.n; ++i) {
        Shape s;
        s.name = u.names[i];
        s.builtin = -1;
        s.mask.assign(u.masks[i].begin(), u.masks[i].end());
        s.mask_px = 7;
        sp.shapes.push_back(std::move(s));
      }
      for (int i = 0; i < n1 + n2; ++i)
        sp.train.push_back({Verb::find, false, -1, i});
      for (int i = 0; i < n1 + n2; ++i) {
        InstrCombo c{Verb::find, true, -1, i};
        if (i < n1)
          sp.train.push_back(c);
        else
          sp.test.push_back(c);
      }
      break;
    }
    case TaskKind::collect: {
      std::vector<InstrCombo> all;
      for (int c = 0; c < kPaletteSize; ++c)
        for (int s = 0; s < kBuiltinShapes; ++s)
          all.push_back({Verb::collect, false, c, s});
      seeded_shuffle(all, rng);
      for (size_t i = 0; i < all.size(); ++i)
        (i < all.size() / 2 ? sp.train : sp.test).push_back(all[i]);
      break;
    }
  }
  return sp;
}

EpisodeSpec sample_episode(const SplitSpec& split, Phase phase, RngStream& rng) {
  const auto& combos = phase == Phase::train ? split.train : split.test;
  if (combos.empty()) throw std::invalid_argument("empty phase combo set");
  switch (split.task) {
    case TaskKind::find: return sample_find(split, phase, rng);
    case TaskKind::lift:
    case TaskKind::put: return sample_lift_or_put(split, phase, rng);
    case TaskKind::negfind: return sample_negfind(split, phase, rng);
    case TaskKind::collect: return sample_collect(split, phase, rng);
  }
  throw std::logic_error("unreachable");
}

GlyphUniverse glyph_universe(int n, std::uint64_t seed) {
  if (n < 1 || n > kGlyphUniverseMaxN)
    throw std::invalid_argument("glyph_universe: n must be in [1, 512]");
  GlyphUniverse u;
  u.n = n;
  RngStream rng = derive_stream(seed, 0x6779);
  const long budget = 1000L * n + 1000;
  long attempts = 0;
  while (static_cast<int>(u.masks.size()) < n) {
    if (++attempts > budget)
      throw std::runtime_error("glyph_universe: attempt budget exhausted");
    std::array<std::uint8_t, 49> cand{};
    int set = 0;
    for (auto& cell : cand) {
      cell = rng.next_bool() ? 1 : 0;
      set += cell;
    }
    if (set < kGlyphMinSet || set > kGlyphMaxSet) continue;
    bool ok = true;
    for (const auto& prev : u.masks) {
      int ham = 0;
      for (int i = 0; i < 49; ++i) ham += cand[i] != prev[i];
      if (ham < kGlyphMinHamming) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    u.names.push_back("g" + std::to_string(u.masks.size()));
    u.masks.push_back(cand);
  }
  return u;
}

std::string split_to_json(const SplitSpec& split) {
  nlohmann::json j;
  j["task"] = task_name(split.task);
  auto combos_json = [&](const std::vector<InstrCombo>& combos) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : combos) {
      nlohmann::json e;
      e["verb"] = c.verb == Verb::find   ? "find"
                  : c.verb == Verb::lift ? "lift"
                  : c.verb == Verb::put  ? "put"
                                         : "collect";
      e["negated"] = c.negated;
      if (c.color >= 0) e["color"] = split.colors[c.color].name;
      e["shape"] = split.shapes[c.shape].name;
      e["instruction"] = instruction_for_combo(split, c);
      arr.push_back(std::move(e));
    }
    return arr;
  };
  j["train"] = combos_json(split.train);
  j["test"] = combos_json(split.test);
  return j.dump(2);
}

}  // namespace gridlab
