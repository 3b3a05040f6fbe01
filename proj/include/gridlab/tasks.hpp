#pragma once

#include <array>
#include <string>
#include <vector>

#include "gridlab/rng.hpp"
#include "gridlab/world.hpp"

namespace gridlab {

enum class Phase { train, test };

// One instruction-combination: a verb applied to a (color, shape) pair.
// color < 0 means the template has no color slot.
struct InstrCombo {
  Verb verb = Verb::find;
  bool negated = false;
  int color = -1;  // index into SplitSpec::colors
  int shape = -1;  // index into SplitSpec::shapes
};

struct SplitSpec {
  TaskKind task = TaskKind::find;
  std::vector<Color> colors;
  std::vector<Shape> shapes;
  std::vector<InstrCombo> train;
  std::vector<InstrCombo> test;

  // sampler parameters
  bool collect_language = true;
  double negfind_negative_fraction = 0.5;  // share of negated train episodes
  double put_lift_fraction = 0.5;          // share of lift trials in put training
  int time_limit = kDefaultTimeLimit;

  // lift/put tasks: each shape keeps a fixed color so instructions can name
  // the shape alone
  std::vector<int> shape_color;

  // find task only: which train combos exist, for distractor lookup
  std::vector<std::vector<bool>> train_combo_grid;  // [color][shape]
};

struct SplitParams {
  std::string mode = "standard";  // find: standard | typical_color
  int negation_train_size = 6;    // negfind: |X1| in {6, 40, 100}
  bool collect_language = true;
  double negfind_negative_fraction = 0.5;
  double put_lift_fraction = 0.5;
  int lift_train_shapes = 7;  // lift: |X1|
  int time_limit = kDefaultTimeLimit;
};

// Builds the train/test protocol for a task. Throws std::invalid_argument
// when the universe cannot satisfy the protocol (message names the shortfall).
SplitSpec build_split(TaskKind task, const SplitParams& params, RngStream& rng);

// Samples a concrete episode from one side of the split.
EpisodeSpec sample_episode(const SplitSpec& split, Phase phase, RngStream& rng);

std::string instruction_for_combo(const SplitSpec& split, const InstrCombo& c);

// Procedurally generated 7x7 shape masks for the negation vocabulary-scaling
// experiments: pairwise Hamming distance >= 8, 12..37 set cells each.
struct GlyphUniverse {
  int n = 0;
  std::vector<std::array<std::uint8_t, 49>> masks;
  std::vector<std::string> names;  // "g0".."g{n-1}"
};

GlyphUniverse glyph_universe(int n, std::uint64_t seed);

inline constexpr int kGlyphUniverseMaxN = 512;
inline constexpr int kGlyphMinHamming = 8;
inline constexpr int kGlyphMinSet = 12;
inline constexpr int kGlyphMaxSet = 37;

// Audit dump: {"task", "train": [...], "test": [...]} with instruction
// strings and combo fields.
std::string split_to_json(const SplitSpec& split);

}  // namespace gridlab
