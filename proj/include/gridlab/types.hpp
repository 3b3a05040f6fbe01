#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gridlab {

// Grid geometry: a 9x9 room inside a wall ring of width 1.
inline constexpr int kGridCells = 11;
inline constexpr int kInteriorMin = 1;
inline constexpr int kInteriorMax = 9;
inline constexpr int kInteriorCells = 9;
inline constexpr int kDefaultTimeLimit = 40;
inline constexpr int kNumActions = 4;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct Color {
  std::string name;
  Rgb rgb;
};

// Fixed scene colors. Background and wall are mid/dark gray so that black
// objects stay visible; the agent is a white square.
inline constexpr Rgb kBackgroundRgb{96, 96, 96};
inline constexpr Rgb kWallRgb{32, 32, 32};
inline constexpr Rgb kAgentRgb{255, 255, 255};
inline constexpr Rgb kBedStripeRgb{255, 255, 255};

// The 10-color palette. The first 8 are the training colors, the last 2
// (red, green) are held out for test combinations.
const std::vector<Color>& palette10();
inline constexpr int kNumTrainColors = 8;

// A drawable shape: either one of the 10 built-in glyph procedures, or an
// explicit binary mask (procedural universes) scaled at raster time.
struct Shape {
  std::string name;
  int builtin = -1;                // index into the built-in glyph table
  std::vector<std::uint8_t> mask;  // row-major 0/1, used when builtin < 0
  int mask_px = 0;                 // native mask resolution
};

// The 10 named glyphs, in canonical order. The first 8 are the training
// shapes of the color-shape task, the last 2 are held out.
const std::vector<Shape>& builtin_shapes();
inline constexpr int kNumTrainShapes = 8;

// An object is a (color, shape) pair drawn from the experiment's
// registered universe.
struct ObjectSpec {
  Color color;
  Shape shape;
};

struct Position {
  int row = 0;
  int col = 0;
  bool operator==(const Position&) const = default;
};

inline bool in_grid(Position p) {
  return p.row >= 0 && p.row < kGridCells && p.col >= 0 && p.col < kGridCells;
}
inline bool in_interior(Position p) {
  return p.row >= kInteriorMin && p.row <= kInteriorMax &&
         p.col >= kInteriorMin && p.col <= kInteriorMax;
}

enum class Action : int { up = 0, down = 1, left = 2, right = 3 };

inline Position moved(Position p, Action a) {
  switch (a) {
    case Action::up: return {p.row - 1, p.col};
    case Action::down: return {p.row + 1, p.col};
    case Action::left: return {p.row, p.col - 1};
    case Action::right: return {p.row, p.col + 1};
  }
  return p;
}

}  // namespace gridlab
