#include "gridlab/types.hpp"

namespace gridlab {

const std::vector<Color>& palette10() {
  static const std::vector<Color> palette = {
      {"black", {0, 0, 0}},        {"magenta", {255, 0, 255}},
      {"blue", {0, 0, 255}},       {"cyan", {0, 255, 255}},
      {"yellow", {255, 255, 0}},   {"gray", {160, 160, 160}},
      {"pink", {255, 128, 180}},   {"orange", {255, 128, 0}},
      {"red", {255, 0, 0}},        {"green", {0, 200, 0}},
  };
  return palette;
}

const std::vector<Shape>& builtin_shapes() {
  static const std::vector<Shape> shapes = {
      {"circle", 0, {}, 0},  {"square", 1, {}, 0}, {"triangle", 2, {}, 0},
      {"plus", 3, {}, 0},    {"cross", 4, {}, 0},  {"diamond", 5, {}, 0},
      {"ring", 6, {}, 0},    {"hbar", 7, {}, 0},   {"vbar", 8, {}, 0},
      {"corner", 9, {}, 0},
  };
  return shapes;
}

}  // namespace gridlab
