#pragma once

#include <string>
#include <vector>

#include "gridlab/world.hpp"

namespace gridlab {

enum class ViewMode {
  allocentric_fixed,    // whole grid, fixed frame
  egocentric_partial,   // small window centred on the agent
  egocentric_full,      // large window centred on the agent, room always visible
  allocentric_large,    // large fixed window, grid centred
};

const char* view_mode_name(ViewMode m);
bool parse_view_mode(const std::string& s, ViewMode* out);

struct ViewConfig {
  ViewMode mode = ViewMode::allocentric_fixed;
  int window_cells = kGridCells;  // odd
  int px_per_cell = 9;
  bool agent_visible_when_carrying = false;
};

// Mode defaults: fixed 11 cells @ 9 px, partial 5 @ 9, large modes 21 @ 7.
// px/window of 0 pick the default.
ViewConfig make_view(ViewMode mode, int px_per_cell = 0, int window_cells = 0,
                     bool agent_visible_when_carrying = false);

struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major RGB

  bool operator==(const Frame&) const = default;
};

// Deterministic rasterization of a world state under a view. Cells outside
// the grid render as wall; egocentric modes keep the agent at the window
// centre.
Frame render(const WorldState& state, const ViewConfig& view);

// Binary px*px mask for a shape (built-in glyphs are drawn procedurally,
// explicit masks are nearest-neighbour scaled).
std::vector<std::uint8_t> rasterize_glyph(const Shape& shape, int px);

// Binary PPM (P6, maxval 255), bit-exact.
void write_ppm(const Frame& frame, const std::string& path);
std::string ppm_bytes(const Frame& frame);

}  // namespace gridlab
