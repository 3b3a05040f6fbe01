#include "gridlab/render.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace gridlab {
namespace {

// Hand-picked 3x3 masks for the built-in glyphs; procedural drawing needs
// at least 5 px per cell to keep ten shapes apart.
const std::array<const char*, 10> kTinyGlyphs = {
    "010111010",  // circle
    "111111111",  // square
    "001011111",  // triangle
    "010010111",  // plus
    "101010101",  // cross
    "011101110",  // diamond
    "110101011",  // ring
    "000111000",  // hbar
    "010010010",  // vbar
    "100100111",  // corner
};

std::vector<std::uint8_t> draw_builtin(int which, int px) {
  std::vector<std::uint8_t> m(static_cast<size_t>(px) * px, 0);
  if (px < 5) {
    const char* s = kTinyGlyphs[which];
    for (int i = 0; i < 9; ++i) m[i] = s[i] == '1';
    return m;
  }
  const double c = (px - 1) / 2.0;
  const int ic = (px - 1) / 2;
  for (int i = 0; i < px; ++i) {
    for (int j = 0; j < px; ++j) {
      const double d2 = (i - c) * (i - c) + (j - c) * (j - c);
      bool on = false;
      switch (which) {
        case 0: {  // circle: filled disk
          const double r = px == 5 ? c + 0.51 : c + 0.2;
          on = d2 <= r * r;
          break;
        }
        case 1:  // square: filled, 1 px margin
          on = i >= 1 && i <= px - 2 && j >= 1 && j <= px - 2;
          break;
        case 2:  // triangle: apex up, full-width base
          on = std::abs(j - ic) * (px - 1) <= i * ic;
          break;
        case 3: {  // plus
          const int w = px / 7;
          on = std::abs(i - ic) <= w || std::abs(j - ic) <= w;
          break;
        }
        case 4: {  // cross: both diagonals
          const int w = px / 7;
          on = std::abs(i - j) <= w || std::abs(i + j - (px - 1)) <= w;
          break;
        }
        case 5:  // diamond: filled rhombus
          on = std::abs(i - ic) + std::abs(j - ic) <= ic;
          break;
        case 6: {  // ring: annulus
          const double inner = px == 5 ? 1.1 : c - 1.4;
          on = d2 <= (c + 0.2) * (c + 0.2) && d2 >= inner * inner;
          break;
        }
        case 7: {  // hbar
          const int w = px / 7;
          on = std::abs(i - ic) <= w;
          break;
        }
        case 8: {  // vbar
          const int w = px / 7;
          on = std::abs(j - ic) <= w;
          break;
        }
        case 9: {  // corner: L along left and bottom edges
          const int t = px / 4;
          on = j <= t || i >= px - 1 - t;
          break;
        }
      }
      if (on) m[static_cast<size_t>(i) * px + j] = 1;
    }
  }
  return m;
}

std::vector<std::uint8_t> scale_mask(const std::vector<std::uint8_t>& src,
                                     int src_px, int px) {
  std::vector<std::uint8_t> m(static_cast<size_t>(px) * px, 0);
  for (int i = 0; i < px; ++i) {
    const int si = i * src_px / px;
    for (int j = 0; j < px; ++j) {
      const int sj = j * src_px / px;
      m[static_cast<size_t>(i) * px + j] =
          src[static_cast<size_t>(si) * src_px + sj];
    }
  }
  return m;
}

inline void put_px(Frame& f, int y, int x, Rgb c) {
  auto* p = f.data.data() + (static_cast<size_t>(y) * f.width + x) * 3;
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
}

void fill_cell(Frame& f, int cy, int cx, int px, Rgb c) {
  for (int i = 0; i < px; ++i)
    for (int j = 0; j < px; ++j) put_px(f, cy + i, cx + j, c);
}

void draw_bed_cell(Frame& f, int cy, int cx, int px) {
  // white/background diagonals of width 1 px
  for (int i = 0; i < px; ++i)
    for (int j = 0; j < px; ++j)
      put_px(f, cy + i, cx + j,
             (i + j) % 2 == 0 ? kBedStripeRgb : kBackgroundRgb);
}

void draw_glyph_cell(Frame& f, int cy, int cx, int px, const ObjectSpec& obj,
                     Rgb background) {
  const auto mask = rasterize_glyph(obj.shape, px);
  for (int i = 0; i < px; ++i)
    for (int j = 0; j < px; ++j)
      put_px(f, cy + i, cx + j,
             mask[static_cast<size_t>(i) * px + j] ? obj.color.rgb : background);
}

}  // namespace

const char* view_mode_name(ViewMode m) {
  switch (m) {
    case ViewMode::allocentric_fixed: return "allocentric_fixed";
    case ViewMode::egocentric_partial: return "egocentric_partial";
    case ViewMode::egocentric_full: return "egocentric_full";
    case ViewMode::allocentric_large: return "allocentric_large";
  }
  return "?";
}

bool parse_view_mode(const std::string& s, ViewMode* out) {
  for (ViewMode m : {ViewMode::allocentric_fixed, ViewMode::egocentric_partial,
                     ViewMode::egocentric_full, ViewMode::allocentric_large}) {
    if (s == view_mode_name(m)) {
      *out = m;
      return true;
    }
  }
  return false;
}

ViewConfig make_view(ViewMode mode, int px_per_cell, int window_cells,
                     bool agent_visible_when_carrying) {
  ViewConfig v;
  v.mode = mode;
  switch (mode) {
    case ViewMode::allocentric_fixed:
      v.window_cells = kGridCells;
      v.px_per_cell = 9;
      break;
    case ViewMode::egocentric_partial:
      v.window_cells = 5;
      v.px_per_cell = 9;
      break;
    case ViewMode::egocentric_full:
    case ViewMode::allocentric_large:
      v.window_cells = 21;
      v.px_per_cell = 7;
      break;
  }
  if (px_per_cell > 0) v.px_per_cell = px_per_cell;
  if (window_cells > 0) v.window_cells = window_cells;
  v.agent_visible_when_carrying = agent_visible_when_carrying;
  return v;
}

std::vector<std::uint8_t> rasterize_glyph(const Shape& shape, int px) {
  if (px < 3) throw std::invalid_argument("rasterize_glyph: px must be >= 3");
  if (shape.builtin >= 0) return draw_builtin(shape.builtin, px);
  if (shape.mask.empty() || shape.mask_px <= 0)
    throw std::invalid_argument("rasterize_glyph: shape has no mask");
  return scale_mask(shape.mask, shape.mask_px, px);
}

Frame render(const WorldState& state, const ViewConfig& view) {
  const int W = view.window_cells;
  const int px = view.px_per_cell;
  Frame f;
  f.width = W * px;
  f.height = W * px;
  f.data.assign(static_cast<size_t>(f.width) * f.height * 3, 0);

  int org_r = 0, org_c = 0;  // grid coordinate of the window's top-left cell
  switch (view.mode) {
    case ViewMode::allocentric_fixed:
      break;
    case ViewMode::egocentric_partial:
    case ViewMode::egocentric_full:
      org_r = state.agent.row - W / 2;
      org_c = state.agent.col - W / 2;
      break;
    case ViewMode::allocentric_large:
      org_r = kGridCells / 2 - W / 2;
      org_c = kGridCells / 2 - W / 2;
      break;
  }

  for (int wr = 0; wr < W; ++wr) {
    for (int wc = 0; wc < W; ++wc) {
      const Position g{org_r + wr, org_c + wc};
      const int cy = wr * px, cx = wc * px;
      if (!in_interior(g)) {
        fill_cell(f, cy, cx, px, kWallRgb);
        continue;
      }
      if (g == state.agent) {
        if (state.carried) {
          // the carried object rides on the agent's head; the agent shows
          // through as a white background only in the visibility control
          const Rgb bg =
              view.agent_visible_when_carrying ? kAgentRgb : kBackgroundRgb;
          draw_glyph_cell(f, cy, cx, px, state.spec.objects[*state.carried].first,
                          bg);
        } else {
          fill_cell(f, cy, cx, px, kAgentRgb);
        }
        continue;
      }
      if (state.spec.bed && g == *state.spec.bed) {
        draw_bed_cell(f, cy, cx, px);
        continue;
      }
      const int obj = state.object_at(g);
      if (obj >= 0) {
        draw_glyph_cell(f, cy, cx, px, state.spec.objects[obj].first,
                        kBackgroundRgb);
      } else {
        fill_cell(f, cy, cx, px, kBackgroundRgb);
      }
    }
  }
  return f;
}

void write_ppm(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  const std::string bytes = ppm_bytes(frame);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string ppm_bytes(const Frame& frame) {
  std::string header = "P6\n" + std::to_string(frame.width) + " " +
                       std::to_string(frame.height) + "\n255\n";
  std::string bytes;
  bytes.reserve(header.size() + frame.data.size());
  bytes += header;
  bytes.append(reinterpret_cast<const char*>(frame.data.data()),
               frame.data.size());
  return bytes;
}

}  // namespace gridlab
