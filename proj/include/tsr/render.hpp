#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "tsr/grid.hpp"

namespace tsr {

// Diverging speed palette: red (jammed) through pale to green (free flow),
// fixed stops at 0, 30, 50, 70 and 90+ km/h, linear in between.
struct ColorMap {
  std::array<std::uint8_t, 3> absent{128, 128, 128};
  std::array<std::uint8_t, 3> rgb(double speed_kmh) const;
};

// Binary PPM (P6), one block of block_px x block_px pixels per cell, time
// increasing rightward and space increasing upward.
std::string render_ppm(const SpeedField& field, int block_px = 8,
                       const ColorMap& colors = ColorMap{});

// SVG 1.1 with the same colors plus a speed legend.
std::string render_svg(const SpeedField& field, int block_px = 8,
                       const ColorMap& colors = ColorMap{});

}  // namespace tsr
