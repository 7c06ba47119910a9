#include "tsr/render.hpp"

#include <cmath>
#include <cstdio>

#include "tsr/error.hpp"

namespace tsr {

namespace {

struct Stop {
  double speed;
  std::array<std::uint8_t, 3> rgb;
};

constexpr std::array<Stop, 5> kStops{{
    {0.0, {178, 24, 43}},
    {30.0, {239, 138, 98}},
    {50.0, {253, 219, 199}},
    {70.0, {161, 217, 155}},
    {90.0, {35, 139, 69}},
}};

std::string hex_color(const std::array<std::uint8_t, 3>& c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

}  // namespace

std::array<std::uint8_t, 3> ColorMap::rgb(double speed_kmh) const {
  if (speed_kmh <= kStops.front().speed) return kStops.front().rgb;
  if (speed_kmh >= kStops.back().speed) return kStops.back().rgb;
  for (std::size_t i = 1; i < kStops.size(); ++i) {
    if (speed_kmh <= kStops[i].speed) {
      const Stop& lo = kStops[i - 1];
      const Stop& hi = kStops[i];
      double f = (speed_kmh - lo.speed) / (hi.speed - lo.speed);
      std::array<std::uint8_t, 3> out{};
      for (int c = 0; c < 3; ++c) {
        out[c] = static_cast<std::uint8_t>(std::lround(lo.rgb[c] + f * (hi.rgb[c] - lo.rgb[c])));
      }
      return out;
    }
  }
  return kStops.back().rgb;
}

std::string render_ppm(const SpeedField& field, int block_px, const ColorMap& colors) {
  if (block_px < 1) throw UsageError("pixel block size must be >= 1");
  const GridSpec& spec = field.spec();
  const int width = spec.nt * block_px;
  const int height = spec.nx * block_px;

  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(width) * height * 3);

  // Precompute one color per cell, then emit pixel rows top (max space) down.
  std::vector<std::array<std::uint8_t, 3>> cell_rgb(
      static_cast<std::size_t>(spec.nt) * spec.nx);
  for (int a = 0; a < spec.nt; ++a) {
    for (int b = 0; b < spec.nx; ++b) {
      auto v = field.at(a, b);
      cell_rgb[static_cast<std::size_t>(a) * spec.nx + b] = v ? colors.rgb(*v) : colors.absent;
    }
  }
  for (int row = 0; row < height; ++row) {
    int b = spec.nx - 1 - row / block_px;
    for (int col = 0; col < width; ++col) {
      int a = col / block_px;
      const auto& c = cell_rgb[static_cast<std::size_t>(a) * spec.nx + b];
      out.push_back(static_cast<char>(c[0]));
      out.push_back(static_cast<char>(c[1]));
      out.push_back(static_cast<char>(c[2]));
    }
  }
  return out;
}

std::string render_svg(const SpeedField& field, int block_px, const ColorMap& colors) {
  if (block_px < 1) throw UsageError("pixel block size must be >= 1");
  const GridSpec& spec = field.spec();
  const int width = spec.nt * block_px;
  const int height = spec.nx * block_px;
  const int legend_height = 40;

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
                "width=\"%d\" height=\"%d\">\n",
                width, height + legend_height);
  out += buf;

  for (int b = spec.nx - 1; b >= 0; --b) {
    int y = (spec.nx - 1 - b) * block_px;
    for (int a = 0; a < spec.nt; ++a) {
      auto v = field.at(a, b);
      std::string color = hex_color(v ? colors.rgb(*v) : colors.absent);
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\"/>\n",
                    a * block_px, y, block_px, block_px, color.c_str());
      out += buf;
    }
  }

  // Legend: sample the palette at 2 km/h steps over [0, 100].
  const int legend_y = height + 8;
  const int swatch_w = std::max(1, width / 50);
  for (int i = 0; i < 50; ++i) {
    double speed = i * 2.0;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"12\" fill=\"%s\"/>\n",
                  i * swatch_w, legend_y, swatch_w, hex_color(colors.rgb(speed)).c_str());
    out += buf;
  }
  for (int speed = 0; speed <= 100; speed += 25) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"10\" font-family=\"sans-serif\">"
                  "%d km/h</text>\n",
                  speed * swatch_w / 2, legend_y + 24, speed);
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace tsr
