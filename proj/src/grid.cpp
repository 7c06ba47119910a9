#include "tsr/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace tsr {

namespace {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

// Shortest round-trip decimal form, so specs survive a file round trip exactly.
std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(token, &pos);
    if (pos != token.size()) throw DataError(what + ": trailing junk in '" + token + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw DataError(what + ": not a number: '" + token + "'");
  } catch (const std::out_of_range&) {
    throw DataError(what + ": out of range: '" + token + "'");
  }
}

}  // namespace

void validate_trajectory(const Trajectory& trajectory) {
  const auto& pts = trajectory.points;
  if (pts.size() < 2) {
    throw DataError("trajectory " + trajectory.vehicle_id + " has fewer than 2 points");
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].time_s) || !std::isfinite(pts[i].position_m)) {
      throw DataError("trajectory " + trajectory.vehicle_id + " has a non-finite sample");
    }
    if (i == 0) continue;
    double dt = pts[i].time_s - pts[i - 1].time_s;
    if (dt <= 0.0) {
      throw DataError("trajectory " + trajectory.vehicle_id +
                      " violates strictly increasing time at sample " + std::to_string(i));
    }
    double speed = (pts[i].position_m - pts[i - 1].position_m) / dt;
    if (speed < 0.0 || speed > kMaxSpeedMps) {
      throw DataError("trajectory " + trajectory.vehicle_id + " implies speed " +
                      std::to_string(speed) + " m/s at sample " + std::to_string(i) +
                      " (allowed [0, " + std::to_string(kMaxSpeedMps) + "])");
    }
  }
}

std::string to_string(const GridSpec& spec) {
  std::string s = "{t0=" + format_double(spec.t0_s) + "s, x0=" + format_double(spec.x0_m) +
                  "m, dt=" + format_double(spec.dt_s) + "s, dx=" + format_double(spec.dx_m) +
                  "m, nt=" + std::to_string(spec.nt) + ", nx=" + std::to_string(spec.nx) + "}";
  return s;
}

void validate_spec(const GridSpec& spec) {
  if (!(spec.dt_s > 0.0) || !(spec.dx_m > 0.0)) {
    throw ConfigError("grid spec requires positive cell sizes, got " + to_string(spec));
  }
  if (spec.nt < 1 || spec.nx < 1) {
    throw ConfigError("grid spec requires nt, nx >= 1, got " + to_string(spec));
  }
  if (!std::isfinite(spec.t0_s) || !std::isfinite(spec.x0_m)) {
    throw ConfigError("grid spec origin must be finite");
  }
}

GridSpec halve_spec(const GridSpec& spec) {
  return GridSpec{spec.t0_s, spec.x0_m, spec.dt_s / 2.0, spec.dx_m / 2.0,
                  spec.nt * 2, spec.nx * 2};
}

const char* to_string(SubcellId id) {
  switch (id) {
    case SubcellId::LL: return "LL";
    case SubcellId::LR: return "LR";
    case SubcellId::UR: return "UR";
    case SubcellId::UL: return "UL";
  }
  return "?";
}

std::optional<SubcellId> subcell_from_string(const std::string& name) {
  for (SubcellId id : kSubcells) {
    if (name == to_string(id)) return id;
  }
  return std::nullopt;
}

const char* to_string(Regime regime) {
  return regime == Regime::ff ? "ff" : "cg";
}

std::optional<Regime> regime_from_string(const std::string& name) {
  if (name == "ff") return Regime::ff;
  if (name == "cg") return Regime::cg;
  return std::nullopt;
}

Regime classify_regime(double center_kmh, double threshold_kmh) {
  if (threshold_kmh < 0.0) {
    throw ConfigError("regime threshold must be non-negative, got " +
                      std::to_string(threshold_kmh));
  }
  if (center_kmh < 0.0) {
    throw UsageError("cell speed must be non-negative, got " + std::to_string(center_kmh));
  }
  return center_kmh < threshold_kmh ? Regime::cg : Regime::ff;
}

SpeedField::SpeedField(GridSpec spec, int lane) : spec_(spec), lane_(lane) {
  validate_spec(spec_);
  cells_.assign(static_cast<std::size_t>(spec_.nt) * spec_.nx, kAbsent);
}

std::size_t SpeedField::index(int a, int b) const {
  return static_cast<std::size_t>(a) * spec_.nx + b;
}

void SpeedField::check_range(int a, int b) const {
  if (a < 0 || a >= spec_.nt || b < 0 || b >= spec_.nx) {
    throw UsageError("cell index (" + std::to_string(a) + ", " + std::to_string(b) +
                     ") outside grid " + std::to_string(spec_.nt) + "x" +
                     std::to_string(spec_.nx));
  }
}

bool SpeedField::present(int a, int b) const {
  check_range(a, b);
  return !std::isnan(cells_[index(a, b)]);
}

std::optional<double> SpeedField::at(int a, int b) const {
  check_range(a, b);
  double v = cells_[index(a, b)];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

void SpeedField::set(int a, int b, double speed_kmh) {
  check_range(a, b);
  if (!std::isfinite(speed_kmh) || speed_kmh < 0.0) {
    throw UsageError("cell speed must be finite and non-negative, got " +
                     std::to_string(speed_kmh));
  }
  cells_[index(a, b)] = speed_kmh;
}

void SpeedField::clear(int a, int b) {
  check_range(a, b);
  cells_[index(a, b)] = kAbsent;
}

std::int64_t SpeedField::present_count() const {
  std::int64_t n = 0;
  for (double v : cells_) {
    if (!std::isnan(v)) ++n;
  }
  return n;
}

std::optional<NeighborVector> neighbor_vector(const SpeedField& field, int a, int b) {
  const GridSpec& spec = field.spec();
  if (a < 1 || a > spec.nt - 2 || b < 1 || b > spec.nx - 2) {
    throw UsageError("neighbor vector requires an interior cell, got (" + std::to_string(a) +
                     ", " + std::to_string(b) + ") in grid " + std::to_string(spec.nt) + "x" +
                     std::to_string(spec.nx));
  }
  auto c = field.at(a, b);
  auto ll = field.at(a - 1, b - 1);
  auto lw = field.at(a, b - 1);
  auto lr = field.at(a + 1, b - 1);
  auto rt = field.at(a + 1, b);
  auto ur = field.at(a + 1, b + 1);
  auto up = field.at(a, b + 1);
  auto ul = field.at(a - 1, b + 1);
  auto lf = field.at(a - 1, b);
  if (!(c && ll && lw && lr && rt && ur && up && ul && lf)) return std::nullopt;
  return NeighborVector{*c, *ll, *lw, *lr, *rt, *ur, *up, *ul, *lf};
}

namespace {

// Accumulates a linear segment's distance/time into the cells it crosses.
// The segment is cut at every cell boundary; each piece is assigned by its
// midpoint, which respects the half-open cell intervals.
void accumulate_segment(const GridSpec& spec, const TrajectoryPoint& p0,
                        const TrajectoryPoint& p1, std::vector<EdieCell>& cells,
                        std::vector<double>& breaks) {
  const double t1 = p0.time_s, t2 = p1.time_s;
  const double x1 = p0.position_m, x2 = p1.position_m;
  const double dt = t2 - t1;
  const double dx = x2 - x1;  // >= 0, validated upstream

  // Clip the parameter interval [0,1] to the grid bounding box.
  double s_lo = 0.0, s_hi = 1.0;
  {
    // time is strictly increasing along the segment
    s_lo = std::max(s_lo, (spec.t0_s - t1) / dt);
    s_hi = std::min(s_hi, (spec.t_end_s() - t1) / dt);
    if (dx > 0.0) {
      s_lo = std::max(s_lo, (spec.x0_m - x1) / dx);
      s_hi = std::min(s_hi, (spec.x_end_m() - x1) / dx);
    } else if (x1 < spec.x0_m || x1 >= spec.x_end_m()) {
      return;  // stationary outside the box
    }
  }
  if (!(s_lo < s_hi)) return;

  breaks.clear();
  breaks.push_back(s_lo);
  breaks.push_back(s_hi);

  auto add_crossings = [&](double origin, double step, double v1, double dv) {
    if (dv <= 0.0) return;
    int k_lo = static_cast<int>(std::ceil((v1 + s_lo * dv - origin) / step));
    int k_hi = static_cast<int>(std::floor((v1 + s_hi * dv - origin) / step));
    for (int k = k_lo; k <= k_hi; ++k) {
      double s = (origin + k * step - v1) / dv;
      if (s > s_lo && s < s_hi) breaks.push_back(s);
    }
  };
  add_crossings(spec.t0_s, spec.dt_s, t1, dt);
  add_crossings(spec.x0_m, spec.dx_m, x1, dx);

  std::sort(breaks.begin(), breaks.end());

  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double sa = breaks[i], sb = breaks[i + 1];
    double span = sb - sa;
    if (span <= 0.0) continue;
    double sm = 0.5 * (sa + sb);
    double tm = t1 + sm * dt;
    double xm = x1 + sm * dx;
    int a = static_cast<int>(std::floor((tm - spec.t0_s) / spec.dt_s));
    int b = static_cast<int>(std::floor((xm - spec.x0_m) / spec.dx_m));
    if (a < 0 || a >= spec.nt || b < 0 || b >= spec.nx) continue;
    EdieCell& cell = cells[static_cast<std::size_t>(a) * spec.nx + b];
    cell.time_s += span * dt;
    cell.distance_m += span * dx;
  }
}

}  // namespace

std::vector<EdieCell> build_edie_grid(std::span<const Trajectory> trajectories,
                                      const GridSpec& spec, int lane) {
  validate_spec(spec);
  std::vector<EdieCell> cells(static_cast<std::size_t>(spec.nt) * spec.nx);
  std::vector<double> breaks;
  for (const Trajectory& traj : trajectories) {
    if (traj.lane != lane) continue;
    validate_trajectory(traj);
    for (std::size_t i = 0; i + 1 < traj.points.size(); ++i) {
      accumulate_segment(spec, traj.points[i], traj.points[i + 1], cells, breaks);
    }
  }
  return cells;
}

SpeedField build_speed_field(std::span<const Trajectory> trajectories,
                             const GridSpec& spec, int lane) {
  std::vector<EdieCell> cells = build_edie_grid(trajectories, spec, lane);
  SpeedField field(spec, lane);
  for (int a = 0; a < spec.nt; ++a) {
    for (int b = 0; b < spec.nx; ++b) {
      const EdieCell& cell = cells[static_cast<std::size_t>(a) * spec.nx + b];
      if (cell.time_s < kMinCellTimeS) continue;
      field.set(a, b, cell.distance_m / cell.time_s * kMpsToKmh);
    }
  }
  return field;
}

void write_field(const SpeedField& field, std::ostream& out) {
  const GridSpec& spec = field.spec();
  out << "#tsfield,v1,t0=" << format_double(spec.t0_s) << ",x0=" << format_double(spec.x0_m)
      << ",dt=" << format_double(spec.dt_s) << ",dx=" << format_double(spec.dx_m)
      << ",nt=" << spec.nt << ",nx=" << spec.nx << ",lane=" << field.lane() << "\n";
  char buf[32];
  for (int b = spec.nx - 1; b >= 0; --b) {
    for (int a = 0; a < spec.nt; ++a) {
      if (a > 0) out << ',';
      auto v = field.at(a, b);
      if (v) {
        std::snprintf(buf, sizeof(buf), "%.3f", *v);
        out << buf;
      } else {
        out << "NA";
      }
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing speed field");
}

SpeedField read_field(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("speed field: empty input");
  std::vector<std::string> parts;
  {
    std::stringstream ss(header);
    std::string tok;
    while (std::getline(ss, tok, ',')) parts.push_back(tok);
  }
  if (parts.size() != 9 || parts[0] != "#tsfield" || parts[1] != "v1") {
    throw DataError("speed field: bad header '" + header + "'");
  }
  GridSpec spec;
  int lane = 0;
  auto expect = [&](int idx, const std::string& key) -> std::string {
    const std::string& p = parts[idx];
    if (p.rfind(key + "=", 0) != 0) {
      throw DataError("speed field: expected '" + key + "=' in header field " +
                      std::to_string(idx) + ", got '" + p + "'");
    }
    return p.substr(key.size() + 1);
  };
  spec.t0_s = parse_double(expect(2, "t0"), "speed field t0");
  spec.x0_m = parse_double(expect(3, "x0"), "speed field x0");
  spec.dt_s = parse_double(expect(4, "dt"), "speed field dt");
  spec.dx_m = parse_double(expect(5, "dx"), "speed field dx");
  spec.nt = static_cast<int>(parse_double(expect(6, "nt"), "speed field nt"));
  spec.nx = static_cast<int>(parse_double(expect(7, "nx"), "speed field nx"));
  lane = static_cast<int>(parse_double(expect(8, "lane"), "speed field lane"));
  validate_spec(spec);

  SpeedField field(spec, lane);
  for (int row = 0; row < spec.nx; ++row) {
    std::string line;
    if (!std::getline(in, line)) {
      throw DataError("speed field: expected " + std::to_string(spec.nx) +
                      " data rows, got " + std::to_string(row));
    }
    int b = spec.nx - 1 - row;
    std::stringstream ss(line);
    std::string tok;
    int a = 0;
    while (std::getline(ss, tok, ',')) {
      if (a >= spec.nt) throw DataError("speed field: row " + std::to_string(row) + " too long");
      if (tok != "NA") {
        double v = parse_double(tok, "speed field cell");
        if (!std::isfinite(v) || v < 0.0 || v > 1000.0) {
          throw DataError("speed field: cell value out of range: " + tok);
        }
        field.set(a, b, v);
      }
      ++a;
    }
    if (a != spec.nt) {
      throw DataError("speed field: row " + std::to_string(row) + " has " + std::to_string(a) +
                      " values, expected " + std::to_string(spec.nt));
    }
  }
  return field;
}

void write_field_file(const SpeedField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_field(field, out);
}

SpeedField read_field_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  try {
    return read_field(in);
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace tsr
