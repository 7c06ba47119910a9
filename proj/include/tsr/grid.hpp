#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsr/error.hpp"

namespace tsr {

constexpr double kMpsToKmh = 3.6;
// Hard cap on plausible vehicle speed; point pairs implying more are data errors.
constexpr double kMaxSpeedMps = 70.0;
constexpr double kMaxSpeedKmh = kMaxSpeedMps * kMpsToKmh;  // 252 km/h
// Cells whose accumulated occupancy time falls below this are left empty.
constexpr double kMinCellTimeS = 1e-6;

struct TrajectoryPoint {
  double time_s = 0.0;
  double position_m = 0.0;
};

struct Trajectory {
  std::string vehicle_id;
  int lane = 1;
  std::vector<TrajectoryPoint> points;
};

// Throws DataError (naming the vehicle) unless time is strictly increasing and
// consecutive position deltas imply a speed in [0, kMaxSpeedMps].
void validate_trajectory(const Trajectory& trajectory);

struct GridSpec {
  double t0_s = 0.0;
  double x0_m = 0.0;
  double dt_s = 0.0;   // cell duration
  double dx_m = 0.0;   // cell length
  int nt = 0;          // time cell count
  int nx = 0;          // space cell count

  double t_end_s() const { return t0_s + dt_s * nt; }
  double x_end_m() const { return x0_m + dx_m * nx; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

std::string to_string(const GridSpec& spec);

// Throws ConfigError on non-positive cell sizes or counts.
void validate_spec(const GridSpec& spec);

// Subcells are half the parent cell in each dimension.
GridSpec halve_spec(const GridSpec& spec);

enum class SubcellId : int { LL = 0, LR = 1, UR = 2, UL = 3 };

constexpr std::array<SubcellId, 4> kSubcells{SubcellId::LL, SubcellId::LR,
                                             SubcellId::UR, SubcellId::UL};

const char* to_string(SubcellId id);
std::optional<SubcellId> subcell_from_string(const std::string& name);

// Fine-grid index offsets of subcell j within coarse cell (a, b):
// fine cell = (2a + dt_off, 2b + dx_off).
struct SubcellOffset {
  int dt = 0;
  int dx = 0;
};
constexpr SubcellOffset subcell_offset(SubcellId id) {
  switch (id) {
    case SubcellId::LL: return {0, 0};
    case SubcellId::LR: return {1, 0};
    case SubcellId::UR: return {1, 1};
    case SubcellId::UL: return {0, 1};
  }
  return {0, 0};
}

enum class Regime : int { ff = 0, cg = 1 };

const char* to_string(Regime regime);
std::optional<Regime> regime_from_string(const std::string& name);

// Congested strictly below the threshold; exactly at the threshold is free flow.
Regime classify_regime(double center_kmh, double threshold_kmh);

// Per-cell mean speed over a time-space grid. Cells with no observed vehicle
// are absent; zero is a meaningful (jammed) speed and is never used for them.
class SpeedField {
 public:
  SpeedField(GridSpec spec, int lane);

  const GridSpec& spec() const { return spec_; }
  int lane() const { return lane_; }

  bool present(int a, int b) const;
  std::optional<double> at(int a, int b) const;
  // value must be finite and >= 0.
  void set(int a, int b, double speed_kmh);
  void clear(int a, int b);

  std::int64_t present_count() const;

 private:
  std::size_t index(int a, int b) const;
  void check_range(int a, int b) const;

  GridSpec spec_;
  int lane_;
  std::vector<double> cells_;  // NaN marks absent
};

// The nine predictor speeds for one refinable cell: itself plus the eight
// surrounding cells. On the (time=a, space=b) index grid:
//   Lf=(a-1,b) Rt=(a+1,b) Lw=(a,b-1) Up=(a,b+1)
//   LL=(a-1,b-1) LR=(a+1,b-1) UL=(a-1,b+1) UR=(a+1,b+1)
struct NeighborVector {
  double center = 0.0;
  double ll = 0.0, lw = 0.0, lr = 0.0, rt = 0.0;
  double ur = 0.0, up = 0.0, ul = 0.0, lf = 0.0;

  // Order matches the model coefficient layout: C, LL, Lw, LR, Rt, UR, Up, UL, Lf.
  std::array<double, 9> as_array() const {
    return {center, ll, lw, lr, rt, ur, up, ul, lf};
  }
};

// Returns the vector only when all nine cells are present; (a, b) must be
// interior (1 <= a <= nt-2, 1 <= b <= nx-2), else UsageError.
std::optional<NeighborVector> neighbor_vector(const SpeedField& field, int a, int b);

// Edie accumulators for one cell: total distance traveled and time spent
// inside the cell by all trajectories.
struct EdieCell {
  double distance_m = 0.0;
  double time_s = 0.0;
};

// Clips every trajectory segment to cell boundaries by linear interpolation
// and accumulates per-cell distance/time. Row-major nt*nx result.
std::vector<EdieCell> build_edie_grid(std::span<const Trajectory> trajectories,
                                      const GridSpec& spec, int lane);

// Cell speed = total distance / total time (km/h); cells below the occupancy
// floor stay absent.
SpeedField build_speed_field(std::span<const Trajectory> trajectories,
                             const GridSpec& spec, int lane);

// SpeedField CSV: one header line then nx rows in descending space order
// (so the text layout matches a rendered diagram), nt values per row,
// "NA" for absent, 3 decimal places.
void write_field(const SpeedField& field, std::ostream& out);
SpeedField read_field(std::istream& in);
void write_field_file(const SpeedField& field, const std::string& path);
SpeedField read_field_file(const std::string& path);

}  // namespace tsr
