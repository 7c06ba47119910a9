#pragma once

#include <cstdint>
#include <vector>

#include "tsr/grid.hpp"

namespace tsr {

// Synthetic stop-and-go scenario on a single lane. The lead vehicle carries a
// periodic stop-go speed profile; followers obey Newell car-following, so
// disturbances propagate backward at exactly wave_speed_kmh.
struct WaveScenario {
  double segment_length_m = 2000.0;
  double duration_s = 3600.0;
  double free_speed_kmh = 80.0;
  double jam_spacing_m = 7.5;       // per vehicle
  double wave_speed_kmh = -15.0;    // negative, backward
  double inflow_headway_s = 2.2;    // vehicle entry spacing
  double stopgo_period_s = 300.0;
  double stopgo_duty = 0.25;        // fraction of the period spent stopped
  std::uint64_t seed = 42;
  int lane = 1;
};

// Throws ConfigError when outside the supported ranges
// (wave speed in [-25,-5] km/h, period in [60,900] s, duty in [0,1),
// positive speeds/lengths, jam spacing < segment length).
void validate_scenario(const WaveScenario& scenario);

// Deterministic for a fixed scenario; the seed only jitters entry times.
// Output is sampled at 0.5 s and clipped to positions within the segment.
std::vector<Trajectory> generate(const WaveScenario& scenario);

}  // namespace tsr
