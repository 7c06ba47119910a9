#include "tsr/wavegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "tsr/error.hpp"

namespace tsr {

namespace {

constexpr double kSimStepS = 0.1;
constexpr double kSampleStepS = 0.5;
constexpr double kRampS = 2.0;  // linear ramp length softening the square wave

// Target speed of the lead vehicle: free speed, with a stop phase at the end
// of each period.
double target_speed(double t, double period, double stop_duration, double free_speed) {
  if (stop_duration <= 0.0) return free_speed;
  double phase = std::fmod(t, period);
  return phase >= period - stop_duration ? 0.0 : free_speed;
}

}  // namespace

void validate_scenario(const WaveScenario& s) {
  if (!(s.segment_length_m > 0.0) || !(s.duration_s > 0.0)) {
    throw ConfigError("scenario requires positive segment length and duration");
  }
  if (!(s.free_speed_kmh > 0.0) || s.free_speed_kmh > kMaxSpeedKmh) {
    throw ConfigError("free speed must be in (0, " + std::to_string(kMaxSpeedKmh) + "] km/h");
  }
  if (s.wave_speed_kmh < -25.0 || s.wave_speed_kmh > -5.0) {
    throw ConfigError("wave speed must be in [-25, -5] km/h, got " +
                      std::to_string(s.wave_speed_kmh));
  }
  if (s.stopgo_period_s < 60.0 || s.stopgo_period_s > 900.0) {
    throw ConfigError("stop-go period must be in [60, 900] s, got " +
                      std::to_string(s.stopgo_period_s));
  }
  if (s.stopgo_duty < 0.0 || s.stopgo_duty >= 1.0) {
    throw ConfigError("stop-go duty must be in [0, 1), got " + std::to_string(s.stopgo_duty));
  }
  if (!(s.jam_spacing_m > 0.0) || s.jam_spacing_m >= s.segment_length_m) {
    throw ConfigError("jam spacing must be positive and smaller than the segment length");
  }
  if (!(s.inflow_headway_s > 0.0)) {
    throw ConfigError("inflow headway must be positive");
  }
}

std::vector<Trajectory> generate(const WaveScenario& scenario) {
  validate_scenario(scenario);

  const double free_speed = scenario.free_speed_kmh / kMpsToKmh;  // m/s
  const double wave_speed = std::abs(scenario.wave_speed_kmh) / kMpsToKmh;
  const double spacing = scenario.jam_spacing_m;
  const double shift_time = spacing / wave_speed;  // Newell time displacement
  const double stop_duration = scenario.stopgo_duty * scenario.stopgo_period_s;
  const double ramp_rate = free_speed / kRampS;

  const int n_steps = static_cast<int>(std::ceil(scenario.duration_s / kSimStepS)) + 1;
  const int n_vehicles =
      static_cast<int>(std::floor(scenario.duration_s / scenario.inflow_headway_s)) + 1;
  const int sample_every = static_cast<int>(std::lround(kSampleStepS / kSimStepS));

  // Entry time jitter; the lead vehicle enters exactly at t = 0.
  std::mt19937_64 rng(scenario.seed);
  std::uniform_real_distribution<double> jitter(0.0, 0.3 * scenario.inflow_headway_s);
  std::vector<double> entry_time(n_vehicles);
  for (int k = 0; k < n_vehicles; ++k) {
    entry_time[k] = k * scenario.inflow_headway_s + (k == 0 ? 0.0 : jitter(rng));
  }

  // Lead vehicle: rate-limited stop-go profile, trapezoidal integration.
  std::vector<double> prev(n_steps), cur(n_steps);
  {
    double v = free_speed;
    double x = 0.0;
    prev[0] = 0.0;
    for (int i = 1; i < n_steps; ++i) {
      double t = i * kSimStepS;
      double tgt = target_speed(t, scenario.stopgo_period_s, stop_duration, free_speed);
      double v_next = std::clamp(tgt, v - ramp_rate * kSimStepS, v + ramp_rate * kSimStepS);
      x += 0.5 * (v + v_next) * kSimStepS;
      v = v_next;
      prev[i] = x;
    }
  }

  // Positions of the predecessor at t - shift_time; before t = 0 the
  // predecessor is extrapolated backward at free speed.
  auto shifted_position = [&](const std::vector<double>& xs, double t) {
    if (t <= 0.0) return xs[0] + free_speed * t;
    double idx = t / kSimStepS;
    int i = static_cast<int>(idx);
    if (i >= n_steps - 1) return xs[n_steps - 1];
    double frac = idx - i;
    return xs[i] + frac * (xs[i + 1] - xs[i]);
  };

  std::vector<Trajectory> out;
  std::vector<TrajectoryPoint> samples;
  char id_buf[32];

  auto collect = [&](const std::vector<double>& xs, int vehicle_index) {
    samples.clear();
    for (int i = 0; i < n_steps; i += sample_every) {
      double x = xs[i];
      if (x < 0.0 || x > scenario.segment_length_m) continue;
      samples.push_back(TrajectoryPoint{i * kSimStepS, x});
    }
    if (samples.size() < 2) return;
    std::snprintf(id_buf, sizeof(id_buf), "v%05d", vehicle_index);
    Trajectory traj;
    traj.vehicle_id = id_buf;
    traj.lane = scenario.lane;
    traj.points.assign(samples.begin(), samples.end());
    out.push_back(std::move(traj));
  };

  collect(prev, 0);
  for (int k = 1; k < n_vehicles; ++k) {
    for (int i = 0; i < n_steps; ++i) {
      double t = i * kSimStepS;
      double free_bound = free_speed * (t - entry_time[k]);
      double lead_bound = shifted_position(prev, t - shift_time) - spacing;
      cur[i] = std::min(free_bound, lead_bound);
    }
    collect(cur, k);
    std::swap(prev, cur);
  }
  return out;
}

}  // namespace tsr
