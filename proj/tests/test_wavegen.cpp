#include "tsr/wavegen.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "support/oracles.hpp"
#include "tsr/error.hpp"
#include "tsr/trajectory_io.hpp"

using namespace tsr;

namespace {

std::string to_csv(const std::vector<Trajectory>& trajs) {
  std::stringstream ss;
  export_trajectories(trajs, ss);
  return ss.str();
}

}  // namespace

TEST_CASE("zero duty produces pure free flow") {
  WaveScenario scenario;
  scenario.stopgo_duty = 0.0;
  scenario.duration_s = 900.0;
  std::vector<Trajectory> trajs = generate(scenario);
  REQUIRE(!trajs.empty());

  GridSpec spec{0, 0, 60, 100, 15, 20};
  SpeedField field = build_speed_field(trajs, spec, scenario.lane);
  REQUIRE(field.present_count() > 0);
  for (int a = 0; a < spec.nt; ++a) {
    for (int b = 0; b < spec.nx; ++b) {
      if (field.present(a, b)) {
        CHECK(std::abs(*field.at(a, b) - scenario.free_speed_kmh) <= 0.1);
      }
    }
  }
}

TEST_CASE("same seed reproduces byte-identical output") {
  WaveScenario scenario;
  scenario.duration_s = 600.0;
  std::string first = to_csv(generate(scenario));
  std::string second = to_csv(generate(scenario));
  CHECK(first == second);
  CHECK(!first.empty());
}

TEST_CASE("different seeds keep the leader and change only follower entries") {
  WaveScenario a;
  a.duration_s = 300.0;
  WaveScenario b = a;
  b.seed = a.seed + 1;
  auto ta = generate(a);
  auto tb = generate(b);
  REQUIRE(!ta.empty());
  REQUIRE(ta.size() == tb.size());
  // Lead vehicle has no jitter.
  CHECK(ta[0].points.size() == tb[0].points.size());
  for (std::size_t i = 0; i < ta[0].points.size(); ++i) {
    CHECK(ta[0].points[i].position_m == tb[0].points[i].position_m);
  }
  CHECK(to_csv(ta) != to_csv(tb));
}

TEST_CASE("vehicles never collide and never reverse") {
  WaveScenario scenario;
  scenario.duration_s = 1200.0;
  std::vector<Trajectory> trajs = generate(scenario);
  REQUIRE(trajs.size() > 10);

  // Positions sampled on the 0.5 s grid; key by 2*t which is exact.
  std::map<std::string, std::map<long, double>> by_vehicle;
  for (const Trajectory& traj : trajs) {
    double prev = -1;
    for (const TrajectoryPoint& p : traj.points) {
      CHECK(p.position_m >= prev);
      prev = p.position_m;
      by_vehicle[traj.vehicle_id][std::lround(p.time_s * 2)] = p.position_m;
    }
  }
  // Vehicle ids sort in entry order (v00000, v00001, ...).
  for (auto it = by_vehicle.begin(); std::next(it) != by_vehicle.end(); ++it) {
    const auto& leader = it->second;
    const auto& follower = std::next(it)->second;
    for (const auto& [t, x_follow] : follower) {
      auto lead = leader.find(t);
      if (lead == leader.end()) continue;
      CHECK(x_follow < lead->second - 0.5 * scenario.jam_spacing_m);
    }
  }
}

TEST_CASE("congestion fronts propagate backward at the configured wave speed") {
  WaveScenario scenario;  // 2 km, 80 km/h, wave -15, period 300 s
  scenario.duration_s = 3600.0;
  std::vector<Trajectory> trajs = generate(scenario);

  GridSpec spec{0, 0, 2, 100, 1800, 20};
  SpeedField field = build_speed_field(trajs, spec, scenario.lane);
  auto wave = testing::estimate_wave_speed_kmh(field);
  REQUIRE(wave.has_value());
  CHECK(*wave < 0.0);
  CHECK(std::abs(*wave - scenario.wave_speed_kmh) <= 3.0);
}

TEST_CASE("infeasible or out-of-range scenarios are rejected") {
  WaveScenario s;
  s.jam_spacing_m = 5000.0;  // larger than the segment
  CHECK_THROWS_AS(generate(s), ConfigError);

  s = WaveScenario{};
  s.wave_speed_kmh = -40.0;
  CHECK_THROWS_AS(generate(s), ConfigError);

  s = WaveScenario{};
  s.wave_speed_kmh = +10.0;
  CHECK_THROWS_AS(generate(s), ConfigError);

  s = WaveScenario{};
  s.stopgo_period_s = 10.0;
  CHECK_THROWS_AS(generate(s), ConfigError);

  s = WaveScenario{};
  s.stopgo_duty = 1.0;
  CHECK_THROWS_AS(generate(s), ConfigError);

  s = WaveScenario{};
  s.free_speed_kmh = 0.0;
  CHECK_THROWS_AS(generate(s), ConfigError);
}

TEST_CASE("generated trajectories satisfy the speed cap") {
  WaveScenario scenario;
  scenario.duration_s = 600.0;
  for (const Trajectory& traj : generate(scenario)) {
    CHECK_NOTHROW(validate_trajectory(traj));
  }
}
