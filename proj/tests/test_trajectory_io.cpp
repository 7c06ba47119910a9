#include "tsr/trajectory_io.hpp"

#include <sstream>

#include "doctest.h"
#include "tsr/error.hpp"

using namespace tsr;

TEST_CASE("ngsim preset converts feet and deciseconds exactly") {
  std::string csv =
      "Vehicle_ID,Frame_ID,Local_Y,Lane_ID\n"
      "7,10,100,1\n"
      "7,20,200,1\n";
  std::istringstream in(csv);
  ParseResult parsed = parse_trajectories(in, IngestSchema::ngsim());
  REQUIRE(parsed.trajectories.size() == 1);
  const Trajectory& traj = parsed.trajectories[0];
  CHECK(traj.vehicle_id == "7");
  CHECK(traj.lane == 1);
  REQUIRE(traj.points.size() == 2);
  // Times relative to the file minimum; 1 ft = 0.3048 m exactly.
  CHECK(traj.points[0].time_s == 0.0);
  CHECK(traj.points[1].time_s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(traj.points[0].position_m == 100 * 0.3048);
  CHECK(traj.points[1].position_m == 200 * 0.3048);
}

TEST_CASE("shuffled rows parse identically to sorted rows") {
  std::string sorted_csv =
      "vehicle_id,lane,time_s,position_m\n"
      "a,1,0.0,0.0\n"
      "a,1,1.0,10.0\n"
      "a,1,2.0,20.0\n"
      "b,1,0.5,5.0\n"
      "b,1,1.5,15.0\n";
  std::string shuffled_csv =
      "vehicle_id,lane,time_s,position_m\n"
      "b,1,1.5,15.0\n"
      "a,1,2.0,20.0\n"
      "a,1,0.0,0.0\n"
      "b,1,0.5,5.0\n"
      "a,1,1.0,10.0\n";
  std::istringstream in1(sorted_csv), in2(shuffled_csv);
  ParseResult r1 = parse_trajectories(in1, IngestSchema::canonical());
  ParseResult r2 = parse_trajectories(in2, IngestSchema::canonical());
  REQUIRE(r1.trajectories.size() == r2.trajectories.size());
  for (std::size_t i = 0; i < r1.trajectories.size(); ++i) {
    CHECK(r1.trajectories[i].vehicle_id == r2.trajectories[i].vehicle_id);
    REQUIRE(r1.trajectories[i].points.size() == r2.trajectories[i].points.size());
    for (std::size_t k = 0; k < r1.trajectories[i].points.size(); ++k) {
      CHECK(r1.trajectories[i].points[k].time_s == r2.trajectories[i].points[k].time_s);
      CHECK(r1.trajectories[i].points[k].position_m == r2.trajectories[i].points[k].position_m);
    }
  }
}

TEST_CASE("export then parse recovers point values") {
  std::vector<Trajectory> trajs;
  for (int v = 0; v < 3; ++v) {
    Trajectory t;
    t.vehicle_id = "veh" + std::to_string(v);
    t.lane = 1;
    for (int i = 0; i < 5; ++i) {
      t.points.push_back({i * 0.5 + v * 0.1, i * 7.25 + v});
    }
    trajs.push_back(t);
  }
  std::stringstream buffer;
  export_trajectories(trajs, buffer);
  ParseResult parsed = parse_trajectories(buffer, IngestSchema::canonical());
  REQUIRE(parsed.trajectories.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const Trajectory& a = trajs[i];
    const Trajectory& b = parsed.trajectories[i];
    CHECK(a.vehicle_id == b.vehicle_id);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) {
      // The smallest original time is 0.0 (first vehicle), so no shift here.
      CHECK(std::abs(b.points[k].time_s - a.points[k].time_s) <= 1e-6);
      CHECK(std::abs(b.points[k].position_m - a.points[k].position_m) <= 1e-6);
    }
  }
}

TEST_CASE("export is canonical: export of parse of export equals export") {
  std::vector<Trajectory> trajs;
  Trajectory t;
  t.vehicle_id = "x";
  t.lane = 3;
  t.points = {{0.0, 0.0}, {1.0, 3.333333}, {2.5, 9.1}};
  trajs.push_back(t);

  std::stringstream first;
  export_trajectories(trajs, first);
  std::stringstream first_copy(first.str());
  ParseResult parsed = parse_trajectories(first_copy, IngestSchema::canonical());
  std::stringstream second;
  export_trajectories(parsed.trajectories, second);
  CHECK(first.str() == second.str());
}

TEST_CASE("export reports bytes written and handles empty input") {
  std::stringstream out;
  std::int64_t bytes = export_trajectories({}, out);
  CHECK(out.str() == "vehicle_id,lane,time_s,position_m\n");
  CHECK(bytes == static_cast<std::int64_t>(out.str().size()));
}

TEST_CASE("single-point vehicles are dropped with a warning count") {
  std::string csv =
      "vehicle_id,lane,time_s,position_m\n"
      "lonely,1,0.0,0.0\n"
      "pair,1,0.0,0.0\n"
      "pair,1,1.0,5.0\n";
  std::istringstream in(csv);
  ParseResult parsed = parse_trajectories(in, IngestSchema::canonical());
  CHECK(parsed.trajectories.size() == 1);
  CHECK(parsed.trajectories[0].vehicle_id == "pair");
  CHECK(parsed.dropped_short_runs == 1);
}

TEST_CASE("duplicate timestamps keep the first sample") {
  std::string csv =
      "vehicle_id,lane,time_s,position_m\n"
      "a,1,0.0,0.0\n"
      "a,1,1.0,10.0\n"
      "a,1,1.0,11.0\n"
      "a,1,2.0,20.0\n";
  std::istringstream in(csv);
  ParseResult parsed = parse_trajectories(in, IngestSchema::canonical());
  REQUIRE(parsed.trajectories.size() == 1);
  CHECK(parsed.trajectories[0].points.size() == 3);
  CHECK(parsed.trajectories[0].points[1].position_m == 10.0);
  CHECK(parsed.duplicate_timestamps == 1);
}

TEST_CASE("lane changes split a vehicle into separate runs") {
  std::string csv =
      "vehicle_id,lane,time_s,position_m\n"
      "a,1,0.0,0.0\n"
      "a,1,1.0,10.0\n"
      "a,2,2.0,20.0\n"
      "a,2,3.0,30.0\n"
      "a,1,4.0,40.0\n"
      "a,1,5.0,50.0\n";
  std::istringstream in(csv);
  ParseResult parsed = parse_trajectories(in, IngestSchema::canonical());
  REQUIRE(parsed.trajectories.size() == 3);
  CHECK(parsed.trajectories[0].lane == 1);
  CHECK(parsed.trajectories[1].lane == 2);
  CHECK(parsed.trajectories[2].lane == 1);
  CHECK(parsed.trajectories[0].points.front().time_s == 0.0);
  CHECK(parsed.trajectories[2].points.front().time_s == 4.0);
}

TEST_CASE("decreasing positions are negated and shifted to start at zero") {
  std::string csv =
      "vehicle_id,lane,time_s,position_m\n"
      "a,1,0.0,500.0\n"
      "a,1,1.0,490.0\n"
      "a,1,2.0,475.0\n";
  std::istringstream in(csv);
  IngestSchema schema = IngestSchema::canonical();
  schema.position_direction = PositionDirection::decreasing;
  ParseResult parsed = parse_trajectories(in, schema);
  REQUIRE(parsed.trajectories.size() == 1);
  const auto& pts = parsed.trajectories[0].points;
  CHECK(pts[0].position_m == 0.0);
  CHECK(pts[1].position_m == 10.0);
  CHECK(pts[2].position_m == 25.0);
}

TEST_CASE("unknown columns produce a schema error listing headers") {
  std::string csv = "id,t,x,l\n1,0,0,1\n";
  std::istringstream in(csv);
  CHECK_THROWS_WITH_AS(parse_trajectories(in, IngestSchema::canonical()),
                       doctest::Contains("available headers: id, t, x, l"), SchemaError);
}

TEST_CASE("column references can be indices") {
  std::string csv = "id,t,x,l\n7,0,0,1\n7,1,5,1\n";
  std::istringstream in(csv);
  IngestSchema schema;
  schema.vehicle_column = "0";
  schema.time_column = "1";
  schema.position_column = "2";
  schema.lane_column = "3";
  ParseResult parsed = parse_trajectories(in, schema);
  REQUIRE(parsed.trajectories.size() == 1);
  CHECK(parsed.trajectories[0].vehicle_id == "7");
}

TEST_CASE("non-numeric fields report the line number") {
  std::string csv =
      "vehicle_id,lane,time_s,position_m\n"
      "a,1,0.0,0.0\n"
      "a,1,oops,10.0\n";
  std::istringstream in(csv);
  CHECK_THROWS_WITH_AS(parse_trajectories(in, IngestSchema::canonical()),
                       doctest::Contains("line 3"), DataError);
}
