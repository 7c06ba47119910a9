#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tsr/grid.hpp"

namespace tsr {

enum class TimeUnit { seconds, deciseconds, milliseconds_epoch };
enum class PositionUnit { meters, feet };
enum class PositionDirection { increasing, decreasing };

// Column references accept a header name or a 0-based column index in digits.
struct IngestSchema {
  std::string vehicle_column = "vehicle_id";
  std::string time_column = "time_s";
  std::string position_column = "position_m";
  std::string lane_column = "lane";
  TimeUnit time_unit = TimeUnit::seconds;
  PositionUnit position_unit = PositionUnit::meters;
  PositionDirection position_direction = PositionDirection::increasing;

  static IngestSchema canonical();
  // Vehicle_ID, Frame_ID (0.1 s), Local_Y (feet), Lane_ID.
  static IngestSchema ngsim();
};

struct ParseResult {
  std::vector<Trajectory> trajectories;
  std::int64_t dropped_short_runs = 0;       // runs with < 2 points
  std::int64_t duplicate_timestamps = 0;     // dropped, first kept
};

// Normalizes to seconds (relative to the file minimum) and meters increasing
// in the travel direction. A vehicle's points are split into one run per
// contiguous lane stint. Output is sorted by (vehicle_id, run start time).
ParseResult parse_trajectories(std::istream& in, const IngestSchema& schema);
ParseResult parse_trajectories_file(const std::string& path, const IngestSchema& schema);

// Canonical CSV (vehicle_id,lane,time_s,position_m), 6 decimals, rows sorted
// by (vehicle_id, time). Returns bytes written.
std::int64_t export_trajectories(std::span<const Trajectory> trajectories, std::ostream& out);
std::int64_t export_trajectories_file(std::span<const Trajectory> trajectories,
                                      const std::string& path);

}  // namespace tsr
