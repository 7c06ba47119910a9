#include "tsr/trajectory_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "tsr/error.hpp"

namespace tsr {

namespace {

constexpr double kFeetToMeters = 0.3048;  // exact

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

int resolve_column(const std::string& ref, const std::vector<std::string>& headers) {
  for (std::size_t i = 0; i < headers.size(); ++i) {
    if (headers[i] == ref) return static_cast<int>(i);
  }
  bool digits = !ref.empty() && std::all_of(ref.begin(), ref.end(),
                                            [](unsigned char c) { return std::isdigit(c); });
  if (digits) {
    int idx = std::stoi(ref);
    if (idx >= 0 && idx < static_cast<int>(headers.size())) return idx;
  }
  std::string available;
  for (std::size_t i = 0; i < headers.size(); ++i) {
    if (i) available += ", ";
    available += headers[i];
  }
  throw SchemaError("column '" + ref + "' not found; available headers: " + available);
}

double parse_number(const std::string& token, int line_no, const std::string& column) {
  std::string t = trim(token);
  try {
    std::size_t pos = 0;
    double v = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": non-numeric " + column +
                    " field '" + token + "'");
  }
}

struct RawRow {
  double time;
  double position;
  int lane;
  std::int64_t order;  // file order, stabilizes sorting
};

}  // namespace

IngestSchema IngestSchema::canonical() { return IngestSchema{}; }

IngestSchema IngestSchema::ngsim() {
  IngestSchema s;
  s.vehicle_column = "Vehicle_ID";
  s.time_column = "Frame_ID";
  s.position_column = "Local_Y";
  s.lane_column = "Lane_ID";
  s.time_unit = TimeUnit::deciseconds;
  s.position_unit = PositionUnit::feet;
  s.position_direction = PositionDirection::increasing;
  return s;
}

ParseResult parse_trajectories(std::istream& in, const IngestSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("trajectory csv: empty input");
  std::vector<std::string> headers = split_csv(line);
  for (auto& h : headers) h = trim(h);

  int vehicle_col = resolve_column(schema.vehicle_column, headers);
  int time_col = resolve_column(schema.time_column, headers);
  int position_col = resolve_column(schema.position_column, headers);
  int lane_col = resolve_column(schema.lane_column, headers);

  std::map<std::string, std::vector<RawRow>> by_vehicle;
  int line_no = 1;
  std::int64_t order = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv(line);
    int needed = std::max({vehicle_col, time_col, position_col, lane_col});
    if (static_cast<int>(fields.size()) <= needed) {
      throw DataError("line " + std::to_string(line_no) + ": expected at least " +
                      std::to_string(needed + 1) + " fields, got " +
                      std::to_string(fields.size()));
    }
    RawRow row;
    row.time = parse_number(fields[time_col], line_no, "time");
    row.position = parse_number(fields[position_col], line_no, "position");
    row.lane = static_cast<int>(parse_number(fields[lane_col], line_no, "lane"));
    row.order = order++;
    by_vehicle[trim(fields[vehicle_col])].push_back(row);
  }

  // Unit normalization.
  double time_factor = 1.0;
  switch (schema.time_unit) {
    case TimeUnit::seconds: time_factor = 1.0; break;
    case TimeUnit::deciseconds: time_factor = 0.1; break;
    case TimeUnit::milliseconds_epoch: time_factor = 1e-3; break;
  }
  double pos_factor = schema.position_unit == PositionUnit::feet ? kFeetToMeters : 1.0;

  double min_time = std::numeric_limits<double>::infinity();
  double min_pos = std::numeric_limits<double>::infinity();
  double max_pos = -std::numeric_limits<double>::infinity();
  for (auto& [id, rows] : by_vehicle) {
    for (auto& r : rows) {
      r.time *= time_factor;
      r.position *= pos_factor;
      min_time = std::min(min_time, r.time);
      min_pos = std::min(min_pos, r.position);
      max_pos = std::max(max_pos, r.position);
    }
  }

  ParseResult result;
  for (auto& [id, rows] : by_vehicle) {
    std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
      if (a.time != b.time) return a.time < b.time;
      return a.order < b.order;
    });
    // Duplicate timestamps: keep the first occurrence.
    std::vector<RawRow> unique_rows;
    unique_rows.reserve(rows.size());
    for (const RawRow& r : rows) {
      if (!unique_rows.empty() && r.time == unique_rows.back().time) {
        ++result.duplicate_timestamps;
        continue;
      }
      unique_rows.push_back(r);
    }
    // One run per contiguous lane stint.
    std::size_t start = 0;
    while (start < unique_rows.size()) {
      std::size_t end = start + 1;
      while (end < unique_rows.size() && unique_rows[end].lane == unique_rows[start].lane) ++end;
      if (end - start < 2) {
        ++result.dropped_short_runs;
        start = end;
        continue;
      }
      Trajectory traj;
      traj.vehicle_id = id;
      traj.lane = unique_rows[start].lane;
      traj.points.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        double pos = unique_rows[i].position;
        if (schema.position_direction == PositionDirection::decreasing) {
          pos = max_pos - pos;  // negate and shift so the minimum maps to 0
        }
        traj.points.push_back(TrajectoryPoint{unique_rows[i].time - min_time, pos});
      }
      result.trajectories.push_back(std::move(traj));
      start = end;
    }
  }
  return result;
}

ParseResult parse_trajectories_file(const std::string& path, const IngestSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  return parse_trajectories(in, schema);
}

std::int64_t export_trajectories(std::span<const Trajectory> trajectories, std::ostream& out) {
  std::vector<const Trajectory*> sorted;
  sorted.reserve(trajectories.size());
  for (const Trajectory& t : trajectories) sorted.push_back(&t);
  std::stable_sort(sorted.begin(), sorted.end(), [](const Trajectory* a, const Trajectory* b) {
    if (a->vehicle_id != b->vehicle_id) return a->vehicle_id < b->vehicle_id;
    double ta = a->points.empty() ? 0.0 : a->points.front().time_s;
    double tb = b->points.empty() ? 0.0 : b->points.front().time_s;
    return ta < tb;
  });

  std::int64_t bytes = 0;
  auto emit = [&](const std::string& s) {
    out << s;
    bytes += static_cast<std::int64_t>(s.size());
  };
  emit("vehicle_id,lane,time_s,position_m\n");
  char buf[96];
  for (const Trajectory* traj : sorted) {
    for (const TrajectoryPoint& p : traj->points) {
      int n = std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f\n", traj->vehicle_id.c_str(),
                            traj->lane, p.time_s, p.position_m);
      emit(std::string(buf, n));
    }
  }
  if (!out) throw IoError("failed writing trajectory csv");
  return bytes;
}

std::int64_t export_trajectories_file(std::span<const Trajectory> trajectories,
                                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  return export_trajectories(trajectories, out);
}

}  // namespace tsr
