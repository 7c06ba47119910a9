#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsr/error.hpp"
#include "tsr/evaluator.hpp"
#include "tsr/pipeline.hpp"
#include "tsr/refiner.hpp"
#include "tsr/regression.hpp"
#include "tsr/render.hpp"
#include "tsr/trajectory_io.hpp"
#include "tsr/wavegen.hpp"

namespace {

using namespace tsr;

IngestSchema schema_from_flags(const std::string& preset, const std::string& columns,
                               const std::string& time_unit, const std::string& position_unit,
                               const std::string& direction) {
  IngestSchema schema;
  if (preset == "ngsim") {
    schema = IngestSchema::ngsim();
  } else if (preset == "canonical") {
    schema = IngestSchema::canonical();
  } else {
    throw UsageError("unknown schema preset '" + preset + "' (canonical, ngsim)");
  }
  if (!columns.empty()) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : columns) {
      if (c == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    if (parts.size() != 4) {
      throw UsageError("--columns needs vehicle,time,position,lane (4 names), got '" + columns +
                       "'");
    }
    schema.vehicle_column = parts[0];
    schema.time_column = parts[1];
    schema.position_column = parts[2];
    schema.lane_column = parts[3];
  }
  if (!time_unit.empty()) {
    if (time_unit == "seconds") schema.time_unit = TimeUnit::seconds;
    else if (time_unit == "deciseconds") schema.time_unit = TimeUnit::deciseconds;
    else if (time_unit == "milliseconds-epoch") schema.time_unit = TimeUnit::milliseconds_epoch;
    else throw UsageError("unknown time unit '" + time_unit + "'");
  }
  if (!position_unit.empty()) {
    if (position_unit == "meters") schema.position_unit = PositionUnit::meters;
    else if (position_unit == "feet") schema.position_unit = PositionUnit::feet;
    else throw UsageError("unknown position unit '" + position_unit + "'");
  }
  if (!direction.empty()) {
    if (direction == "increasing") schema.position_direction = PositionDirection::increasing;
    else if (direction == "decreasing") schema.position_direction = PositionDirection::decreasing;
    else throw UsageError("unknown position direction '" + direction + "'");
  }
  return schema;
}

// Model references are file paths or builtin:<dt>x<dx> URIs.
RefinementModel resolve_model(const std::string& ref) {
  if (ref.rfind("builtin:", 0) == 0) {
    std::string size = ref.substr(8);
    std::size_t x = size.find('x');
    if (x == std::string::npos) {
      throw UsageError("builtin model reference must look like builtin:60x100, got '" + ref +
                       "'");
    }
    try {
      double dt = std::stod(size.substr(0, x));
      double dx = std::stod(size.substr(x + 1));
      return builtin_model(dt, dx);
    } catch (const std::invalid_argument&) {
      throw UsageError("cannot parse builtin model size from '" + ref + "'");
    }
  }
  return load_model_file(ref);
}

GridSpec derive_spec(const std::vector<Trajectory>& trajectories, int lane, double dt, double dx,
                     std::optional<double> t0, std::optional<double> x0, std::optional<int> nt,
                     std::optional<int> nx) {
  double t_min = 0, t_max = 0, x_min = 0, x_max = 0;
  bool any = false;
  for (const Trajectory& traj : trajectories) {
    if (traj.lane != lane) continue;
    for (const TrajectoryPoint& p : traj.points) {
      if (!any) {
        t_min = t_max = p.time_s;
        x_min = x_max = p.position_m;
        any = true;
      } else {
        t_min = std::min(t_min, p.time_s);
        t_max = std::max(t_max, p.time_s);
        x_min = std::min(x_min, p.position_m);
        x_max = std::max(x_max, p.position_m);
      }
    }
  }
  if (!any) throw DataError("no trajectory samples on lane " + std::to_string(lane));
  GridSpec spec;
  spec.dt_s = dt;
  spec.dx_m = dx;
  spec.t0_s = t0 ? *t0 : std::floor(t_min / dt) * dt;
  spec.x0_m = x0 ? *x0 : std::floor(x_min / dx) * dx;
  spec.nt = nt ? *nt : std::max(1, static_cast<int>(std::ceil((t_max - spec.t0_s) / dt)));
  spec.nx = nx ? *nx : std::max(1, static_cast<int>(std::ceil((x_max - spec.x0_m) / dx)));
  validate_spec(spec);
  return spec;
}

int run(int argc, char** argv) {
  CLI::App app{"tsrefine: regression-based refinement of time-space traffic speed diagrams"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert a trajectory CSV to canonical form");
  std::string in_path, out_path, preset = "canonical", columns, time_unit, position_unit,
              direction;
  ingest->add_option("--in", in_path, "input CSV")->required();
  ingest->add_option("--out", out_path, "output canonical CSV")->required();
  ingest->add_option("--schema", preset, "schema preset: canonical|ngsim");
  ingest->add_option("--columns", columns, "vehicle,time,position,lane column names");
  ingest->add_option("--time-unit", time_unit, "seconds|deciseconds|milliseconds-epoch");
  ingest->add_option("--position-unit", position_unit, "meters|feet");
  ingest->add_option("--direction", direction, "increasing|decreasing travel positions");
  ingest->callback([&]() {
    IngestSchema schema =
        schema_from_flags(preset, columns, time_unit, position_unit, direction);
    ParseResult parsed = parse_trajectories_file(in_path, schema);
    export_trajectories_file(parsed.trajectories, out_path);
    if (parsed.dropped_short_runs > 0 || parsed.duplicate_timestamps > 0) {
      std::cerr << "warning: dropped " << parsed.dropped_short_runs
                << " short runs, removed " << parsed.duplicate_timestamps
                << " duplicate timestamps\n";
    }
    std::cerr << "wrote " << parsed.trajectories.size() << " trajectories to " << out_path
              << "\n";
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic stop-and-go trajectories");
  WaveScenario scenario;
  synth->add_option("--length", scenario.segment_length_m, "segment length [m]");
  synth->add_option("--duration", scenario.duration_s, "duration [s]");
  synth->add_option("--free-speed", scenario.free_speed_kmh, "free-flow speed [km/h]");
  synth->add_option("--jam-spacing", scenario.jam_spacing_m, "jam spacing [m/veh]");
  synth->add_option("--wave-speed", scenario.wave_speed_kmh, "backward wave speed [km/h]");
  synth->add_option("--headway", scenario.inflow_headway_s, "inflow headway [s]");
  synth->add_option("--period", scenario.stopgo_period_s, "stop-go period [s]");
  synth->add_option("--duty", scenario.stopgo_duty, "fraction of period stopped [0,1)");
  synth->add_option("--seed", scenario.seed, "random seed");
  synth->add_option("--lane", scenario.lane, "lane label");
  std::string synth_out;
  synth->add_option("--out", synth_out, "output canonical CSV")->required();
  synth->callback([&]() {
    std::vector<Trajectory> trajectories = generate(scenario);
    export_trajectories_file(trajectories, synth_out);
    std::cerr << "wrote " << trajectories.size() << " trajectories to " << synth_out << "\n";
  });

  // build
  auto* build = app.add_subcommand("build", "Build a speed field from canonical trajectories");
  std::string build_in, build_out;
  double build_dt = 0, build_dx = 0;
  int build_lane = 1;
  double build_t0 = 0, build_x0 = 0;
  int build_nt = 0, build_nx = 0;
  build->add_option("--in", build_in, "canonical trajectory CSV")->required();
  build->add_option("--out", build_out, "output field file")->required();
  build->add_option("--dt", build_dt, "cell duration [s]")->required();
  build->add_option("--dx", build_dx, "cell length [m]")->required();
  build->add_option("--lane", build_lane, "lane to build");
  auto* opt_t0 = build->add_option("--t0", build_t0, "grid time origin [s]");
  auto* opt_x0 = build->add_option("--x0", build_x0, "grid space origin [m]");
  auto* opt_nt = build->add_option("--nt", build_nt, "time cell count");
  auto* opt_nx = build->add_option("--nx", build_nx, "space cell count");
  build->callback([&]() {
    ParseResult parsed = parse_trajectories_file(build_in, IngestSchema::canonical());
    GridSpec spec = derive_spec(
        parsed.trajectories, build_lane, build_dt, build_dx,
        opt_t0->count() ? std::optional<double>(build_t0) : std::nullopt,
        opt_x0->count() ? std::optional<double>(build_x0) : std::nullopt,
        opt_nt->count() ? std::optional<int>(build_nt) : std::nullopt,
        opt_nx->count() ? std::optional<int>(build_nx) : std::nullopt);
    SpeedField field = build_speed_field(parsed.trajectories, spec, build_lane);
    write_field_file(field, build_out);
    std::cerr << "wrote " << spec.nt << "x" << spec.nx << " field (" << field.present_count()
              << " cells present) to " << build_out << "\n";
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a refinement model");
  std::string fit_coarse, fit_fine, fit_in, fit_out;
  double fit_dt = 0, fit_dx = 0, fit_threshold = 60.0;
  int fit_lane = 1;
  fit->add_option("--coarse", fit_coarse, "coarse field file");
  fit->add_option("--fine", fit_fine, "fine field file (halved grid)");
  fit->add_option("--in", fit_in, "canonical trajectory CSV (alternative to field pair)");
  fit->add_option("--dt", fit_dt, "coarse cell duration [s] (with --in)");
  fit->add_option("--dx", fit_dx, "coarse cell length [m] (with --in)");
  fit->add_option("--lane", fit_lane, "lane (with --in)");
  fit->add_option("--threshold", fit_threshold, "regime speed threshold [km/h]");
  fit->add_option("--out", fit_out, "output model JSON")->required();
  fit->callback([&]() {
    RefinementModel model;
    if (!fit_in.empty()) {
      if (!(fit_dt > 0) || !(fit_dx > 0)) {
        throw UsageError("fit --in requires --dt and --dx");
      }
      ParseResult parsed = parse_trajectories_file(fit_in, IngestSchema::canonical());
      GridSpec spec = derive_spec(parsed.trajectories, fit_lane, fit_dt, fit_dx, std::nullopt,
                                  std::nullopt, std::nullopt, std::nullopt);
      SpeedField coarse = build_speed_field(parsed.trajectories, spec, fit_lane);
      SpeedField fine = build_speed_field(parsed.trajectories, halve_spec(spec), fit_lane);
      model = fit_model(coarse, fine, fit_threshold);
    } else if (!fit_coarse.empty() && !fit_fine.empty()) {
      SpeedField coarse = read_field_file(fit_coarse);
      SpeedField fine = read_field_file(fit_fine);
      model = fit_model(coarse, fine, fit_threshold);
    } else {
      throw UsageError("fit needs either --coarse and --fine, or --in with --dt/--dx");
    }
    save_model_file(model, fit_out);
    std::cerr << "wrote model to " << fit_out << "\n";
  });

  // refine
  auto* refine = app.add_subcommand("refine", "Refine a speed field");
  std::string refine_in, refine_out;
  std::vector<std::string> refine_models;
  int refine_passes = 1;
  refine->add_option("field", refine_in, "input field file")->required();
  refine->add_option("--model", refine_models,
                     "model per pass: file path or builtin:<dt>x<dx>")
      ->required();
  refine->add_option("--passes", refine_passes, "number of passes (1 or 2)")
      ->check(CLI::Range(1, 2));
  refine->add_option("--out", refine_out, "output field file")->required();
  refine->callback([&]() {
    SpeedField field = read_field_file(refine_in);
    std::vector<RefinementModel> models;
    for (const std::string& ref : refine_models) models.push_back(resolve_model(ref));
    std::vector<RefineStats> stats;
    SpeedField fine = refine_iterated(field, models, refine_passes, &stats);
    write_field_file(fine, refine_out);
    for (std::size_t p = 0; p < stats.size(); ++p) {
      std::cerr << "pass " << (p + 1) << ": refined " << stats[p].refined_cells() << " cells ("
                << stats[p].ff_cells << " ff, " << stats[p].cg_cells << " cg), skipped "
                << stats[p].skipped_cells << "\n";
    }
    std::cerr << "wrote " << fine.spec().nt << "x" << fine.spec().nx << " field to "
              << refine_out << "\n";
  });

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a refined field against ground truth");
  std::string eval_est, eval_truth, eval_out, eval_label = "eval";
  eval->add_option("--estimated", eval_est, "estimated field file")->required();
  eval->add_option("--truth", eval_truth, "ground-truth field file")->required();
  eval->add_option("--out", eval_out, "report CSV path (stdout table always printed)");
  eval->add_option("--label", eval_label, "report row label");
  eval->callback([&]() {
    SpeedField estimated = read_field_file(eval_est);
    SpeedField truth = read_field_file(eval_truth);
    if (truth.spec() != estimated.spec()) {
      truth = crop_to(truth, estimated.spec());
    }
    ErrorReport report = evaluate(estimated, truth);
    std::vector<std::pair<std::string, ErrorReport>> reports{{eval_label, report}};
    std::cout << format_report_text(reports);
    if (!eval_out.empty()) {
      std::ofstream out(eval_out, std::ios::binary);
      if (!out) throw IoError("cannot open for writing: " + eval_out);
      out << format_report_csv(reports);
    }
  });

  // render
  auto* render = app.add_subcommand("render", "Render a field to PPM or SVG");
  std::string render_in, render_out;
  int render_block = 8;
  bool render_svg_flag = false;
  render->add_option("field", render_in, "input field file")->required();
  render->add_option("--out", render_out, "output image path")->required();
  render->add_option("--block", render_block, "pixels per cell")->check(CLI::PositiveNumber);
  render->add_flag("--svg", render_svg_flag, "emit SVG instead of PPM");
  render->callback([&]() {
    SpeedField field = read_field_file(render_in);
    std::string bytes =
        render_svg_flag ? render_svg(field, render_block) : render_ppm(field, render_block);
    std::ofstream out(render_out, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + render_out);
    out << bytes;
    if (!out) throw IoError("failed writing: " + render_out);
  });

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run a declarative experiment config");
  std::string pipeline_config;
  pipeline->add_option("config", pipeline_config, "pipeline config (TOML)")->required();
  pipeline->callback([&]() {
    PipelineResult result = run_pipeline_file(pipeline_config);
    std::cout << format_report_text(result.reports);
    std::cerr << "wrote " << result.written_files.size() << " files\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << app.help();
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tsr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
