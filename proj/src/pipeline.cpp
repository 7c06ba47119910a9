#include "tsr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tsr/error.hpp"
#include "tsr/render.hpp"
#include "tsr/sha256.hpp"
#include "tsr/trajectory_io.hpp"

namespace tsr {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kManifestSchema = "ts-refine-manifest/1";
constexpr const char* kToolVersion = "tsrefine 0.1.0";

struct DataRange {
  double t_min = std::numeric_limits<double>::infinity();
  double t_max = -std::numeric_limits<double>::infinity();
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -std::numeric_limits<double>::infinity();
};

DataRange scan_range(const std::vector<Trajectory>& trajectories, int lane) {
  DataRange r;
  for (const Trajectory& traj : trajectories) {
    if (traj.lane != lane) continue;
    for (const TrajectoryPoint& p : traj.points) {
      r.t_min = std::min(r.t_min, p.time_s);
      r.t_max = std::max(r.t_max, p.time_s);
      r.x_min = std::min(r.x_min, p.position_m);
      r.x_max = std::max(r.x_max, p.position_m);
    }
  }
  if (r.t_min > r.t_max) {
    throw DataError("no trajectory samples on lane " + std::to_string(lane));
  }
  return r;
}

// Grid anchored at the floor of the window start, covering the window end.
GridSpec derive_grid(const PipelineConfig& cfg, const DataRange& range, double window_t0,
                     double window_t1) {
  GridSpec spec;
  spec.dt_s = cfg.dt_s;
  spec.dx_m = cfg.dx_m;
  spec.t0_s = cfg.t0_s ? *cfg.t0_s : std::floor(window_t0 / cfg.dt_s) * cfg.dt_s;
  spec.x0_m = cfg.x0_m ? *cfg.x0_m : std::floor(range.x_min / cfg.dx_m) * cfg.dx_m;
  spec.nt = cfg.nt ? *cfg.nt
                   : std::max(1, static_cast<int>(std::ceil((window_t1 - spec.t0_s) / cfg.dt_s)));
  spec.nx = cfg.nx ? *cfg.nx
                   : std::max(1, static_cast<int>(std::ceil((range.x_max - spec.x0_m) / cfg.dx_m)));
  validate_spec(spec);
  return spec;
}

std::string pass_label(int pass, int total_refinements_per_pass) {
  int factor = 1;
  for (int i = 0; i < pass; ++i) factor *= total_refinements_per_pass;
  return "pass" + std::to_string(pass) + "-x" + std::to_string(factor);
}

ordered_json spec_json(const GridSpec& spec) {
  ordered_json j;
  j["t0_s"] = spec.t0_s;
  j["x0_m"] = spec.x0_m;
  j["dt_s"] = spec.dt_s;
  j["dx_m"] = spec.dx_m;
  j["nt"] = spec.nt;
  j["nx"] = spec.nx;
  return j;
}

}  // namespace

PipelineConfig PipelineConfig::from_toml(const TomlLite& toml, const std::string& base_dir) {
  PipelineConfig cfg;

  auto resolve = [&base_dir](const std::string& path) {
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / p).string();
  };

  std::string source = toml.get_string("data.source").value_or("synth");
  if (source == "synth") {
    cfg.data_source = DataSource::synth;
  } else if (source == "csv") {
    cfg.data_source = DataSource::csv;
    cfg.csv_path = resolve(toml.require_string("data.path"));
    cfg.csv_format = toml.get_string("data.format").value_or("canonical");
    if (cfg.csv_format != "canonical" && cfg.csv_format != "ngsim") {
      throw ConfigError("data.format must be 'canonical' or 'ngsim'");
    }
  } else {
    throw ConfigError("data.source must be 'synth' or 'csv', got '" + source + "'");
  }

  WaveScenario& s = cfg.scenario;
  s.segment_length_m = toml.get_number("synth.segment_length_m").value_or(s.segment_length_m);
  s.duration_s = toml.get_number("synth.duration_s").value_or(s.duration_s);
  s.free_speed_kmh = toml.get_number("synth.free_speed_kmh").value_or(s.free_speed_kmh);
  s.jam_spacing_m = toml.get_number("synth.jam_spacing_m").value_or(s.jam_spacing_m);
  s.wave_speed_kmh = toml.get_number("synth.wave_speed_kmh").value_or(s.wave_speed_kmh);
  s.inflow_headway_s = toml.get_number("synth.inflow_headway_s").value_or(s.inflow_headway_s);
  s.stopgo_period_s = toml.get_number("synth.stopgo_period_s").value_or(s.stopgo_period_s);
  s.stopgo_duty = toml.get_number("synth.stopgo_duty").value_or(s.stopgo_duty);
  if (auto seed = toml.get_number("synth.seed")) s.seed = static_cast<std::uint64_t>(*seed);
  if (auto lane = toml.get_number("synth.lane")) s.lane = static_cast<int>(*lane);

  cfg.dt_s = toml.require_number("grid.dt_s");
  cfg.dx_m = toml.require_number("grid.dx_m");
  if (auto lane = toml.get_number("grid.lane")) cfg.lane = static_cast<int>(*lane);
  if (auto v = toml.get_number("grid.t0_s")) cfg.t0_s = *v;
  if (auto v = toml.get_number("grid.x0_m")) cfg.x0_m = *v;
  if (auto v = toml.get_number("grid.nt")) cfg.nt = static_cast<int>(*v);
  if (auto v = toml.get_number("grid.nx")) cfg.nx = static_cast<int>(*v);

  std::string model_source = toml.get_string("model.source").value_or("builtin");
  if (model_source == "builtin") {
    cfg.model_source = ModelSource::builtin;
  } else if (model_source == "files") {
    cfg.model_source = ModelSource::files;
    auto files = toml.get_string_array("model.files");
    if (!files || files->empty()) {
      throw ConfigError("model.files is required when model.source = 'files'");
    }
    for (const std::string& f : *files) cfg.model_files.push_back(resolve(f));
  } else if (model_source == "fit") {
    cfg.model_source = ModelSource::fit;
  } else {
    throw ConfigError("model.source must be 'builtin', 'files' or 'fit', got '" + model_source +
                      "'");
  }
  cfg.threshold_kmh = toml.get_number("model.threshold_kmh").value_or(60.0);

  if (auto v = toml.get_number("experiment.passes")) cfg.passes = static_cast<int>(*v);
  if (cfg.passes < 1 || cfg.passes > 2) {
    throw ConfigError("experiment.passes must be 1 or 2, got " + std::to_string(cfg.passes));
  }
  if (auto v = toml.get_number("experiment.fit_t0_s")) cfg.fit_t0_s = *v;
  if (auto v = toml.get_number("experiment.fit_t1_s")) cfg.fit_t1_s = *v;
  if (auto v = toml.get_number("experiment.eval_t0_s")) cfg.eval_t0_s = *v;
  if (auto v = toml.get_number("experiment.eval_t1_s")) cfg.eval_t1_s = *v;

  cfg.output_dir = resolve(toml.get_string("output.dir").value_or("out"));
  cfg.render = toml.get_bool("output.render").value_or(true);
  if (auto v = toml.get_number("output.block_px")) cfg.block_px = static_cast<int>(*v);

  return cfg;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& config_sha256) {
  // 1. Trajectories.
  std::vector<Trajectory> trajectories;
  ordered_json data_json;
  if (cfg.data_source == PipelineConfig::DataSource::synth) {
    trajectories = generate(cfg.scenario);
    data_json["source"] = "synth";
    const WaveScenario& s = cfg.scenario;
    ordered_json sj;
    sj["segment_length_m"] = s.segment_length_m;
    sj["duration_s"] = s.duration_s;
    sj["free_speed_kmh"] = s.free_speed_kmh;
    sj["jam_spacing_m"] = s.jam_spacing_m;
    sj["wave_speed_kmh"] = s.wave_speed_kmh;
    sj["inflow_headway_s"] = s.inflow_headway_s;
    sj["stopgo_period_s"] = s.stopgo_period_s;
    sj["stopgo_duty"] = s.stopgo_duty;
    sj["seed"] = s.seed;
    sj["lane"] = s.lane;
    data_json["scenario"] = sj;
  } else {
    IngestSchema schema =
        cfg.csv_format == "ngsim" ? IngestSchema::ngsim() : IngestSchema::canonical();
    trajectories = parse_trajectories_file(cfg.csv_path, schema).trajectories;
    data_json["source"] = "csv";
    data_json["path"] = cfg.csv_path;
    data_json["format"] = cfg.csv_format;
    data_json["sha256"] = sha256_file_hex(cfg.csv_path);
  }

  DataRange range = scan_range(trajectories, cfg.lane);
  double eval_t0 = cfg.eval_t0_s.value_or(range.t_min);
  double eval_t1 = cfg.eval_t1_s.value_or(range.t_max);
  if (!(eval_t0 < eval_t1)) throw ConfigError("evaluation window is empty");

  // 2. Coarse diagram over the evaluation window.
  GridSpec base_spec = derive_grid(cfg, range, eval_t0, eval_t1);
  SpeedField coarse = build_speed_field(trajectories, base_spec, cfg.lane);

  // 3. One model per pass.
  std::vector<RefinementModel> models;
  ordered_json models_json = ordered_json::array();
  double pass_dt = base_spec.dt_s;
  double pass_dx = base_spec.dx_m;
  for (int p = 0; p < cfg.passes; ++p) {
    ordered_json mj;
    switch (cfg.model_source) {
      case PipelineConfig::ModelSource::builtin: {
        models.push_back(builtin_model(pass_dt, pass_dx));
        char buf[64];
        std::snprintf(buf, sizeof(buf), "builtin:%gx%g", pass_dt, pass_dx);
        mj["source"] = buf;
        break;
      }
      case PipelineConfig::ModelSource::files: {
        if (p >= static_cast<int>(cfg.model_files.size())) {
          throw ConfigError("pass " + std::to_string(p + 1) + " has no model file; " +
                            std::to_string(cfg.model_files.size()) + " provided");
        }
        models.push_back(load_model_file(cfg.model_files[p]));
        mj["source"] = cfg.model_files[p];
        break;
      }
      case PipelineConfig::ModelSource::fit: {
        double fit_t0 = cfg.fit_t0_s.value_or(range.t_min);
        double fit_t1 = cfg.fit_t1_s.value_or(range.t_max);
        if (!(fit_t0 < fit_t1)) throw ConfigError("fit window is empty");
        PipelineConfig fit_cfg = cfg;
        fit_cfg.dt_s = pass_dt;
        fit_cfg.dx_m = pass_dx;
        fit_cfg.t0_s.reset();
        fit_cfg.x0_m.reset();
        fit_cfg.nt.reset();
        fit_cfg.nx.reset();
        GridSpec fit_spec = derive_grid(fit_cfg, range, fit_t0, fit_t1);
        SpeedField fit_coarse = build_speed_field(trajectories, fit_spec, cfg.lane);
        SpeedField fit_fine = build_speed_field(trajectories, halve_spec(fit_spec), cfg.lane);
        models.push_back(fit_model(fit_coarse, fit_fine, cfg.threshold_kmh));
        mj["source"] = "fit";
        mj["fit_window_s"] = ordered_json::array({fit_t0, fit_t1});
        break;
      }
    }
    models_json.push_back(mj);
    pass_dt /= 2.0;
    pass_dx /= 2.0;
  }

  // 4. Refine pass by pass; each pass consumes only the previous estimate.
  PipelineResult result;
  std::vector<SpeedField> estimates;
  {
    SpeedField current = coarse;
    for (int p = 0; p < cfg.passes; ++p) {
      RefineStats stats;
      current = refine_once(current, models[p], &stats);
      result.stats.push_back(stats);
      estimates.push_back(current);
    }
  }

  // 5. Ground truth per pass, built directly on each estimate's grid.
  std::vector<SpeedField> truths;
  for (int p = 0; p < cfg.passes; ++p) {
    truths.push_back(build_speed_field(trajectories, estimates[p].spec(), cfg.lane));
    result.reports.emplace_back(pass_label(p + 1, 4), evaluate(estimates[p], truths[p]));
  }

  // 6. Artifacts.
  fs::create_directories(cfg.output_dir);
  std::map<std::string, std::string> output_hashes;  // name -> sha256, sorted

  auto write_artifact = [&](const std::string& name, const std::string& bytes) {
    fs::path path = fs::path(cfg.output_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << bytes;
    if (!out) throw IoError("failed writing: " + path.string());
    output_hashes[name] = sha256_hex(bytes);
    result.written_files.push_back(name);
  };

  auto field_bytes = [](const SpeedField& field) {
    std::ostringstream ss;
    write_field(field, ss);
    return ss.str();
  };

  write_artifact("coarse.tsf", field_bytes(coarse));
  if (cfg.render) write_artifact("coarse.ppm", render_ppm(coarse, cfg.block_px));
  for (int p = 0; p < cfg.passes; ++p) {
    std::string tag = "pass" + std::to_string(p + 1);
    write_artifact(tag + ".tsf", field_bytes(estimates[p]));
    write_artifact("truth_" + tag + ".tsf", field_bytes(truths[p]));
    if (cfg.render) {
      write_artifact(tag + ".ppm", render_ppm(estimates[p], cfg.block_px));
      write_artifact("truth_" + tag + ".ppm", render_ppm(truths[p], cfg.block_px));
    }
    std::ostringstream ss;
    save_model(models[p], ss);
    std::string model_bytes = ss.str();
    write_artifact("model_" + tag + ".json", model_bytes);
    models_json[p]["sha256"] = sha256_hex(model_bytes);
  }
  write_artifact("report.csv", format_report_csv(result.reports));
  write_artifact("report.txt", format_report_text(result.reports));

  // 7. Manifest. Contains no timestamps or machine state, so a re-run with the
  // same inputs reproduces it byte for byte.
  ordered_json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["tool"] = kToolVersion;
  if (!config_sha256.empty()) manifest["config_sha256"] = config_sha256;
  manifest["data"] = data_json;
  manifest["lane"] = cfg.lane;
  manifest["grid"] = spec_json(base_spec);
  manifest["threshold_kmh"] = cfg.threshold_kmh;
  manifest["passes"] = cfg.passes;
  manifest["eval_window_s"] = ordered_json::array({eval_t0, eval_t1});
  manifest["models"] = models_json;
  ordered_json outputs;
  for (const auto& [name, hash] : output_hashes) outputs[name] = hash;
  manifest["outputs"] = outputs;
  result.manifest_json = manifest.dump(2) + "\n";
  {
    fs::path path = fs::path(cfg.output_dir) / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << result.manifest_json;
    result.written_files.push_back("manifest.json");
  }
  return result;
}

PipelineResult run_pipeline_file(const std::string& config_path) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + config_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  TomlLite toml = TomlLite::parse(text);
  std::string base_dir = fs::path(config_path).parent_path().string();
  PipelineConfig cfg = PipelineConfig::from_toml(toml, base_dir);
  return run_pipeline(cfg, sha256_hex(text));
}

}  // namespace tsr
