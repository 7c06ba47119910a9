#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsr/evaluator.hpp"
#include "tsr/refiner.hpp"
#include "tsr/regression.hpp"
#include "tsr/toml_lite.hpp"
#include "tsr/wavegen.hpp"

namespace tsr {

// One declarative experiment: obtain trajectories, build the coarse diagram,
// fit or load refinement models, refine for N passes, evaluate each pass
// against trajectory ground truth, and write fields/reports/images plus a
// manifest that pins every input and output hash.
struct PipelineConfig {
  enum class DataSource { synth, csv };
  enum class ModelSource { builtin, files, fit };

  DataSource data_source = DataSource::synth;
  std::string csv_path;
  std::string csv_format = "canonical";  // canonical | ngsim
  WaveScenario scenario;

  double dt_s = 60.0;
  double dx_m = 100.0;
  int lane = 1;
  std::optional<double> t0_s;
  std::optional<double> x0_m;
  std::optional<int> nt;
  std::optional<int> nx;

  ModelSource model_source = ModelSource::builtin;
  std::vector<std::string> model_files;
  double threshold_kmh = 60.0;

  int passes = 1;
  std::optional<double> fit_t0_s;
  std::optional<double> fit_t1_s;
  std::optional<double> eval_t0_s;
  std::optional<double> eval_t1_s;

  std::string output_dir = "out";
  bool render = true;
  int block_px = 8;

  // Relative paths inside the config resolve against base_dir.
  static PipelineConfig from_toml(const TomlLite& toml, const std::string& base_dir);
};

struct PipelineResult {
  std::vector<std::pair<std::string, ErrorReport>> reports;  // one label per pass
  std::vector<RefineStats> stats;
  std::vector<std::string> written_files;  // relative to output_dir
  std::string manifest_json;
};

PipelineResult run_pipeline(const PipelineConfig& config,
                            const std::string& config_sha256 = "");
PipelineResult run_pipeline_file(const std::string& config_path);

}  // namespace tsr
