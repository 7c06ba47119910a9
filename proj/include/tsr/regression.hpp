#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsr/grid.hpp"

namespace tsr {

// One fitted (regime, subcell) group: nine slopes in predictor order
// (C, LL, Lw, LR, Rt, UR, Up, UL, Lf) plus an intercept in km/h.
struct CoefficientSet {
  double p_c = 0.0;
  double p_ll = 0.0, p_lw = 0.0, p_lr = 0.0, p_rt = 0.0;
  double p_ur = 0.0, p_up = 0.0, p_ul = 0.0, p_lf = 0.0;
  double intercept = 0.0;
  std::optional<double> r2;      // absent when the target had no variance
  std::int64_t n_samples = 0;
  bool rank_deficient = false;   // minimum-norm solution was used

  std::array<double, 9> coefficients() const {
    return {p_c, p_ll, p_lw, p_lr, p_rt, p_ur, p_up, p_ul, p_lf};
  }

  double predict(const NeighborVector& x) const {
    auto p = coefficients();
    auto v = x.as_array();
    double y = intercept;
    for (int i = 0; i < 9; ++i) y += p[i] * v[i];
    return y;
  }
};

// Full refinement model for one cell size: one coefficient set per
// (regime, subcell), with the regime speed threshold.
struct RefinementModel {
  double cell_dt_s = 0.0;
  double cell_dx_m = 0.0;
  double threshold_kmh = 60.0;
  std::array<std::array<CoefficientSet, 4>, 2> table;  // [regime][subcell]

  CoefficientSet& at(Regime k, SubcellId j) {
    return table[static_cast<int>(k)][static_cast<int>(j)];
  }
  const CoefficientSet& at(Regime k, SubcellId j) const {
    return table[static_cast<int>(k)][static_cast<int>(j)];
  }
};

// One interior coarse cell paired with its four fine-grid subcell speeds.
// A target is absent when the fine cell observed no vehicle.
struct TrainingSample {
  NeighborVector predictors;
  std::array<std::optional<double>, 4> targets;  // indexed by SubcellId
  Regime regime = Regime::ff;
};

// fine must be the halved grid of coarse (same lane). One sample per interior
// coarse cell with a complete neighbor vector.
std::vector<TrainingSample> extract_samples(const SpeedField& coarse, const SpeedField& fine,
                                            double threshold_kmh);

// Ordinary least squares for one (regime, subcell) group, solved by a
// pivoted orthogonal decomposition. Requires >= 10 usable samples.
// R-squared is centered: 1 - SSR/SST about the target mean.
CoefficientSet fit_ols(std::span<const TrainingSample> samples, Regime regime, SubcellId subcell);

// Fits all 8 groups from a coarse/fine field pair.
RefinementModel fit_model(const SpeedField& coarse, const SpeedField& fine, double threshold_kmh);
RefinementModel fit_model_from_samples(std::span<const TrainingSample> samples,
                                       const GridSpec& coarse_spec, double threshold_kmh);

// JSON model files, schema "ts-refine-model/1"; lossless round trip.
void save_model(const RefinementModel& model, std::ostream& out);
RefinementModel load_model(std::istream& in);
void save_model_file(const RefinementModel& model, const std::string& path);
RefinementModel load_model_file(const std::string& path);

// Bundled coefficient tables for the four supported cell sizes:
// 30sx50m, 60sx100m, 120sx200m, 240sx400m. Threshold 60 km/h.
bool builtin_size_supported(double cell_dt_s, double cell_dx_m);
RefinementModel builtin_model(double cell_dt_s, double cell_dx_m);
std::string builtin_sizes_description();

}  // namespace tsr
