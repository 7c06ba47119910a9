#include "tsr/regression.hpp"

#include "tsr/error.hpp"

namespace tsr {

namespace {

struct BuiltinRow {
  double dt, dx;
  Regime regime;
  SubcellId subcell;
  std::int64_t n;
  double p[9];
  double intercept;
  double r2;
};

// Pre-estimated coefficients for the four supported cell sizes. Values mirror
// data/builtin_coefficients.csv, whose hash is pinned by the test suite.
// The 240sx400m free-flow groups come from only 19 samples each; expect them
// to extrapolate poorly outside dense congested diagrams.
constexpr BuiltinRow kBuiltinRows[] = {
    {30, 50, Regime::ff, SubcellId::LL, 2305, {0.95, 0.43, -0.28, 0.02, 0.13, -0.27, 0.31, -0.11, -0.20}, 0.84, 0.8170},
    {30, 50, Regime::ff, SubcellId::LR, 2302, {0.88, -0.38, 0.66, -0.12, -0.03, 0.25, -0.54, 0.06, 0.22}, 0.30, 0.8435},
    {30, 50, Regime::ff, SubcellId::UR, 2303, {1.06, -0.40, 0.35, -0.01, -0.26, 0.34, -0.32, 0.08, 0.16}, -0.13, 0.8489},
    {30, 50, Regime::ff, SubcellId::UL, 2306, {0.83, 0.30, -0.51, 0.03, 0.16, -0.25, 0.60, -0.19, 0.04}, 0.66, 0.8171},
    {30, 50, Regime::cg, SubcellId::LL, 7257, {0.97, -0.08, -0.09, -0.01, -0.17, 0.00, 0.09, 0.05, 0.23}, 0.19, 0.9716},
    {30, 50, Regime::cg, SubcellId::LR, 7258, {0.99, 0.07, -0.20, -0.00, 0.21, -0.02, 0.20, -0.10, -0.16}, 0.06, 0.9704},
    {30, 50, Regime::cg, SubcellId::UR, 7258, {0.95, 0.03, 0.14, 0.05, 0.19, -0.06, -0.08, -0.01, -0.22}, 0.41, 0.9710},
    {30, 50, Regime::cg, SubcellId::UL, 7257, {0.92, -0.00, 0.21, -0.06, -0.19, 0.09, -0.20, 0.01, 0.20}, 0.43, 0.9713},
    {60, 100, Regime::ff, SubcellId::LL, 532, {1.13, 0.41, -0.28, 0.02, 0.01, -0.15, 0.14, -0.06, -0.21}, -0.75, 0.8585},
    {60, 100, Regime::ff, SubcellId::LR, 532, {0.62, -0.39, 0.69, -0.07, 0.08, 0.11, -0.34, -0.01, 0.27}, 3.65, 0.8587},
    {60, 100, Regime::ff, SubcellId::UR, 532, {0.86, -0.41, 0.36, -0.05, -0.02, 0.15, -0.15, 0.04, 0.19}, 2.38, 0.8636},
    {60, 100, Regime::ff, SubcellId::UL, 532, {1.13, 0.39, -0.63, 0.09, -0.05, -0.10, 0.41, -0.10, -0.12}, -1.50, 0.8671},
    {60, 100, Regime::cg, SubcellId::LL, 1764, {1.02, -0.06, -0.03, -0.09, -0.09, 0.01, -0.01, 0.14, 0.10}, 0.90, 0.9502},
    {60, 100, Regime::cg, SubcellId::LR, 1764, {0.89, 0.06, -0.24, 0.05, 0.17, -0.06, 0.32, -0.17, -0.03}, 0.86, 0.9517},
    {60, 100, Regime::cg, SubcellId::UR, 1764, {1.04, 0.05, 0.02, 0.16, 0.05, -0.03, -0.04, -0.09, -0.14}, -0.03, 0.9520},
    {60, 100, Regime::cg, SubcellId::UL, 1764, {0.87, -0.05, 0.33, -0.12, -0.08, 0.07, -0.27, 0.08, 0.16}, 0.52, 0.9491},
    {120, 200, Regime::ff, SubcellId::LL, 118, {1.08, 0.14, -0.05, 0.01, -0.15, -0.03, 0.07, -0.08, -0.07}, 5.49, 0.7952},
    {120, 200, Regime::ff, SubcellId::LR, 118, {0.58, -0.20, 0.53, -0.08, 0.18, 0.08, -0.30, 0.07, 0.18}, -1.18, 0.7963},
    {120, 200, Regime::ff, SubcellId::UR, 118, {0.75, -0.07, 0.15, -0.07, 0.19, 0.04, -0.01, 0.12, -0.06}, -1.96, 0.7616},
    {120, 200, Regime::ff, SubcellId::UL, 118, {1.26, 0.11, -0.38, 0.12, -0.22, -0.05, 0.21, -0.02, -0.06}, 1.87, 0.7812},
    {120, 200, Regime::cg, SubcellId::LL, 404, {1.04, -0.03, -0.06, -0.13, -0.04, -0.08, 0.00, 0.21, 0.06}, 0.97, 0.9277},
    {120, 200, Regime::cg, SubcellId::LR, 404, {0.93, 0.07, -0.31, 0.14, 0.10, -0.03, 0.31, -0.16, -0.04}, 0.57, 0.9261},
    {120, 200, Regime::cg, SubcellId::UR, 404, {1.07, 0.05, 0.02, 0.23, -0.08, 0.10, -0.10, -0.15, -0.13}, 0.26, 0.9293},
    {120, 200, Regime::cg, SubcellId::UL, 404, {0.83, -0.08, 0.40, -0.19, -0.01, 0.03, -0.27, 0.10, 0.17}, 0.88, 0.9246},
    {240, 400, Regime::ff, SubcellId::LL, 19, {0.27, -0.05, 0.21, 0.21, -0.06, -0.01, 0.45, -0.38, 0.38}, 0.14, 0.8752},
    {240, 400, Regime::ff, SubcellId::LR, 19, {-0.46, -0.49, 1.46, -0.46, 0.51, -0.76, 0.38, 0.29, 0.50}, -2.13, 0.8339},
    {240, 400, Regime::ff, SubcellId::UR, 19, {0.71, -0.40, 0.33, -0.28, 0.24, -0.18, 0.24, 0.36, 0.05}, -3.23, 0.8273},
    {240, 400, Regime::ff, SubcellId::UL, 19, {2.54, 0.48, -1.38, 0.43, -0.51, 0.70, -0.61, -0.26, -0.39}, 1.88, 0.8602},
    {240, 400, Regime::cg, SubcellId::LL, 85, {0.97, -0.06, 0.13, -0.11, 0.03, 0.04, -0.02, 0.03, 0.09}, -1.88, 0.9344},
    {240, 400, Regime::cg, SubcellId::LR, 85, {0.82, -0.03, -0.26, 0.02, 0.10, -0.04, 0.44, -0.22, 0.16}, -0.76, 0.9514},
    {240, 400, Regime::cg, SubcellId::UR, 85, {1.37, 0.10, -0.29, 0.29, -0.23, 0.06, -0.30, 0.08, -0.18}, 4.32, 0.9266},
    {240, 400, Regime::cg, SubcellId::UL, 85, {0.76, -0.01, 0.47, -0.22, 0.08, -0.10, -0.03, 0.09, -0.03}, -0.49, 0.9353},
};

constexpr double kBuiltinThresholdKmh = 60.0;

}  // namespace

bool builtin_size_supported(double cell_dt_s, double cell_dx_m) {
  for (const BuiltinRow& row : kBuiltinRows) {
    if (row.dt == cell_dt_s && row.dx == cell_dx_m) return true;
  }
  return false;
}

std::string builtin_sizes_description() {
  return "30sx50m, 60sx100m, 120sx200m, 240sx400m";
}

RefinementModel builtin_model(double cell_dt_s, double cell_dx_m) {
  if (!builtin_size_supported(cell_dt_s, cell_dx_m)) {
    throw UsageError("no built-in model for cell size " + std::to_string(cell_dt_s) + "s x " +
                     std::to_string(cell_dx_m) + "m; supported sizes: " +
                     builtin_sizes_description());
  }
  RefinementModel model;
  model.cell_dt_s = cell_dt_s;
  model.cell_dx_m = cell_dx_m;
  model.threshold_kmh = kBuiltinThresholdKmh;
  for (const BuiltinRow& row : kBuiltinRows) {
    if (row.dt != cell_dt_s || row.dx != cell_dx_m) continue;
    CoefficientSet cs;
    cs.p_c = row.p[0];
    cs.p_ll = row.p[1];
    cs.p_lw = row.p[2];
    cs.p_lr = row.p[3];
    cs.p_rt = row.p[4];
    cs.p_ur = row.p[5];
    cs.p_up = row.p[6];
    cs.p_ul = row.p[7];
    cs.p_lf = row.p[8];
    cs.intercept = row.intercept;
    cs.r2 = row.r2;
    cs.n_samples = row.n;
    model.at(row.regime, row.subcell) = cs;
  }
  return model;
}

}  // namespace tsr
