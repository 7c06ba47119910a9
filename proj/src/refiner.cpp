#include "tsr/refiner.hpp"

#include <atomic>
#include <string>

#include "tsr/error.hpp"
#include "tsr/parallel.hpp"

namespace tsr {

SpeedField refine_once(const SpeedField& field, const RefinementModel& model,
                       RefineStats* stats) {
  const GridSpec& spec = field.spec();
  if (spec.dt_s != model.cell_dt_s || spec.dx_m != model.cell_dx_m) {
    throw UsageError("field cell size " + std::to_string(spec.dt_s) + "s x " +
                     std::to_string(spec.dx_m) + "m does not match model cell size " +
                     std::to_string(model.cell_dt_s) + "s x " + std::to_string(model.cell_dx_m) +
                     "m");
  }
  if (spec.nt < 3 || spec.nx < 3) {
    throw UsageError("grid " + std::to_string(spec.nt) + "x" + std::to_string(spec.nx) +
                     " has no refinable interior (need at least 3x3)");
  }

  GridSpec interior{spec.t0_s + spec.dt_s, spec.x0_m + spec.dx_m,
                    spec.dt_s, spec.dx_m, spec.nt - 2, spec.nx - 2};
  SpeedField fine(halve_spec(interior), field.lane());

  std::atomic<std::int64_t> ff_count{0}, cg_count{0}, skip_count{0};
  const int interior_rows = spec.nt - 2;
  std::vector<std::exception_ptr> row_errors(static_cast<std::size_t>(interior_rows));

  auto refine_row = [&](int a) {
    for (int b = 1; b <= spec.nx - 2; ++b) {
      auto nv = neighbor_vector(field, a, b);
      if (!nv) {
        skip_count.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      Regime regime = classify_regime(nv->center, model.threshold_kmh);
      if (regime == Regime::ff) {
        ff_count.fetch_add(1, std::memory_order_relaxed);
      } else {
        cg_count.fetch_add(1, std::memory_order_relaxed);
      }
      int fa = 2 * (a - 1);
      int fb = 2 * (b - 1);
      for (SubcellId j : kSubcells) {
        double estimate = model.at(regime, j).predict(*nv);
        if (estimate < 0.0) estimate = 0.0;  // speeds are physical
        SubcellOffset off = subcell_offset(j);
        fine.set(fa + off.dt, fb + off.dx, estimate);
      }
    }
  };
  parallel_for(static_cast<std::size_t>(interior_rows), [&](std::size_t row) {
    try {
      refine_row(static_cast<int>(row) + 1);
    } catch (...) {
      row_errors[row] = std::current_exception();
    }
  });
  for (const auto& e : row_errors) {
    if (e) std::rethrow_exception(e);
  }

  if (stats) {
    stats->ff_cells = ff_count.load();
    stats->cg_cells = cg_count.load();
    stats->skipped_cells = skip_count.load();
  }
  return fine;
}

SpeedField refine_iterated(const SpeedField& field, std::span<const RefinementModel> models,
                           int passes, std::vector<RefineStats>* stats) {
  if (passes < 1) throw UsageError("refinement needs at least one pass");
  if (static_cast<int>(models.size()) < passes) {
    throw UsageError("need " + std::to_string(passes) + " models for " + std::to_string(passes) +
                     " passes, got " + std::to_string(models.size()));
  }
  if (stats) stats->clear();

  SpeedField current = field;
  for (int p = 0; p < passes; ++p) {
    RefineStats pass_stats;
    try {
      current = refine_once(current, models[p], &pass_stats);
    } catch (const UsageError& e) {
      throw UsageError("pass " + std::to_string(p + 1) + ": " + e.what());
    }
    if (stats) stats->push_back(pass_stats);
  }
  return current;
}

}  // namespace tsr
