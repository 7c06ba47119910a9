#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsr/grid.hpp"
#include "tsr/regression.hpp"

namespace tsr {

struct RefineStats {
  std::int64_t ff_cells = 0;
  std::int64_t cg_cells = 0;
  std::int64_t skipped_cells = 0;  // interior cells lacking a full neighbor vector

  std::int64_t refined_cells() const { return ff_cells + cg_cells; }
};

// One refinement pass: the interior of the input grid, halved. Input nt x nx
// yields 2(nt-2) x 2(nx-2) with the origin advanced by one coarse cell; the
// border ring cannot be refined. Predictions are clamped below at 0 km/h;
// cells without a full neighbor vector yield four absent subcells.
SpeedField refine_once(const SpeedField& field, const RefinementModel& model,
                       RefineStats* stats = nullptr);

// Iterated refinement; pass p consumes only the estimated field of pass p-1,
// including its regime classification. models[p] must match the cell size
// entering pass p.
SpeedField refine_iterated(const SpeedField& field, std::span<const RefinementModel> models,
                           int passes, std::vector<RefineStats>* stats = nullptr);

}  // namespace tsr
