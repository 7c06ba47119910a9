#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "tsr/grid.hpp"

namespace tsr {

// A pair below this ground-truth speed is excluded (the relative error in
// MAPE is undefined near zero) and counted in skipped_zero_truth.
constexpr double kMapeTruthFloorKmh = 0.1;

struct SubcellErrors {
  SubcellId subcell = SubcellId::LL;
  std::int64_t count = 0;
  std::optional<double> mae_kmh;
  std::optional<double> mape;
};

struct ErrorReport {
  std::array<SubcellErrors, 4> per_subcell{};  // indexed by SubcellId
  std::int64_t pooled_count = 0;
  std::optional<double> pooled_mae_kmh;
  std::optional<double> pooled_mape;
  std::int64_t skipped_zero_truth = 0;
  std::int64_t skipped_missing = 0;
};

// Compares two fields with identical specs, grouping cells by their subcell
// position (index parity). A pair contributes iff both values are present and
// the truth is at or above the floor. Pooled values are the count-weighted
// recombination of the per-subcell values.
ErrorReport evaluate(const SpeedField& estimated, const SpeedField& truth);

// Exact sub-array extraction; the window must share cell sizes, be aligned to
// the cell grid, and lie inside the field.
SpeedField crop_to(const SpeedField& field, const GridSpec& window);

// Aligned plain-text table; one block of 4 subcell rows plus a pooled row per
// report. Absent metrics render as NA.
std::string format_report_text(
    std::span<const std::pair<std::string, ErrorReport>> reports);

// CSV with columns label,subcell,count,mae_kmh,mape (3 decimal places).
std::string format_report_csv(
    std::span<const std::pair<std::string, ErrorReport>> reports);

}  // namespace tsr
