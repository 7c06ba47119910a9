#include "tsr/evaluator.hpp"

#include <cmath>
#include <cstdio>

#include "tsr/error.hpp"

namespace tsr {

namespace {

SubcellId subcell_of(int a, int b) {
  bool late = (a % 2) == 1;
  bool upper = (b % 2) == 1;
  if (late) return upper ? SubcellId::UR : SubcellId::LR;
  return upper ? SubcellId::UL : SubcellId::LL;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", *v);
  return buf;
}

}  // namespace

ErrorReport evaluate(const SpeedField& estimated, const SpeedField& truth) {
  if (estimated.spec() != truth.spec()) {
    throw UsageError("evaluate requires identical grids; estimated " +
                     to_string(estimated.spec()) + " vs truth " + to_string(truth.spec()));
  }

  std::array<double, 4> abs_sum{};
  std::array<double, 4> rel_sum{};
  std::array<std::int64_t, 4> counts{};
  ErrorReport report;

  const GridSpec& spec = estimated.spec();
  for (int a = 0; a < spec.nt; ++a) {
    for (int b = 0; b < spec.nx; ++b) {
      auto est = estimated.at(a, b);
      auto tru = truth.at(a, b);
      if (!est || !tru) {
        ++report.skipped_missing;
        continue;
      }
      if (*tru < kMapeTruthFloorKmh) {
        ++report.skipped_zero_truth;
        continue;
      }
      int j = static_cast<int>(subcell_of(a, b));
      double abs_err = std::abs(*tru - *est);
      abs_sum[j] += abs_err;
      rel_sum[j] += abs_err / *tru;
      ++counts[j];
    }
  }

  double total_abs = 0.0, total_rel = 0.0;
  std::int64_t total_count = 0;
  for (SubcellId j : kSubcells) {
    int idx = static_cast<int>(j);
    SubcellErrors& entry = report.per_subcell[idx];
    entry.subcell = j;
    entry.count = counts[idx];
    if (counts[idx] > 0) {
      entry.mae_kmh = abs_sum[idx] / counts[idx];
      entry.mape = rel_sum[idx] / counts[idx];
    }
    total_abs += abs_sum[idx];
    total_rel += rel_sum[idx];
    total_count += counts[idx];
  }
  report.pooled_count = total_count;
  if (total_count > 0) {
    report.pooled_mae_kmh = total_abs / total_count;
    report.pooled_mape = total_rel / total_count;
  }
  return report;
}

SpeedField crop_to(const SpeedField& field, const GridSpec& window) {
  validate_spec(window);
  const GridSpec& spec = field.spec();
  if (window.dt_s != spec.dt_s || window.dx_m != spec.dx_m) {
    throw UsageError("crop window cell size must match the field; field " + to_string(spec) +
                     " vs window " + to_string(window));
  }
  auto offset_of = [](double delta, double step, const char* axis) {
    double ratio = delta / step;
    double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * (1.0 + std::abs(ratio))) {
      throw UsageError(std::string("crop window is not aligned to the cell grid on the ") +
                       axis + " axis");
    }
    return static_cast<int>(rounded);
  };
  int a0 = offset_of(window.t0_s - spec.t0_s, spec.dt_s, "time");
  int b0 = offset_of(window.x0_m - spec.x0_m, spec.dx_m, "space");
  if (a0 < 0 || b0 < 0 || a0 + window.nt > spec.nt || b0 + window.nx > spec.nx) {
    throw UsageError("crop window " + to_string(window) + " is outside the field " +
                     to_string(spec));
  }

  SpeedField out(window, field.lane());
  for (int a = 0; a < window.nt; ++a) {
    for (int b = 0; b < window.nx; ++b) {
      auto v = field.at(a0 + a, b0 + b);
      if (v) out.set(a, b, *v);
    }
  }
  return out;
}

std::string format_report_text(
    std::span<const std::pair<std::string, ErrorReport>> reports) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-20s %-8s %10s %10s %10s\n", "label", "subcell", "count",
                "mae_kmh", "mape");
  out += line;
  for (const auto& [label, report] : reports) {
    for (const SubcellErrors& entry : report.per_subcell) {
      std::snprintf(line, sizeof(line), "%-20s %-8s %10lld %10s %10s\n", label.c_str(),
                    to_string(entry.subcell), static_cast<long long>(entry.count),
                    format_metric(entry.mae_kmh).c_str(), format_metric(entry.mape).c_str());
      out += line;
    }
    std::snprintf(line, sizeof(line), "%-20s %-8s %10lld %10s %10s\n", label.c_str(), "all",
                  static_cast<long long>(report.pooled_count),
                  format_metric(report.pooled_mae_kmh).c_str(),
                  format_metric(report.pooled_mape).c_str());
    out += line;
  }
  return out;
}

std::string format_report_csv(
    std::span<const std::pair<std::string, ErrorReport>> reports) {
  std::string out = "label,subcell,count,mae_kmh,mape\n";
  char line[160];
  for (const auto& [label, report] : reports) {
    for (const SubcellErrors& entry : report.per_subcell) {
      std::snprintf(line, sizeof(line), "%s,%s,%lld,%s,%s\n", label.c_str(),
                    to_string(entry.subcell), static_cast<long long>(entry.count),
                    format_metric(entry.mae_kmh).c_str(), format_metric(entry.mape).c_str());
      out += line;
    }
    std::snprintf(line, sizeof(line), "%s,all,%lld,%s,%s\n", label.c_str(),
                  static_cast<long long>(report.pooled_count),
                  format_metric(report.pooled_mae_kmh).c_str(),
                  format_metric(report.pooled_mape).c_str());
    out += line;
  }
  return out;
}

}  // namespace tsr
