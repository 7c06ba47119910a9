#include "tsr/evaluator.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support/oracles.hpp"
#include "tsr/error.hpp"

using namespace tsr;

namespace {

SpeedField random_field(std::mt19937_64& rng, const GridSpec& spec, double present_prob = 0.85,
                        double zero_prob = 0.05) {
  std::uniform_real_distribution<double> speed(0.0, 110.0);
  std::bernoulli_distribution present(present_prob);
  std::bernoulli_distribution zero(zero_prob);
  SpeedField field(spec, 1);
  for (int a = 0; a < spec.nt; ++a) {
    for (int b = 0; b < spec.nx; ++b) {
      if (!present(rng)) continue;
      field.set(a, b, zero(rng) ? 0.05 * speed(rng) / 110.0 : speed(rng));
    }
  }
  return field;
}

}  // namespace

TEST_CASE("identical fields have zero error") {
  GridSpec spec{0, 0, 30, 50, 4, 4};
  std::mt19937_64 rng(1);
  SpeedField field = random_field(rng, spec, 1.0, 0.0);
  ErrorReport report = evaluate(field, field);
  CHECK(*report.pooled_mae_kmh == 0.0);
  CHECK(*report.pooled_mape == 0.0);
  CHECK(report.pooled_count == 16);
}

TEST_CASE("two-pair example computes the stated values") {
  // Truth [50, 60] vs estimates [52, 57] in one subcell group:
  // mae = 2.5, mape = (2/50 + 3/60) / 2 = 0.045.
  GridSpec spec{0, 0, 30, 50, 4, 2};
  SpeedField truth(spec, 1), est(spec, 1);
  truth.set(0, 0, 50.0);
  est.set(0, 0, 52.0);
  truth.set(2, 0, 60.0);
  est.set(2, 0, 57.0);
  ErrorReport report = evaluate(est, truth);
  const SubcellErrors& ll = report.per_subcell[static_cast<int>(SubcellId::LL)];
  CHECK(ll.count == 2);
  CHECK(*ll.mae_kmh == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(*ll.mape == doctest::Approx(0.045).epsilon(1e-12));
  CHECK(report.pooled_count == 2);
  CHECK(*report.pooled_mae_kmh == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("metrics equal the naive loop oracle exactly on random pairs") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    GridSpec spec{0, 0, 30, 50, 20, 20};
    SpeedField est = random_field(rng, spec);
    SpeedField truth = random_field(rng, spec);
    ErrorReport report = evaluate(est, truth);
    testing::NaiveMetrics oracle = testing::naive_metrics(est, truth);

    for (int j = 0; j < 4; ++j) {
      CHECK(report.per_subcell[j].count == oracle.count[j]);
      CHECK(report.per_subcell[j].mae_kmh == oracle.mae[j]);
      CHECK(report.per_subcell[j].mape == oracle.mape[j]);
    }
    CHECK(report.pooled_count == oracle.pooled_count);
    CHECK(report.pooled_mae_kmh == oracle.pooled_mae);
    CHECK(report.pooled_mape == oracle.pooled_mape);
    CHECK(report.skipped_zero_truth == oracle.skipped_zero_truth);
    CHECK(report.skipped_missing == oracle.skipped_missing);
  }
}

TEST_CASE("pooled metrics are the count-weighted recombination of per-subcell metrics") {
  std::mt19937_64 rng(3);
  GridSpec spec{0, 0, 30, 50, 16, 16};
  SpeedField est = random_field(rng, spec);
  SpeedField truth = random_field(rng, spec);
  ErrorReport report = evaluate(est, truth);
  double weighted_mae = 0, weighted_mape = 0;
  std::int64_t n = 0;
  for (const auto& entry : report.per_subcell) {
    if (entry.count == 0) continue;
    weighted_mae += *entry.mae_kmh * entry.count;
    weighted_mape += *entry.mape * entry.count;
    n += entry.count;
  }
  REQUIRE(n == report.pooled_count);
  CHECK(std::abs(*report.pooled_mae_kmh - weighted_mae / n) < 1e-12);
  CHECK(std::abs(*report.pooled_mape - weighted_mape / n) < 1e-12);
}

TEST_CASE("mae is symmetric under swapping, mape is not") {
  std::mt19937_64 rng(4);
  GridSpec spec{0, 0, 30, 50, 10, 10};
  SpeedField a = random_field(rng, spec, 1.0, 0.0);
  SpeedField b = random_field(rng, spec, 1.0, 0.0);
  ErrorReport ab = evaluate(a, b);
  ErrorReport ba = evaluate(b, a);
  CHECK(*ab.pooled_mae_kmh == doctest::Approx(*ba.pooled_mae_kmh).epsilon(1e-12));
  CHECK(*ab.pooled_mape != *ba.pooled_mape);
}

TEST_CASE("scaling both fields scales mae and preserves mape") {
  std::mt19937_64 rng(5);
  GridSpec spec{0, 0, 30, 50, 10, 10};
  SpeedField est(spec, 1), truth(spec, 1), est2(spec, 1), truth2(spec, 1);
  std::uniform_real_distribution<double> speed(10.0, 100.0);
  const double c = 1.7;
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      double t = speed(rng), e = speed(rng);
      truth.set(a, b, t);
      est.set(a, b, e);
      truth2.set(a, b, c * t);
      est2.set(a, b, c * e);
    }
  }
  ErrorReport base = evaluate(est, truth);
  ErrorReport scaled = evaluate(est2, truth2);
  CHECK(std::abs(*scaled.pooled_mae_kmh - c * *base.pooled_mae_kmh) < 1e-12 * c * 100);
  CHECK(std::abs(*scaled.pooled_mape - *base.pooled_mape) < 1e-12);
}

TEST_CASE("near-zero truth pairs are excluded and counted") {
  GridSpec spec{0, 0, 30, 50, 2, 2};
  SpeedField truth(spec, 1), est(spec, 1);
  truth.set(0, 0, 0.05);  // below the floor
  est.set(0, 0, 5.0);
  truth.set(1, 1, 50.0);
  est.set(1, 1, 55.0);
  est.set(0, 1, 10.0);  // truth missing
  ErrorReport report = evaluate(est, truth);
  CHECK(report.skipped_zero_truth == 1);
  CHECK(report.skipped_missing == 2);  // (0,1) one-sided and (1,0) both absent
  CHECK(report.pooled_count == 1);
  CHECK(*report.pooled_mae_kmh == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("per-subcell counts are independent") {
  GridSpec spec{0, 0, 30, 50, 2, 2};
  SpeedField truth(spec, 1), est(spec, 1);
  // Only the LL and UR positions have both values.
  truth.set(0, 0, 40.0);
  est.set(0, 0, 42.0);
  truth.set(1, 1, 80.0);
  est.set(1, 1, 78.0);
  truth.set(1, 0, 30.0);  // LR: estimate missing
  ErrorReport report = evaluate(est, truth);
  CHECK(report.per_subcell[static_cast<int>(SubcellId::LL)].count == 1);
  CHECK(report.per_subcell[static_cast<int>(SubcellId::UR)].count == 1);
  CHECK(report.per_subcell[static_cast<int>(SubcellId::LR)].count == 0);
  CHECK(report.per_subcell[static_cast<int>(SubcellId::UL)].count == 0);
}

TEST_CASE("zero valid pairs leaves metrics absent but counts filled") {
  GridSpec spec{0, 0, 30, 50, 2, 2};
  SpeedField truth(spec, 1), est(spec, 1);
  est.set(0, 0, 10.0);
  ErrorReport report = evaluate(est, truth);
  CHECK(report.pooled_count == 0);
  CHECK_FALSE(report.pooled_mae_kmh.has_value());
  CHECK_FALSE(report.pooled_mape.has_value());
  CHECK(report.skipped_missing == 4);
}

TEST_CASE("spec mismatch is a usage error naming both specs") {
  SpeedField a(GridSpec{0, 0, 30, 50, 2, 2}, 1);
  SpeedField b(GridSpec{0, 0, 30, 50, 3, 3}, 1);
  CHECK_THROWS_WITH_AS(evaluate(a, b), doctest::Contains("nt=2"), UsageError);
}

TEST_CASE("crop to own spec is the identity") {
  std::mt19937_64 rng(6);
  GridSpec spec{10, 20, 30, 50, 5, 5};
  SpeedField field = random_field(rng, spec);
  SpeedField cropped = crop_to(field, spec);
  CHECK(cropped.spec() == spec);
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) CHECK(cropped.at(a, b) == field.at(a, b));
  }
}

TEST_CASE("centered crop preserves interior values verbatim") {
  std::mt19937_64 rng(7);
  GridSpec spec{0, 0, 30, 50, 20, 20};
  SpeedField field = random_field(rng, spec, 1.0, 0.0);
  GridSpec window{2 * 30.0, 2 * 50.0, 30, 50, 16, 16};
  SpeedField cropped = crop_to(field, window);
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      CHECK(*cropped.at(a, b) == *field.at(a + 2, b + 2));
    }
  }
}

TEST_CASE("crop of crop equals a single crop to the final window") {
  std::mt19937_64 rng(8);
  GridSpec spec{0, 0, 10, 10, 12, 12};
  SpeedField field = random_field(rng, spec);
  GridSpec mid{10, 10, 10, 10, 10, 10};
  GridSpec final_window{30, 20, 10, 10, 5, 6};
  SpeedField two_step = crop_to(crop_to(field, mid), final_window);
  SpeedField one_step = crop_to(field, final_window);
  CHECK(two_step.spec() == one_step.spec());
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 6; ++b) CHECK(two_step.at(a, b) == one_step.at(a, b));
  }
}

TEST_CASE("misaligned or out-of-bounds windows are usage errors") {
  GridSpec spec{0, 0, 30, 50, 5, 5};
  SpeedField field(spec, 1);
  CHECK_THROWS_AS(crop_to(field, GridSpec{15, 0, 30, 50, 2, 2}), UsageError);   // misaligned t
  CHECK_THROWS_AS(crop_to(field, GridSpec{0, 0, 30, 50, 6, 5}), UsageError);    // too wide
  CHECK_THROWS_AS(crop_to(field, GridSpec{-30, 0, 30, 50, 2, 2}), UsageError);  // negative
  CHECK_THROWS_AS(crop_to(field, GridSpec{0, 0, 15, 50, 2, 2}), UsageError);    // wrong dt
}

TEST_CASE("report formatting renders rows per subcell plus pooled") {
  GridSpec spec{0, 0, 30, 50, 2, 2};
  SpeedField truth(spec, 1), est(spec, 1);
  truth.set(0, 0, 50.0);
  est.set(0, 0, 52.0);
  ErrorReport report = evaluate(est, truth);
  std::vector<std::pair<std::string, ErrorReport>> reports{{"x4", report}};

  std::string text = format_report_text(reports);
  CHECK(text.find("label") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);  // header + 4 + pooled

  std::string csv = format_report_csv(reports);
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "label,subcell,count,mae_kmh,mape");
  std::getline(ss, line);
  CHECK(line == "x4,LL,1,2.000,0.040");
  int rows = 1;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("empty report list renders header only") {
  CHECK(format_report_csv({}) == "label,subcell,count,mae_kmh,mape\n");
  std::string text = format_report_text({});
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
}

TEST_CASE("csv values parse back to three decimals") {
  GridSpec spec{0, 0, 30, 50, 4, 4};
  std::mt19937_64 rng(9);
  SpeedField est = random_field(rng, spec, 1.0, 0.0);
  SpeedField truth = random_field(rng, spec, 1.0, 0.0);
  ErrorReport report = evaluate(est, truth);
  std::vector<std::pair<std::string, ErrorReport>> reports{{"r", report}};
  std::string csv = format_report_csv(reports);

  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);  // header
  int j = 0;
  while (std::getline(ss, line)) {
    std::stringstream row(line);
    std::string label, subcell, count, mae, mape;
    std::getline(row, label, ',');
    std::getline(row, subcell, ',');
    std::getline(row, count, ',');
    std::getline(row, mae, ',');
    std::getline(row, mape, ',');
    if (subcell == "all") {
      CHECK(std::stoll(count) == report.pooled_count);
      CHECK(std::abs(std::stod(mae) - *report.pooled_mae_kmh) <= 5e-4);
    } else {
      const SubcellErrors& entry = report.per_subcell[j++];
      CHECK(std::stoll(count) == entry.count);
      CHECK(std::abs(std::stod(mae) - *entry.mae_kmh) <= 5e-4);
      CHECK(std::abs(std::stod(mape) - *entry.mape) <= 5e-4);
    }
  }
  CHECK(j == 4);
}
