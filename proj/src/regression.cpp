#include "tsr/regression.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "tsr/error.hpp"
#include "tsr/parallel.hpp"

namespace tsr {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<const char*, 9> kCoeffKeys{"C", "LL", "Lw", "LR", "Rt",
                                                "UR", "Up", "UL", "Lf"};
constexpr const char* kModelSchema = "ts-refine-model/1";

std::string group_name(Regime k, SubcellId j) {
  return std::string(to_string(k)) + "/" + to_string(j);
}

}  // namespace

std::vector<TrainingSample> extract_samples(const SpeedField& coarse, const SpeedField& fine,
                                            double threshold_kmh) {
  const GridSpec expected = halve_spec(coarse.spec());
  if (fine.spec() != expected) {
    throw UsageError("fine grid " + to_string(fine.spec()) +
                     " is not the halved coarse grid; expected " + to_string(expected) +
                     " from coarse " + to_string(coarse.spec()));
  }
  if (fine.lane() != coarse.lane()) {
    throw UsageError("coarse and fine fields are from different lanes (" +
                     std::to_string(coarse.lane()) + " vs " + std::to_string(fine.lane()) + ")");
  }

  std::vector<TrainingSample> samples;
  const GridSpec& spec = coarse.spec();
  for (int a = 1; a <= spec.nt - 2; ++a) {
    for (int b = 1; b <= spec.nx - 2; ++b) {
      auto nv = neighbor_vector(coarse, a, b);
      if (!nv) continue;
      TrainingSample sample;
      sample.predictors = *nv;
      sample.regime = classify_regime(nv->center, threshold_kmh);
      for (SubcellId j : kSubcells) {
        SubcellOffset off = subcell_offset(j);
        sample.targets[static_cast<int>(j)] = fine.at(2 * a + off.dt, 2 * b + off.dx);
      }
      samples.push_back(sample);
    }
  }
  return samples;
}

CoefficientSet fit_ols(std::span<const TrainingSample> samples, Regime regime,
                       SubcellId subcell) {
  constexpr int kParams = 10;  // 9 predictors + constant column
  std::vector<const TrainingSample*> rows;
  for (const TrainingSample& s : samples) {
    if (s.regime == regime && s.targets[static_cast<int>(subcell)].has_value()) {
      rows.push_back(&s);
    }
  }
  const int n = static_cast<int>(rows.size());
  if (n < kParams) {
    throw FitError("group " + group_name(regime, subcell) + " has " + std::to_string(n) +
                   " samples; at least " + std::to_string(kParams) + " required");
  }

  Eigen::MatrixXd X(n, kParams);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    auto x = rows[i]->predictors.as_array();
    for (int c = 0; c < 9; ++c) X(i, c) = x[c];
    X(i, 9) = 1.0;
    y(i) = *rows[i]->targets[static_cast<int>(subcell)];
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  Eigen::VectorXd beta = cod.solve(y);

  CoefficientSet out;
  out.p_c = beta(0);
  out.p_ll = beta(1);
  out.p_lw = beta(2);
  out.p_lr = beta(3);
  out.p_rt = beta(4);
  out.p_ur = beta(5);
  out.p_up = beta(6);
  out.p_ul = beta(7);
  out.p_lf = beta(8);
  out.intercept = beta(9);
  out.n_samples = n;
  out.rank_deficient = cod.rank() < kParams;

  double mean = y.mean();
  double sst = (y.array() - mean).square().sum();
  double ssr = (y - X * beta).squaredNorm();
  double max_abs = y.cwiseAbs().maxCoeff();
  double degenerate = 16.0 * n * std::numeric_limits<double>::epsilon() *
                      std::numeric_limits<double>::epsilon() * (1.0 + max_abs) * (1.0 + max_abs);
  if (sst > degenerate) {
    out.r2 = 1.0 - ssr / sst;
  }

  for (double c : out.coefficients()) {
    if (!std::isfinite(c)) {
      throw FitError("group " + group_name(regime, subcell) + " produced non-finite coefficients");
    }
  }
  if (!std::isfinite(out.intercept)) {
    throw FitError("group " + group_name(regime, subcell) + " produced a non-finite intercept");
  }
  return out;
}

RefinementModel fit_model_from_samples(std::span<const TrainingSample> samples,
                                       const GridSpec& coarse_spec, double threshold_kmh) {
  RefinementModel model;
  model.cell_dt_s = coarse_spec.dt_s;
  model.cell_dx_m = coarse_spec.dx_m;
  model.threshold_kmh = threshold_kmh;

  // The 8 group fits are independent; run them as one parallel batch.
  std::array<std::exception_ptr, 8> errors{};
  parallel_for(8, [&](std::size_t g) {
    Regime k = static_cast<Regime>(g / 4);
    SubcellId j = static_cast<SubcellId>(g % 4);
    try {
      model.at(k, j) = fit_ols(samples, k, j);
    } catch (...) {
      errors[g] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return model;
}

RefinementModel fit_model(const SpeedField& coarse, const SpeedField& fine,
                          double threshold_kmh) {
  std::vector<TrainingSample> samples = extract_samples(coarse, fine, threshold_kmh);
  return fit_model_from_samples(samples, coarse.spec(), threshold_kmh);
}

void save_model(const RefinementModel& model, std::ostream& out) {
  ordered_json doc;
  doc["schema"] = kModelSchema;
  doc["cell_dt_s"] = model.cell_dt_s;
  doc["cell_dx_m"] = model.cell_dx_m;
  doc["threshold_kmh"] = model.threshold_kmh;
  ordered_json regimes;
  for (Regime k : {Regime::ff, Regime::cg}) {
    ordered_json groups;
    for (SubcellId j : kSubcells) {
      const CoefficientSet& cs = model.at(k, j);
      ordered_json entry;
      ordered_json coeffs;
      auto values = cs.coefficients();
      for (int i = 0; i < 9; ++i) coeffs[kCoeffKeys[i]] = values[i];
      entry["coeffs"] = coeffs;
      entry["intercept"] = cs.intercept;
      if (cs.r2) entry["r2"] = *cs.r2;
      entry["n_samples"] = cs.n_samples;
      groups[to_string(j)] = entry;
    }
    regimes[to_string(k)] = groups;
  }
  doc["regimes"] = regimes;
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("failed writing model");
}

RefinementModel load_model(std::istream& in) {
  ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: invalid json: ") + e.what());
  }

  auto require = [](const ordered_json& node, const std::string& key,
                    const std::string& path) -> const ordered_json& {
    auto it = node.find(key);
    if (it == node.end()) throw DataError("model file: missing '" + path + "'");
    return *it;
  };
  auto number = [&](const ordered_json& node, const std::string& key,
                    const std::string& path) -> double {
    const ordered_json& v = require(node, key, path);
    if (!v.is_number()) throw DataError("model file: '" + path + "' is not a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw DataError("model file: '" + path + "' is not finite");
    return d;
  };

  const ordered_json& schema = require(doc, "schema", "schema");
  if (!schema.is_string() || schema.get<std::string>() != kModelSchema) {
    throw DataError("model file: schema mismatch, expected '" + std::string(kModelSchema) +
                    "', got '" + schema.dump() + "'");
  }

  RefinementModel model;
  model.cell_dt_s = number(doc, "cell_dt_s", "cell_dt_s");
  model.cell_dx_m = number(doc, "cell_dx_m", "cell_dx_m");
  model.threshold_kmh = number(doc, "threshold_kmh", "threshold_kmh");
  if (!(model.cell_dt_s > 0.0) || !(model.cell_dx_m > 0.0) || !(model.threshold_kmh > 0.0)) {
    throw DataError("model file: cell size and threshold must be positive");
  }

  const ordered_json& regimes = require(doc, "regimes", "regimes");
  for (Regime k : {Regime::ff, Regime::cg}) {
    std::string kpath = std::string("regimes/") + to_string(k);
    auto kit = regimes.find(to_string(k));
    if (kit == regimes.end()) throw DataError("model file: missing '" + kpath + "'");
    for (SubcellId j : kSubcells) {
      std::string jpath = kpath + "/" + to_string(j);
      auto jit = kit->find(to_string(j));
      if (jit == kit->end()) throw DataError("model file: missing '" + jpath + "'");
      const ordered_json& entry = *jit;
      const ordered_json& coeffs = require(entry, "coeffs", jpath + "/coeffs");
      std::array<double, 9> values{};
      for (int i = 0; i < 9; ++i) {
        values[i] = number(coeffs, kCoeffKeys[i], jpath + "/coeffs/" + kCoeffKeys[i]);
      }
      CoefficientSet cs;
      cs.p_c = values[0];
      cs.p_ll = values[1];
      cs.p_lw = values[2];
      cs.p_lr = values[3];
      cs.p_rt = values[4];
      cs.p_ur = values[5];
      cs.p_up = values[6];
      cs.p_ul = values[7];
      cs.p_lf = values[8];
      cs.intercept = number(entry, "intercept", jpath + "/intercept");
      if (entry.contains("r2")) {
        cs.r2 = number(entry, "r2", jpath + "/r2");
      }
      const ordered_json& n = require(entry, "n_samples", jpath + "/n_samples");
      if (!n.is_number_integer()) {
        throw DataError("model file: '" + jpath + "/n_samples' is not an integer");
      }
      cs.n_samples = n.get<std::int64_t>();
      model.at(k, j) = cs;
    }
  }
  return model;
}

void save_model_file(const RefinementModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  save_model(model, out);
}

RefinementModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  try {
    return load_model(in);
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace tsr
