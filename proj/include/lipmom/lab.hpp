#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lipmom/datagen.hpp"
#include "lipmom/kernels.hpp"
#include "lipmom/solvers.hpp"

namespace lipmom {

struct ExperimentConfig {
  std::string scenario;  // rate_scaling | breakdown | lepski_demo | rerm_vs_mom
  std::uint64_t seed = 1;
  int replicates = 5;
  /// Record wall-clock time per row. Off by default so reports are byte-reproducible.
  bool timing = false;
  /// Scenario settings; absent keys take the scenario defaults.
  nlohmann::json params = nlohmann::json::object();

  void validate() const;
};

void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

struct ReportRow {
  std::string scenario;
  std::string cell;
  int rep = 0;
  Eigen::Index N = 0;
  Eigen::Index p = 0;
  double frac = 0.0;
  Eigen::Index S = 1;
  double lambda = 0.0;
  std::string estimator;
  double l2_error = 0.0;
  double excess_risk = 0.0;
  int iters = 0;
  double wall_ms = 0.0;
};

inline constexpr const char* kRowsHeader =
    "scenario,cell,rep,N,p,frac,S,lambda,estimator,l2_error,excess_risk,iters,wall_ms";

struct LabReport {
  std::vector<ReportRow> rows;
  nlohmann::json summary;
  bool passed = false;
};

/// |f - f*|^2 in L2(mu): |t - t*|^2 for linear truths (isotropic design), a
/// midpoint-rule average on `grid_points` points of [0,1] for kernel truths.
Estimate l2_error(const Model& model, const Truth& truth, int grid_points = 2000);

/// Holdout estimate of P(l_f - l_f*).
double excess_risk(const Model& model, const Dataset& holdout, const LossSpec& loss);

/// Least-squares slope of log(err) against log(n).
double loglog_slope(const std::vector<double>& n, const std::vector<double>& err);

LabReport run_rate_scaling(const ExperimentConfig& cfg);
LabReport run_breakdown(const ExperimentConfig& cfg);
LabReport run_lepski_demo(const ExperimentConfig& cfg);
LabReport run_rerm_vs_mom(const ExperimentConfig& cfg);
LabReport run_experiment(const ExperimentConfig& cfg);

void write_rows_csv(std::ostream& out, const std::vector<ReportRow>& rows);
/// rows.csv and summary.json under `dir` (created if missing).
void write_report(const std::string& dir, const LabReport& report);

}  // namespace lipmom
