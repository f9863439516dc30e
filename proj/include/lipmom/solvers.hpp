#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lipmom/datagen.hpp"
#include "lipmom/losses.hpp"
#include "lipmom/penalties.hpp"
#include "lipmom/rkhs.hpp"

namespace lipmom {

struct StepRule {
  enum class Kind { automatic, fixed, diminishing };
  Kind kind = Kind::automatic;
  /// fixed: the step s. diminishing: c in c / sqrt(k + 1).
  double value = 1.0;

  static StepRule fixed(double s) { return {Kind::fixed, s}; }
  static StepRule diminishing(double c) { return {Kind::diminishing, c}; }
};

struct SolverConfig {
  int max_iters = 5000;
  /// automatic: 1/L_smooth for smooth losses, diminishing (c = 1/L_design) otherwise.
  StepRule step;
  /// Stopping threshold: relative duality gap (dual route), prox-gradient
  /// residual relative to 1 + |t| (smooth route), relative objective change
  /// over a window (subgradient route).
  double tolerance = 1e-10;
  bool reshuffle_blocks = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct KernelFit {
  KernelSpec kernel;
  KernelModel model;
};

/// Fitted predictor with its optimization record.
struct Model {
  std::variant<Eigen::VectorXd, KernelFit> params;
  /// Best objective after each iteration (nonincreasing for RERM).
  std::vector<double> objective_trace;
  int iterations = 0;
  /// Composite objective (RERM) or robust sup-criterion estimate (MOM).
  double objective = 0.0;
  /// Smooth route: |t - prox(t - s grad)|. Dual route: duality gap.
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::string method;

  bool is_linear() const noexcept { return std::holds_alternative<Eigen::VectorXd>(params); }
  const Eigen::VectorXd& coeffs() const { return std::get<Eigen::VectorXd>(params); }
  const KernelFit& kernel() const { return std::get<KernelFit>(params); }
};

Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& inputs);

/// Penalty of the fitted function: elastic net of coefficients or squared RKHS norm.
double model_penalty(const Model& model, const PenaltySpec& penalty);

/// Composite empirical objective P_N l_f + lambda phi(f) on `data`.
double composite_objective(const Model& model, const Dataset& data, const LossSpec& loss,
                           const PenaltySpec& penalty, double lambda);

/// RERM: argmin_f P_N l_f + lambda phi(f). Linear class with elastic net, or
/// RKHS class (representer form) with the squared Hilbert norm when `kernel`
/// is given. Routes: FISTA prox-gradient (smooth loss), dual coordinate ascent
/// with duality-gap certificate (piecewise-linear loss, lambda > 0),
/// prox-subgradient with diminishing steps (piecewise-linear loss, lambda = 0).
Model fit_rerm(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty, double lambda,
               const SolverConfig& cfg, const std::optional<KernelSpec>& kernel = std::nullopt);

/// Same, with a precomputed Gram operator for kernel fits.
Model fit_rerm(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty, double lambda,
               const SolverConfig& cfg, const KernelSpec& kernel, const GramOperator& gram);

/// |t - prox_{s lambda phi}(t - s grad R_N(t))| at a linear model, s = 1/L_smooth.
double prox_gradient_residual(const Model& model, const Dataset& data, const LossSpec& loss,
                              const PenaltySpec& penalty, double lambda);

/// MOM_S(l_f - l_g): lower median (sorted index ceil(S/2)) of the block means.
double mom_of_increments(const LossSpec& loss, const Model& f, const Model& g, const Dataset& data,
                         const BlockPartition& partition);

/// Lower median of block means of `values` over the partition; `block` receives
/// the selected block index.
double median_of_block_means(const Eigen::VectorXd& values, const BlockPartition& partition,
                             std::size_t* block = nullptr);

/// Minmax MOM estimator argmin_f sup_g MOM_S(l_f - l_g) + lambda (phi(f) - phi(g))
/// by alternating median-block prox-gradient descent (f) / ascent (g).
Model fit_mom_minmax(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty, double lambda,
                     Eigen::Index blocks, const SolverConfig& cfg,
                     const std::optional<KernelSpec>& kernel = std::nullopt);

struct LepskiConfig {
  int M_bound = 1;
  double A_star = 1.0;
};

struct LepskiGridPoint {
  int j = 0;  // 1-based index in phi_j = 2^j / 2^M
  double phi = 0.0;
  double lambda = 0.0;
  double radius = 0.0;  // r_j
};

struct LepskiState {
  int M_bound = 1;
  double A_star = 1.0;
  /// Grid ordered by nonincreasing lambda (k* indexes this order, 1-based).
  std::vector<LepskiGridPoint> grid;
  bool reordered = false;
  std::vector<Model> fitted;
  /// tests(j, m) = T_{lambda_j}(f_m).
  Eigen::MatrixXd tests;
  Eigen::VectorXd thresholds;
  int k_star = 0;
  int selected = 0;  // 1-based position of f_tilde in `grid`

  std::size_t size() const noexcept { return grid.size(); }
  const Model& f_tilde() const { return fitted.at(static_cast<std::size_t>(selected - 1)); }
  /// f_m in R_j.
  bool accepts(int j, int m) const;
};

/// Grid size J = M + ceil(log2 M).
int lepski_grid_size(int M_bound);

/// r_j for a given phi_j.
using RadiusOracle = std::function<double(double phi)>;

LepskiState lepski_select(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty,
                          const LepskiConfig& lep, const SolverConfig& cfg, const RadiusOracle& oracle,
                          const std::optional<KernelSpec>& kernel = std::nullopt);

/// Selection step alone, from a precomputed test matrix.
void lepski_choose(LepskiState& state);

void to_json(nlohmann::json& j, const SolverConfig& cfg);
void from_json(const nlohmann::json& j, SolverConfig& cfg);
void to_json(nlohmann::json& j, const Model& model);

}  // namespace lipmom
