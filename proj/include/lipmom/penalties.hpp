#pragma once

#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace lipmom {

enum class PenaltyKind { elastic_net, squared_hilbert_norm };

/// Even convex regularizer phi with phi(0) = 0.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::elastic_net;
  double alpha = 0.5;  // elastic net: (1 - alpha) |t|_1 + alpha |t|_2^2

  static PenaltySpec elastic_net(double alpha) { return {PenaltyKind::elastic_net, alpha}; }
  static PenaltySpec squared_hilbert_norm() { return {PenaltyKind::squared_hilbert_norm, 0.0}; }

  /// Evaluator-level check: alpha in [0,1].
  void validate() const;
  /// Estimator-level check: alpha strictly inside (0,1).
  void validate_for_estimator() const;
};

std::string to_string(PenaltyKind kind);

/// Elastic net on coefficients; squared RKHS norm a^T K a when `gram` is given.
double penalty_eval(const PenaltySpec& spec, const Eigen::VectorXd& coeffs,
                    const Eigen::MatrixXd* gram = nullptr);

/// argmin_t 1/2 |t - v|^2 + step * phi(t). For the squared Hilbert norm in
/// representer coordinates this solves (I + 2 step K) a = v.
Eigen::VectorXd penalty_prox(const PenaltySpec& spec, const Eigen::VectorXd& v, double step,
                             const Eigen::MatrixXd* gram = nullptr);

/// Quasi-triangle constant: phi(f + g) <= eta (phi(f) + phi(g)).
double eta_constant(const PenaltySpec& spec);

/// Coordinatewise soft-threshold.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double threshold);

void to_json(nlohmann::json& j, const PenaltySpec& spec);
void from_json(const nlohmann::json& j, PenaltySpec& spec);

}  // namespace lipmom
