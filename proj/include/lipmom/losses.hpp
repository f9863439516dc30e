#pragma once

#include <span>
#include <string>

#include <nlohmann/json.hpp>

namespace lipmom {

enum class LossKind { logistic, hinge_classification, huber, quantile, hinge_regression };

/// A Lipschitz-convex loss u -> l(u, y) in the prediction argument u.
struct LossSpec {
  LossKind kind = LossKind::huber;
  double delta = 1.0;  // huber only
  double tau = 0.5;    // quantile only

  static LossSpec logistic() { return {LossKind::logistic, 0.0, 0.0}; }
  static LossSpec hinge_classification() { return {LossKind::hinge_classification, 0.0, 0.0}; }
  static LossSpec huber(double delta) { return {LossKind::huber, delta, 0.0}; }
  static LossSpec quantile(double tau) { return {LossKind::quantile, 0.0, tau}; }
  static LossSpec hinge_regression() { return {LossKind::hinge_regression, 0.0, 0.0}; }

  /// Throws DomainError when delta <= 0 (huber) or tau outside (0,1) (quantile).
  void validate() const;
  bool is_classification() const noexcept {
    return kind == LossKind::logistic || kind == LossKind::hinge_classification;
  }
  /// Differentiable with Lipschitz derivative (huber, logistic).
  bool is_smooth() const noexcept { return kind == LossKind::huber || kind == LossKind::logistic; }
  /// Upper bound on the second derivative for smooth kinds; 0 otherwise.
  double curvature_bound() const noexcept;
};

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

double loss_eval(const LossSpec& spec, double u, double y);

/// An element of the subdifferential of u -> l(u, y). Kinks: quantile returns
/// tau - 1/2, hinge returns 0.
double loss_subgradient(const LossSpec& spec, double u, double y);

double lipschitz_constant(const LossSpec& spec);

double empirical_risk(const LossSpec& spec, std::span<const double> predictions,
                      std::span<const double> targets);

/// Piecewise-linear kinds written as l(u, y) = max_{b in [lo, hi]} b (u - y).
/// Returns false for smooth kinds.
bool linear_dual_box(const LossSpec& spec, double y, double& lo, double& hi);

void to_json(nlohmann::json& j, const LossSpec& spec);
void from_json(const nlohmann::json& j, LossSpec& spec);

}  // namespace lipmom
