#include "lipmom/losses.hpp"

#include <algorithm>
#include <cmath>

#include "lipmom/error.hpp"

namespace lipmom {
namespace {

void check_inputs(const LossSpec& spec, double u, double y) {
  if (!std::isfinite(u) || !std::isfinite(y)) throw DomainError("loss: non-finite input");
  if (spec.is_classification() && y != 1.0 && y != -1.0)
    throw DomainError("loss: classification target must be -1 or +1");
}

}  // namespace

void LossSpec::validate() const {
  if (kind == LossKind::huber && !(delta > 0.0)) throw DomainError("huber: delta must be > 0");
  if (kind == LossKind::quantile && !(tau > 0.0 && tau < 1.0))
    throw DomainError("quantile: tau must lie in (0,1)");
}

double LossSpec::curvature_bound() const noexcept {
  switch (kind) {
    case LossKind::huber: return 1.0;
    case LossKind::logistic: return 0.25;
    default: return 0.0;
  }
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::logistic: return "logistic";
    case LossKind::hinge_classification: return "hinge_classification";
    case LossKind::huber: return "huber";
    case LossKind::quantile: return "quantile";
    case LossKind::hinge_regression: return "hinge_regression";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "logistic") return LossKind::logistic;
  if (name == "hinge_classification" || name == "hinge") return LossKind::hinge_classification;
  if (name == "huber") return LossKind::huber;
  if (name == "quantile" || name == "absolute") return LossKind::quantile;
  if (name == "hinge_regression") return LossKind::hinge_regression;
  throw DomainError("unknown loss kind: " + name);
}

double loss_eval(const LossSpec& spec, double u, double y) {
  check_inputs(spec, u, y);
  switch (spec.kind) {
    case LossKind::logistic: {
      // log(1 + exp(m)) with m = -yu, stable for large |m|
      const double m = -y * u;
      return std::max(m, 0.0) + std::log1p(std::exp(-std::abs(m)));
    }
    case LossKind::hinge_classification: return std::max(1.0 - u * y, 0.0);
    case LossKind::huber: {
      const double r = std::abs(y - u);
      return r <= spec.delta ? 0.5 * r * r : spec.delta * r - 0.5 * spec.delta * spec.delta;
    }
    case LossKind::quantile: {
      const double z = u - y;
      return z * (spec.tau - (z <= 0.0 ? 1.0 : 0.0));
    }
    case LossKind::hinge_regression: return std::max(y - u, 0.0);
  }
  return 0.0;
}

double loss_subgradient(const LossSpec& spec, double u, double y) {
  check_inputs(spec, u, y);
  switch (spec.kind) {
    case LossKind::logistic: {
      // d/du log(1 + exp(-yu)) = -y * sigmoid(-yu)
      const double m = -y * u;
      const double s = m >= 0.0 ? 1.0 / (1.0 + std::exp(-m)) : std::exp(m) / (1.0 + std::exp(m));
      return -y * s;
    }
    case LossKind::hinge_classification: return u * y < 1.0 ? -y : 0.0;
    case LossKind::huber: {
      const double r = u - y;
      return std::clamp(r, -spec.delta, spec.delta);
    }
    case LossKind::quantile: {
      const double z = u - y;
      if (z > 0.0) return spec.tau;
      if (z < 0.0) return spec.tau - 1.0;
      return spec.tau - 0.5;
    }
    case LossKind::hinge_regression: return y > u ? -1.0 : 0.0;
  }
  return 0.0;
}

double lipschitz_constant(const LossSpec& spec) {
  return spec.kind == LossKind::huber ? spec.delta : 1.0;
}

double empirical_risk(const LossSpec& spec, std::span<const double> predictions,
                      std::span<const double> targets) {
  if (predictions.size() != targets.size())
    throw DomainError("empirical_risk: length mismatch");
  if (predictions.empty()) throw DomainError("empirical_risk: empty sample");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    sum += loss_eval(spec, predictions[i], targets[i]);
  return sum / static_cast<double>(predictions.size());
}

bool linear_dual_box(const LossSpec& spec, double y, double& lo, double& hi) {
  switch (spec.kind) {
    case LossKind::quantile:
      lo = spec.tau - 1.0;
      hi = spec.tau;
      return true;
    case LossKind::hinge_regression:
      lo = -1.0;
      hi = 0.0;
      return true;
    case LossKind::hinge_classification:
      // max(1 - uy, 0) = max_{b between 0 and -y} b (u - y) since y^2 = 1
      lo = std::min(-y, 0.0);
      hi = std::max(-y, 0.0);
      return true;
    default:
      return false;
  }
}

void to_json(nlohmann::json& j, const LossSpec& spec) {
  j = nlohmann::json{{"kind", to_string(spec.kind)}};
  if (spec.kind == LossKind::huber) j["delta"] = spec.delta;
  if (spec.kind == LossKind::quantile) j["tau"] = spec.tau;
}

void from_json(const nlohmann::json& j, LossSpec& spec) {
  spec = LossSpec{};
  spec.kind = loss_kind_from_string(j.at("kind").get<std::string>());
  if (spec.kind == LossKind::huber) spec.delta = j.at("delta").get<double>();
  if (spec.kind == LossKind::quantile) spec.tau = j.value("tau", 0.5);
  spec.validate();
}

}  // namespace lipmom
