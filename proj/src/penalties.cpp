#include "lipmom/penalties.hpp"

#include <cassert>
#include <cmath>

#include "lipmom/error.hpp"

namespace lipmom {
namespace {

const Eigen::MatrixXd& require_gram(const Eigen::MatrixXd* gram, Eigen::Index n) {
  if (gram == nullptr) throw DomainError("squared_hilbert_norm: Gram matrix required");
  if (gram->rows() != gram->cols()) throw DomainError("squared_hilbert_norm: Gram not square");
  if (gram->rows() != n) throw DomainError("squared_hilbert_norm: Gram size mismatch");
  return *gram;
}

}  // namespace

void PenaltySpec::validate() const {
  if (kind == PenaltyKind::elastic_net && !(alpha >= 0.0 && alpha <= 1.0))
    throw DomainError("elastic_net: alpha must lie in [0,1]");
}

void PenaltySpec::validate_for_estimator() const {
  if (kind == PenaltyKind::elastic_net && !(alpha > 0.0 && alpha < 1.0))
    throw DomainError("elastic_net: estimators require alpha in (0,1)");
}

std::string to_string(PenaltyKind kind) {
  return kind == PenaltyKind::elastic_net ? "elastic_net" : "squared_hilbert_norm";
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double threshold) {
  return v.unaryExpr([threshold](double x) {
    const double m = std::abs(x) - threshold;
    return m > 0.0 ? std::copysign(m, x) : 0.0;
  });
}

double penalty_eval(const PenaltySpec& spec, const Eigen::VectorXd& coeffs,
                    const Eigen::MatrixXd* gram) {
  spec.validate();
  if (spec.kind == PenaltyKind::elastic_net)
    return (1.0 - spec.alpha) * coeffs.lpNorm<1>() + spec.alpha * coeffs.squaredNorm();
  const auto& k = require_gram(gram, coeffs.size());
  return std::max(0.0, coeffs.dot(k * coeffs));
}

Eigen::VectorXd penalty_prox(const PenaltySpec& spec, const Eigen::VectorXd& v, double step,
                             const Eigen::MatrixXd* gram) {
  spec.validate();
  if (!(step > 0.0)) throw DomainError("penalty_prox: step must be > 0");
  if (spec.kind == PenaltyKind::elastic_net)
    return soft_threshold(v, step * (1.0 - spec.alpha)) / (1.0 + 2.0 * step * spec.alpha);

  const auto& k = require_gram(gram, v.size());
  Eigen::MatrixXd shifted = 2.0 * step * k;
  shifted.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) {
    shifted.diagonal().array() += 1e-10;
    llt.compute(shifted);
  }
  assert(llt.info() == Eigen::Success);
  return llt.solve(v);
}

double eta_constant(const PenaltySpec& /*spec*/) { return 2.0; }

void to_json(nlohmann::json& j, const PenaltySpec& spec) {
  j = nlohmann::json{{"kind", to_string(spec.kind)}};
  if (spec.kind == PenaltyKind::elastic_net) j["alpha"] = spec.alpha;
}

void from_json(const nlohmann::json& j, PenaltySpec& spec) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "elastic_net") {
    spec = PenaltySpec::elastic_net(j.at("alpha").get<double>());
  } else if (kind == "squared_hilbert_norm") {
    spec = PenaltySpec::squared_hilbert_norm();
  } else {
    throw DomainError("unknown penalty kind: " + kind);
  }
  spec.validate();
}

}  // namespace lipmom
