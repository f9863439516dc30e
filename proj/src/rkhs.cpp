#include "lipmom/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lipmom/error.hpp"
#include "lipmom/kernels.hpp"

namespace lipmom {
namespace {

void check_unit_interval(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("synthetic_mercer: input outside [0,1]");
}

std::span<const double> row_span(const Eigen::MatrixXd& m, Eigen::Index i, std::vector<double>& buf) {
  buf.resize(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) buf[static_cast<std::size_t>(j)] = m(i, j);
  return buf;
}

}  // namespace

void KernelSpec::validate() const {
  if (kind == KernelKind::rbf && !(bandwidth > 0.0)) throw DomainError("rbf: bandwidth must be > 0");
  if (kind == KernelKind::synthetic_mercer) {
    if (!(beta > 0.0)) throw DomainError("synthetic_mercer: beta must be > 0");
    if (!(p_decay > 0.0)) throw DomainError("synthetic_mercer: p_decay must be > 0");
    if (k_max < 1) throw DomainError("synthetic_mercer: k_max must be >= 1");
  }
}

Eigen::VectorXd KernelSpec::eigenvalues() const {
  if (kind != KernelKind::synthetic_mercer) throw DomainError("eigenvalues: synthetic_mercer only");
  Eigen::VectorXd ev(k_max);
  for (int k = 0; k < k_max; ++k) ev[k] = beta * std::pow(static_cast<double>(k + 1), -1.0 / p_decay);
  return ev;
}

double KernelSpec::sup_norm() const {
  if (kind == KernelKind::rbf) return 1.0;
  return 2.0 * eigenvalues().sum();
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("kernel_eval: dimension mismatch");
  if (spec.kind == KernelKind::rbf) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    return std::exp(-d2 / (2.0 * spec.bandwidth * spec.bandwidth));
  }
  if (x.size() != 1) throw DomainError("synthetic_mercer: inputs are scalars in [0,1]");
  return kernel_eval(spec, x[0], y[0]);
}

double kernel_eval(const KernelSpec& spec, double x, double y) {
  if (spec.kind == KernelKind::rbf) {
    const double d = x - y;
    return std::exp(-d * d / (2.0 * spec.bandwidth * spec.bandwidth));
  }
  check_unit_interval(x);
  check_unit_interval(y);
  // 2 cos(a) cos(b) = cos(a - b) + cos(a + b); both by Chebyshev recurrence.
  const double cm = std::cos(std::numbers::pi * (x - y));
  const double cp = std::cos(std::numbers::pi * (x + y));
  double pm = 1.0, qm = cm, pp = 1.0, qp = cp, sum = 0.0;
  for (int k = 1; k <= spec.k_max; ++k) {
    sum += spec.beta * std::pow(static_cast<double>(k), -1.0 / spec.p_decay) * (qm + qp);
    const double nm = 2.0 * cm * qm - pm;
    const double np = 2.0 * cp * qp - pp;
    pm = qm;
    qm = nm;
    pp = qp;
    qp = np;
  }
  return sum;
}

Eigen::MatrixXd mercer_features(const KernelSpec& spec, const Eigen::MatrixXd& points) {
  if (spec.kind != KernelKind::synthetic_mercer) throw DomainError("mercer_features: synthetic_mercer only");
  if (points.cols() != 1) throw DomainError("synthetic_mercer: inputs are scalars in [0,1]");
  for (Eigen::Index i = 0; i < points.rows(); ++i) check_unit_interval(points(i, 0));
  return kernels::cosine_features(points.col(0), spec.eigenvalues());
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points) {
  spec.validate();
  const Eigen::Index n = points.rows();
  if (spec.kind == KernelKind::synthetic_mercer) {
    const Eigen::MatrixXd f = mercer_features(spec, points);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    k.selfadjointView<Eigen::Lower>().rankUpdate(f);
    return k.selfadjointView<Eigen::Lower>();
  }
  return kernels::symmetric_fill(n, [&](Eigen::Index i, Eigen::Index j) {
    return std::exp(-(points.row(i) - points.row(j)).squaredNorm() /
                    (2.0 * spec.bandwidth * spec.bandwidth));
  });
}

Eigen::MatrixXd gram_matrix_reference(const KernelSpec& spec, const Eigen::MatrixXd& points) {
  spec.validate();
  std::vector<double> a, b;
  return kernels::serial::symmetric_fill(points.rows(), [&](Eigen::Index i, Eigen::Index j) {
    return kernel_eval(spec, row_span(points, i, a), row_span(points, j, b));
  });
}

GramOperator GramOperator::dense(Eigen::MatrixXd k) {
  if (k.rows() != k.cols()) throw DomainError("GramOperator: matrix not square");
  GramOperator op;
  op.n_ = k.rows();
  op.mat_ = std::move(k);
  return op;
}

GramOperator GramOperator::factored(Eigen::MatrixXd f) {
  GramOperator op;
  op.n_ = f.rows();
  op.mat_ = std::move(f);
  op.factored_ = true;
  return op;
}

Eigen::VectorXd GramOperator::apply(const Eigen::VectorXd& a) const {
  if (factored_) return mat_ * (mat_.transpose() * a);
  return kernels::symmetric_matvec(mat_, a);
}

Eigen::VectorXd GramOperator::apply_columns(std::span<const Eigen::Index> cols,
                                            std::span<const double> coeffs) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
  if (factored_) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(mat_.cols());
    for (std::size_t c = 0; c < cols.size(); ++c) w += coeffs[c] * mat_.row(cols[c]).transpose();
    out.noalias() = mat_ * w;
    return out;
  }
  for (std::size_t c = 0; c < cols.size(); ++c) out += coeffs[c] * mat_.col(cols[c]);
  return out;
}

double GramOperator::diag(Eigen::Index i) const {
  return factored_ ? mat_.row(i).squaredNorm() : mat_(i, i);
}

double GramOperator::quad(const Eigen::VectorXd& a) const {
  if (factored_) return (mat_.transpose() * a).squaredNorm();
  return std::max(0.0, a.dot(apply(a)));
}

double GramOperator::op_norm() const {
  if (n_ == 0) return 0.0;
  // power iteration from a fixed start; K is PSD so the Rayleigh quotient
  // increases monotonically towards the top eigenvalue
  Eigen::VectorXd v(n_);
  for (Eigen::Index i = 0; i < n_; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd w = apply(v);
    const double rq = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 5 && std::abs(rq - estimate) <= 1e-10 * std::abs(rq)) return rq;
    estimate = rq;
  }
  return estimate;
}

Eigen::MatrixXd GramOperator::to_dense() const {
  if (!factored_) return mat_;
  return mat_ * mat_.transpose();
}

GramOperator make_gram_operator(const KernelSpec& spec, const Eigen::MatrixXd& points) {
  spec.validate();
  if (spec.kind == KernelKind::synthetic_mercer && spec.k_max < points.rows())
    return GramOperator::factored(mercer_features(spec, points));
  return GramOperator::dense(gram_matrix(spec, points));
}

double rkhs_norm_sq(const KernelModel& model, const Eigen::MatrixXd& gram) {
  const auto n = model.coefficients.size();
  if (gram.rows() != n || gram.cols() != n) throw DomainError("rkhs_norm_sq: size mismatch");
  return std::max(0.0, model.coefficients.dot(gram * model.coefficients));
}

Eigen::VectorXd predict_kernel(const KernelSpec& spec, const KernelModel& model,
                               const Eigen::MatrixXd& queries) {
  if (model.coefficients.size() != model.training_inputs.rows())
    throw DomainError("predict_kernel: coefficient count does not match training inputs");
  if (spec.kind == KernelKind::synthetic_mercer) {
    const Eigen::VectorXd w = mercer_features(spec, model.training_inputs).transpose() * model.coefficients;
    // chunked so large query sets never hold the full feature matrix
    constexpr Eigen::Index chunk = 4096;
    Eigen::VectorXd out(queries.rows());
    for (Eigen::Index start = 0; start < queries.rows(); start += chunk) {
      const Eigen::Index len = std::min(chunk, queries.rows() - start);
      out.segment(start, len) = mercer_features(spec, queries.middleRows(start, len)) * w;
    }
    return out;
  }
  Eigen::VectorXd out(queries.rows());
  const double denom = 2.0 * spec.bandwidth * spec.bandwidth;
#pragma omp parallel for schedule(static)
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < model.training_inputs.rows(); ++i)
      s += model.coefficients[i] *
           std::exp(-(model.training_inputs.row(i) - queries.row(q)).squaredNorm() / denom);
    out[q] = s;
  }
  return out;
}

double sup_bound_from_rkhs_ball(const KernelSpec& spec, double rho_norm) {
  if (rho_norm < 0.0) throw DomainError("sup_bound_from_rkhs_ball: rho must be >= 0");
  return rho_norm * std::sqrt(spec.sup_norm());
}

void to_json(nlohmann::json& j, const KernelSpec& spec) {
  if (spec.kind == KernelKind::rbf) {
    j = {{"kind", "rbf"}, {"bandwidth", spec.bandwidth}};
  } else {
    j = {{"kind", "synthetic_mercer"}, {"beta", spec.beta}, {"p_decay", spec.p_decay}, {"k_max", spec.k_max}};
  }
}

void from_json(const nlohmann::json& j, KernelSpec& spec) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "rbf") {
    spec = KernelSpec::rbf(j.value("bandwidth", 1.0));
  } else if (kind == "synthetic_mercer") {
    spec = KernelSpec::synthetic_mercer(j.value("beta", 1.0), j.value("p_decay", 0.5), j.value("k_max", 10000));
  } else {
    throw DomainError("unknown kernel kind: " + kind);
  }
  spec.validate();
}

}  // namespace lipmom
