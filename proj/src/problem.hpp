#pragma once

// Internal: hypothesis classes seen by the iterative solvers. Both keep the
// parameters together with the predictions on the training inputs so a step
// costs one pass over the touched rows.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lipmom/losses.hpp"
#include "lipmom/penalties.hpp"
#include "lipmom/rkhs.hpp"

namespace lipmom::detail {

using Rows = std::span<const Eigen::Index>;

inline Eigen::VectorXd loss_values(const LossSpec& loss, const Eigen::VectorXd& preds, const Eigen::VectorXd& y) {
  Eigen::VectorXd out(preds.size());
  for (Eigen::Index i = 0; i < preds.size(); ++i) out[i] = loss_eval(loss, preds[i], y[i]);
  return out;
}

inline double mean_loss(const LossSpec& loss, const Eigen::VectorXd& preds, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < preds.size(); ++i) s += loss_eval(loss, preds[i], y[i]);
  return s / static_cast<double>(preds.size());
}

/// Linear class t in R^p, Euclidean geometry, elastic-net prox.
class LinearProblem {
 public:
  using Params = Eigen::VectorXd;

  LinearProblem(const Eigen::MatrixXd& x, const PenaltySpec& penalty, double lambda)
      : x_(x), penalty_(penalty), lambda_(lambda) {}

  Eigen::Index samples() const { return x_.rows(); }
  Params zero() const { return Params::Zero(x_.cols()); }
  Eigen::VectorXd predict(const Params& t) const { return x_ * t; }
  double penalty(const Params& t, const Eigen::VectorXd& /*preds*/) const { return penalty_eval(penalty_, t); }
  double lambda() const { return lambda_; }

  /// t <- prox_{s lambda phi}(t - s/scale * sum_{rows} g_i x_i).
  void step(Params& t, Eigen::VectorXd& preds, Rows rows, const Eigen::VectorXd& g, double s, double scale) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(x_.cols());
    if (rows.empty()) {
      grad.noalias() = x_.transpose() * g;
    } else {
      for (std::size_t r = 0; r < rows.size(); ++r) grad += g[static_cast<Eigen::Index>(r)] * x_.row(rows[r]).transpose();
    }
    Eigen::VectorXd v = t - (s / scale) * grad;
    t = lambda_ > 0.0 ? penalty_prox(penalty_, v, s * lambda_) : v;
    preds.noalias() = x_ * t;
  }

  double distance(const Params& a, const Eigen::VectorXd&, const Params& b, const Eigen::VectorXd&) const {
    return (a - b).norm();
  }
  double norm(const Params& a, const Eigen::VectorXd&) const { return a.norm(); }

  /// |X|_op^2 / N.
  double design_curvature() const {
    if (x_.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x_.transpose() * x_, Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff()) / static_cast<double>(x_.rows());
  }
  double row_energy(Eigen::Index i) const { return x_.row(i).squaredNorm(); }

 private:
  const Eigen::MatrixXd& x_;
  PenaltySpec penalty_;
  double lambda_;
};

/// RKHS class in representer form a in R^N, RKHS geometry:
/// gradient steps move a on the touched rows, the prox of lambda |f|_H^2 is a shrink.
class KernelProblem {
 public:
  using Params = Eigen::VectorXd;

  KernelProblem(const GramOperator& gram, double lambda) : gram_(gram), lambda_(lambda) {}

  Eigen::Index samples() const { return gram_.size(); }
  Params zero() const { return Params::Zero(gram_.size()); }
  Eigen::VectorXd predict(const Params& a) const { return gram_.apply(a); }
  double penalty(const Params& a, const Eigen::VectorXd& preds) const { return std::max(0.0, a.dot(preds)); }
  double lambda() const { return lambda_; }

  void step(Params& a, Eigen::VectorXd& preds, Rows rows, const Eigen::VectorXd& g, double s, double scale) const {
    if (rows.empty()) {
      const Eigen::VectorXd delta = -(s / scale) * g;
      a += delta;
      preds += gram_.apply(delta);
    } else {
      std::vector<double> delta(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        delta[r] = -(s / scale) * g[static_cast<Eigen::Index>(r)];
        a[rows[r]] += delta[r];
      }
      preds += gram_.apply_columns(rows, delta);
    }
    if (lambda_ > 0.0) {
      const double shrink = 1.0 / (1.0 + 2.0 * s * lambda_);
      a *= shrink;
      preds *= shrink;
    }
  }

  double distance(const Params& a, const Eigen::VectorXd& pa, const Params& b, const Eigen::VectorXd& pb) const {
    return std::sqrt(std::max(0.0, (a - b).dot(pa - pb)));
  }
  double norm(const Params& a, const Eigen::VectorXd& pa) const { return std::sqrt(std::max(0.0, a.dot(pa))); }

  /// |K|_op / N.
  double design_curvature() const {
    return gram_.size() == 0 ? 0.0 : gram_.op_norm() / static_cast<double>(gram_.size());
  }
  double row_energy(Eigen::Index i) const { return gram_.diag(i); }

 private:
  const GramOperator& gram_;
  double lambda_;
};

}  // namespace lipmom::detail
