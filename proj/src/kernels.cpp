#include "lipmom/kernels.hpp"

#include <numbers>

namespace lipmom::kernels {
namespace {

// cos(pi k x) for k = 1..K by the Chebyshev recurrence; x is one point.
inline void cosine_row(double x, const Eigen::VectorXd& eigenvalues, double* row, Eigen::Index stride) {
  const Eigen::Index k_max = eigenvalues.size();
  const double c1 = std::cos(std::numbers::pi * x);
  double prev = 1.0;
  double cur = c1;
  for (Eigen::Index k = 0; k < k_max; ++k) {
    row[k * stride] = std::sqrt(2.0 * eigenvalues[k]) * cur;
    const double next = 2.0 * c1 * cur - prev;
    prev = cur;
    cur = next;
  }
}

}  // namespace

namespace serial {

Eigen::VectorXd symmetric_matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(a.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    out[i] = a.col(i).dot(v);
  }
  return out;
}

Eigen::MatrixXd cosine_features(const Eigen::VectorXd& x, const Eigen::VectorXd& eigenvalues) {
  Eigen::MatrixXd f(x.size(), eigenvalues.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) cosine_row(x[i], eigenvalues, &f(i, 0), f.rows());
  return f;
}

}  // namespace serial

Eigen::VectorXd symmetric_matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(a.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    out[i] = a.col(i).dot(v);
  }
  return out;
}

Eigen::MatrixXd cosine_features(const Eigen::VectorXd& x, const Eigen::VectorXd& eigenvalues) {
  Eigen::MatrixXd f(x.size(), eigenvalues.size());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < x.size(); ++i) cosine_row(x[i], eigenvalues, &f(i, 0), f.rows());
  return f;
}

}  // namespace lipmom::kernels
