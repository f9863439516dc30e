#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version (namespace
// lipmom::kernels) and a serial reference (lipmom::kernels::serial) that the
// tests compare against and the benchmark times. Both produce bit-identical
// results: parallel loops write disjoint outputs and reductions over
// replicates are performed serially in index order.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace lipmom {

/// Monte-Carlo mean with standard error sd / sqrt(draws).
struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

namespace kernels {

inline Estimate summarize(const std::vector<double>& samples) {
  const auto n = static_cast<double>(samples.size());
  if (samples.empty()) return {};
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  if (samples.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

namespace serial {

template <class Replicate>
std::vector<double> replicates(int draws, Replicate&& fn) {
  std::vector<double> out(static_cast<std::size_t>(draws));
  for (int d = 0; d < draws; ++d) out[static_cast<std::size_t>(d)] = fn(d);
  return out;
}

/// Symmetric matrix with entries fn(i, j), filled from the lower triangle.
template <class Entry>
Eigen::MatrixXd symmetric_fill(Eigen::Index n, Entry&& fn) {
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) out(i, j) = out(j, i) = fn(i, j);
  return out;
}

Eigen::VectorXd symmetric_matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& v);
Eigen::MatrixXd cosine_features(const Eigen::VectorXd& x, const Eigen::VectorXd& eigenvalues);

}  // namespace serial

template <class Replicate>
std::vector<double> replicates(int draws, Replicate&& fn) {
  std::vector<double> out(static_cast<std::size_t>(draws));
#pragma omp parallel for schedule(dynamic, 4)
  for (int d = 0; d < draws; ++d) out[static_cast<std::size_t>(d)] = fn(d);
  return out;
}

template <class Entry>
Eigen::MatrixXd symmetric_fill(Eigen::Index n, Entry&& fn) {
  Eigen::MatrixXd out(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) out(i, j) = out(j, i) = fn(i, j);
  return out;
}

/// a * v for symmetric a, one output entry per column dot product.
Eigen::VectorXd symmetric_matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& v);

/// Feature matrix F with F(i, k) = sqrt(lambda_k) * sqrt(2) cos(pi (k+1) x_i),
/// so that F F^T is the Gram matrix of the cosine Mercer kernel.
Eigen::MatrixXd cosine_features(const Eigen::VectorXd& x, const Eigen::VectorXd& eigenvalues);

}  // namespace kernels
}  // namespace lipmom
