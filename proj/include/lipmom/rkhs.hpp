#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace lipmom {

enum class KernelKind { rbf, synthetic_mercer };

/// Positive-definite kernel. `synthetic_mercer` is the cosine-basis kernel on
/// [0,1] with uniform measure: K(x,y) = sum_k lambda_k e_k(x) e_k(y),
/// e_k(x) = sqrt(2) cos(pi k x), lambda_k = beta k^(-1/p).
struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double bandwidth = 1.0;  // rbf
  double beta = 1.0;       // synthetic_mercer
  double p_decay = 0.5;    // synthetic_mercer
  int k_max = 10000;       // synthetic_mercer

  static KernelSpec rbf(double bandwidth) { return {KernelKind::rbf, bandwidth, 0.0, 0.0, 0}; }
  static KernelSpec synthetic_mercer(double beta, double p_decay, int k_max = 10000) {
    return {KernelKind::synthetic_mercer, 0.0, beta, p_decay, k_max};
  }

  void validate() const;
  /// lambda_1 >= ... >= lambda_kmax (synthetic_mercer only).
  Eigen::VectorXd eigenvalues() const;
  /// |K|_inf = sup_x K(x, x): 1 for rbf, 2 beta sum_k k^(-1/p) for the cosine kernel.
  double sup_norm() const;
};

/// f(x) = sum_i a_i K(x_i, x).
struct KernelModel {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd training_inputs;  // one row per point
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);
double kernel_eval(const KernelSpec& spec, double x, double y);

/// Dense Gram matrix; rows of `points` are the inputs. Parallel over rows.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points);
/// Entry-by-entry kernel_eval fill, serial. Reference for gram_matrix.
Eigen::MatrixXd gram_matrix_reference(const KernelSpec& spec, const Eigen::MatrixXd& points);

/// Feature matrix F with F F^T = Gram (synthetic_mercer only).
Eigen::MatrixXd mercer_features(const KernelSpec& spec, const Eigen::MatrixXd& points);

/// Gram matrix held either densely or as an exact factor K = F F^T.
class GramOperator {
 public:
  static GramOperator dense(Eigen::MatrixXd k);
  static GramOperator factored(Eigen::MatrixXd f);

  Eigen::Index size() const noexcept { return n_; }
  bool is_factored() const noexcept { return factored_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& a) const;
  /// K[:, cols] * coeffs.
  Eigen::VectorXd apply_columns(std::span<const Eigen::Index> cols, std::span<const double> coeffs) const;
  double diag(Eigen::Index i) const;
  double quad(const Eigen::VectorXd& a) const;
  /// Largest eigenvalue.
  double op_norm() const;
  Eigen::MatrixXd to_dense() const;

 private:
  Eigen::MatrixXd mat_;  // K, or F when factored
  Eigen::Index n_ = 0;
  bool factored_ = false;
};

/// Factored form for synthetic_mercer with k_max < N, dense otherwise.
GramOperator make_gram_operator(const KernelSpec& spec, const Eigen::MatrixXd& points);

double rkhs_norm_sq(const KernelModel& model, const Eigen::MatrixXd& gram);

Eigen::VectorXd predict_kernel(const KernelSpec& spec, const KernelModel& model,
                               const Eigen::MatrixXd& queries);

/// Uniform bound sup_x |f(x)| <= rho sqrt(|K|_inf) on the RKHS ball of radius rho.
double sup_bound_from_rkhs_ball(const KernelSpec& spec, double rho_norm);

void to_json(nlohmann::json& j, const KernelSpec& spec);
void from_json(const nlohmann::json& j, KernelSpec& spec);

}  // namespace lipmom
