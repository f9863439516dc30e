#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lipmom/datagen.hpp"
#include "lipmom/kernels.hpp"

namespace lipmom {

/// sup <g, t> over |t|_1 <= rho, |t|_2 <= r, via min_mu mu rho + r |soft(g, mu)|_2.
double sup_inner_product_l1l2(const Eigen::VectorXd& g, double rho, double r);

/// sup <s, c> over sum c_k^2 / (rho^2 mu_k) <= 1, sum c_k^2 <= r^2 (two-ellipsoid dual).
double sup_inner_product_ellipsoid(const Eigen::VectorXd& s, double rho, double r, const Eigen::VectorXd& mu);

struct L1L2Set {
  double rho = 1.0;
  double r = 1.0;
  Eigen::Index p = 1;
};
struct L2BallSet {
  double r = 1.0;
  Eigen::Index p = 1;
};
/// {f in H_K : |f|_H <= rho, |f|_{L2} <= r} in the Mercer eigenbasis.
struct KernelEllipsoidSet {
  double rho = 1.0;
  double r = 1.0;
  Eigen::VectorXd eigenvalues;
};
using WidthSet = std::variant<L1L2Set, L2BallSet, KernelEllipsoidSet>;

/// E sup_{h in H} <G, h> by Monte Carlo, one independent stream per draw.
Estimate gaussian_mean_width_mc(const WidthSet& set, int draws, std::uint64_t seed);

struct LinearClass {
  double rho = 1.0;  // l1 radius
  double r = 1.0;    // l2 radius
};
/// RKHS-norm ball of radius rho intersected with the empirical L2 ball of radius r.
struct KernelClass {
  double rho_norm = 1.0;
  double r = 1.0;
  Eigen::MatrixXd gram;
};
/// A single function through its values on the sample.
struct FixedFunction {
  Eigen::VectorXd values;
};
using RademacherClass = std::variant<LinearClass, KernelClass, FixedFunction>;

/// E sup_h |sum_i sigma_i h(X_i)| over the sample rows (design ignored for
/// KernelClass and FixedFunction beyond its size).
Estimate rademacher_complexity_mc(const RademacherClass& cls, const Eigen::MatrixXd& design, int draws,
                                  std::uint64_t seed);

/// sqrt(2) |K|_inf (sum_k min(rho^2 lambda_k, r^2))^(1/2).
double kernel_complexity_bound(double rho_norm, double r, const Eigen::VectorXd& eigenvalues, double sup_K);

enum class FixedPointShape {
  gaussian_width,   // 32 L B w(r) <= sqrt(N) r^2 / (2A)
  mom_rademacher,   // E sup <= r^2 |J| / (384 A L)
  rkhs_rademacher,  // E sup <= N r^2 / (64 A L)
};

struct FixedPointInputs {
  FixedPointShape shape = FixedPointShape::gaussian_width;
  double A = 1.0;
  double L = 1.0;
  double B = 1.0;
  double N = 1.0;  // sample size, or |J| for the MOM shape
  double tol = 1e-3;
  double eps = 1e-9;
};

/// Complexity at radius r (nondecreasing in r; Monte-Carlo oracles should use
/// common random numbers across r).
using ComplexityOracle = std::function<Estimate(double r)>;

struct FixedPointCertificate {
  double lhs_at = 0.0;
  double rhs_at = 0.0;
  double stderr_at = 0.0;
  double lhs_below = 0.0;
  double rhs_below = 0.0;
  double stderr_below = 0.0;
  /// lhs <= rhs at the radius, up to 2 standard errors.
  bool holds = false;
  /// lhs > rhs at radius / 1.1, up to 2 standard errors.
  bool fails_below = false;
};

struct FixedPointResult {
  double radius = 0.0;
  double A = 1.0;
  double mc_stderr = 0.0;
  FixedPointCertificate certificate;
  int evaluations = 0;
};

/// Left side of the defining inequality for a complexity value.
double fixed_point_lhs(const FixedPointInputs& in, double complexity);
/// Right side at radius r.
double fixed_point_rhs(const FixedPointInputs& in, double r);

/// Smallest r with lhs(r) <= rhs(r): doubling bracket then bisection to tol relative.
FixedPointResult fixed_point_solve(const ComplexityOracle& oracle, const FixedPointInputs& in);

/// phi-ball radius eta (4 + 2/A) phi(f*) of the localized sets.
double localization_radius(double eta, double A, double phi_star);

struct ElasticNetRadii {
  double r1_sq = 0.0;
  double r2_sq = 0.0;
  double r_star_sq = 0.0;
};

/// Closed-form two-branch radii for the elastic net (isotropic design).
ElasticNetRadii elastic_net_r_star(double N, double p, double alpha, double delta, double B, double A,
                                   double phi_star);

struct KernelRadii {
  double r_bar_sq = 0.0;
  double r_tilde_sq = 0.0;
  double C_const = 0.0;
};

/// C(A, beta, L, p), r_tilde^2 = C |f*|^(2p/(p+1)) / N^(1/(p+1)) and r_bar^2 = r_tilde^2 / 6.
KernelRadii kernel_r_bar(double A, double beta, double L, double p_decay, double f_star_norm, double N);

/// max(r_tilde^2, 368 A^2 L^2 S / N).
double c_s_r(double A, double L, double S, double N, double r_tilde_sq);

struct MomentRow {
  int q = 0;
  double norm = 0.0;   // (mean |Z|^q)^(1/q)
  double ratio = 0.0;  // norm / sqrt(q)
};

std::vector<MomentRow> moment_growth_diagnostic(const std::vector<double>& samples, int q_max);

/// MOM complexity radius for the linear class rho B_1 cap r B_2 on a design
/// sample: the inequality is checked on J = all rows and J = a random half,
/// the larger radius is returned.
FixedPointResult mom_linear_radius(const Eigen::MatrixXd& design, double rho, const FixedPointInputs& in,
                                   int draws, std::uint64_t seed);

/// r(A) for a complexity that is linear in r, w(r) = r.
FixedPointResult linear_analytic_radius(const FixedPointInputs& in);

/// r(A) for the elastic-net class on an isotropic design: the localized set is
/// bounded by (R/(1-alpha)) B_1 cap min(r, sqrt(R/alpha)) B_2, R = eta (4 + 2/A) phi(f*).
FixedPointResult elastic_net_width_radius(Eigen::Index p, double alpha, double eta, double phi_star,
                                          const FixedPointInputs& in, int draws, std::uint64_t seed);

/// r_bar(A) from the spectral bound: sqrt(N) kernel_complexity_bound(rho, r) against N r^2 / (64 A L),
/// rho = 2 sqrt(2 + 1/A) |f*|_H.
FixedPointResult kernel_bound_radius(const Eigen::VectorXd& eigenvalues, double sup_K, double f_star_norm,
                                     const FixedPointInputs& in);

struct BernsteinCheck {
  double gamma = 0.0;
  double A_out = 0.0;  // 4 / gamma
  double C_prime = 0.0;
  double epsilon = 0.0;
  double radius_checked = 0.0;
  double a = 0.0;  // half-width of the CDF window (huber)
  bool holds = false;
};

double noise_cdf(const NoiseSpec& noise, double x);
double noise_density(const NoiseSpec& noise, double x);

/// gamma = F_W(a) - F_W(-a), a = delta - 2 C'^2 r.
BernsteinCheck bernstein_gamma_huber(const NoiseSpec& noise, double delta, double C_prime, double r);

/// gamma = min(1, inf of the noise density on [-R, R]).
BernsteinCheck bernstein_gamma_quantile(const NoiseSpec& noise, double radius_R);

/// C' = (rho |K|_inf / r)^(eps / (2 + eps)).
double c_prime_rkhs(double rho_norm, double sup_K, double r, double epsilon);

void to_json(nlohmann::json& j, const FixedPointResult& res);
void to_json(nlohmann::json& j, const BernsteinCheck& chk);

}  // namespace lipmom
