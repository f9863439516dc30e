#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "lipmom/error.hpp"
#include "lipmom/theory.hpp"

namespace lipmom {
namespace {

void check_noise(const NoiseSpec& noise) {
  if (!(noise.scale > 0.0)) throw DomainError("bernstein: noise scale must be > 0");
  if (noise.kind == NoiseKind::student && !(noise.nu > 0.0)) throw DomainError("bernstein: nu must be > 0");
}

BernsteinCheck finish(BernsteinCheck chk) {
  chk.holds = chk.gamma > 0.0;
  chk.A_out = chk.holds ? 4.0 / chk.gamma : std::numeric_limits<double>::infinity();
  return chk;
}

}  // namespace

double noise_cdf(const NoiseSpec& noise, double x) {
  check_noise(noise);
  const double z = x / noise.scale;
  switch (noise.kind) {
    case NoiseKind::gaussian: return 0.5 * std::erfc(-z / std::numbers::sqrt2);
    case NoiseKind::cauchy: return 0.5 + std::atan(z) / std::numbers::pi;
    case NoiseKind::student: return boost::math::cdf(boost::math::students_t(noise.nu), z);
    case NoiseKind::uniform: return std::clamp(0.5 * (z + 1.0), 0.0, 1.0);
  }
  throw DomainError("bernstein: unsupported noise law");
}

double noise_density(const NoiseSpec& noise, double x) {
  check_noise(noise);
  const double z = x / noise.scale;
  switch (noise.kind) {
    case NoiseKind::gaussian: return std::exp(-0.5 * z * z) / (noise.scale * std::sqrt(2.0 * std::numbers::pi));
    case NoiseKind::cauchy: return 1.0 / (std::numbers::pi * noise.scale * (1.0 + z * z));
    case NoiseKind::student: return boost::math::pdf(boost::math::students_t(noise.nu), z) / noise.scale;
    case NoiseKind::uniform: return std::abs(z) <= 1.0 ? 0.5 / noise.scale : 0.0;
  }
  throw DomainError("bernstein: unsupported noise law");
}

BernsteinCheck bernstein_gamma_huber(const NoiseSpec& noise, double delta, double C_prime, double r) {
  if (!(delta > 0.0) || C_prime < 0.0 || r < 0.0) throw DomainError("bernstein_gamma_huber: invalid inputs");
  BernsteinCheck chk;
  chk.C_prime = C_prime;
  chk.radius_checked = r;
  chk.a = delta - 2.0 * C_prime * C_prime * r;
  if (chk.a <= 0.0) {
    chk.gamma = 0.0;
    return finish(chk);
  }
  const double z = chk.a / noise.scale;
  switch (noise.kind) {
    // closed forms of F(a) - F(-a); the cdf difference loses digits in the tails
    case NoiseKind::gaussian: chk.gamma = std::erf(z / std::numbers::sqrt2); break;
    case NoiseKind::cauchy: chk.gamma = 2.0 / std::numbers::pi * std::atan(z); break;
    case NoiseKind::uniform: chk.gamma = std::min(1.0, z); break;
    case NoiseKind::student: chk.gamma = noise_cdf(noise, chk.a) - noise_cdf(noise, -chk.a); break;
  }
  return finish(chk);
}

BernsteinCheck bernstein_gamma_quantile(const NoiseSpec& noise, double radius_R) {
  if (radius_R < 0.0) throw DomainError("bernstein_gamma_quantile: radius must be >= 0");
  BernsteinCheck chk;
  chk.radius_checked = radius_R;
  // symmetric unimodal laws: the infimum over [-R, R] sits at the boundary
  chk.gamma = std::min(1.0, noise_density(noise, radius_R));
  return finish(chk);
}

double c_prime_rkhs(double rho_norm, double sup_K, double r, double epsilon) {
  if (!(r > 0.0) || rho_norm < 0.0 || sup_K < 0.0 || !(epsilon > 0.0))
    throw DomainError("c_prime_rkhs: invalid inputs");
  return std::pow(rho_norm * sup_K / r, epsilon / (2.0 + epsilon));
}

void to_json(nlohmann::json& j, const BernsteinCheck& chk) {
  j = {{"gamma", chk.gamma}, {"C_prime", chk.C_prime}, {"epsilon", chk.epsilon},
       {"radius_checked", chk.radius_checked}, {"a", chk.a}, {"holds", chk.holds}};
  j["A_out"] = std::isfinite(chk.A_out) ? nlohmann::json(chk.A_out) : nlohmann::json(nullptr);
}

}  // namespace lipmom
