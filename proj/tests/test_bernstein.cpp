#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lipmom/error.hpp"
#include "lipmom/theory.hpp"

using namespace lipmom;

namespace {

// Simpson's rule on the density, independent of the closed-form CDFs.
double integrate_density(const NoiseSpec& noise, double lo, double hi) {
  const int n = 20000;
  const double h = (hi - lo) / n;
  double acc = noise_density(noise, lo) + noise_density(noise, hi);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * noise_density(noise, lo + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST(BernsteinHuber, CauchyUnitWindow) {
  // delta - 2 C'^2 r = 1
  const BernsteinCheck chk = bernstein_gamma_huber(NoiseSpec::cauchy(), 2.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(chk.a, 1.0);
  EXPECT_NEAR(chk.gamma, 0.5, 1e-15);
  EXPECT_NEAR(chk.A_out, 8.0, 1e-12);
  EXPECT_TRUE(chk.holds);
}

TEST(BernsteinHuber, GaussianErfOracle) {
  const BernsteinCheck chk = bernstein_gamma_huber(NoiseSpec::gaussian(1.0), 1.5, 0.5, 1.0);
  const double phi1 = 0.5 * (1.0 + std::erf(1.0 / std::sqrt(2.0)));
  EXPECT_NEAR(chk.gamma, 2.0 * phi1 - 1.0, 1e-10);
  EXPECT_NEAR(chk.gamma, 0.6827, 1e-4);
}

TEST(BernsteinHuber, UniformFullMass) {
  const BernsteinCheck chk = bernstein_gamma_huber(NoiseSpec::uniform(1.0), 2.0, 1.0, 0.5);
  EXPECT_EQ(chk.gamma, 1.0);
  EXPECT_EQ(chk.A_out, 4.0);
}

TEST(BernsteinHuber, StudentMatchesQuadrature) {
  for (double nu : {1.5, 3.0, 10.0}) {
    const NoiseSpec w = NoiseSpec::student(nu, 0.7);
    const BernsteinCheck chk = bernstein_gamma_huber(w, 1.3, 0.8, 0.4);
    EXPECT_NEAR(chk.gamma, integrate_density(w, -chk.a, chk.a), 1e-9) << nu;
  }
}

TEST(BernsteinHuber, ClosedFormsMatchQuadrature) {
  for (const NoiseSpec& w : {NoiseSpec::gaussian(0.6), NoiseSpec::cauchy(2.0)}) {
    const BernsteinCheck chk = bernstein_gamma_huber(w, 1.0, 0.3, 0.9);
    EXPECT_NEAR(chk.gamma, integrate_density(w, -chk.a, chk.a), 1e-9);
  }
}

TEST(BernsteinHuber, EmptyWindowReportsZero) {
  const BernsteinCheck chk = bernstein_gamma_huber(NoiseSpec::gaussian(1.0), 1.0, 1.0, 0.5);
  EXPECT_EQ(chk.gamma, 0.0);
  EXPECT_FALSE(chk.holds);
  EXPECT_TRUE(std::isinf(chk.A_out));
  const nlohmann::json j = chk;
  EXPECT_TRUE(j["A_out"].is_null());
}

TEST(BernsteinHuber, Monotone) {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (const NoiseSpec& w : {NoiseSpec::gaussian(1.0), NoiseSpec::cauchy(1.0), NoiseSpec::student(4.0), NoiseSpec::uniform(1.5)}) {
    for (int t = 0; t < 500; ++t) {
      const double d = u(eng) * 3, c = u(eng), r = u(eng);
      const double g = bernstein_gamma_huber(w, d, c, r).gamma;
      EXPECT_LE(bernstein_gamma_huber(w, d, c, r * 1.2).gamma, g);
      EXPECT_GE(bernstein_gamma_huber(w, d * 1.2, c, r).gamma, g);
    }
  }
}

TEST(BernsteinHuber, Errors) {
  EXPECT_THROW(bernstein_gamma_huber(NoiseSpec::gaussian(1.0), 0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(bernstein_gamma_huber(NoiseSpec::gaussian(1.0), 1.0, -1.0, 1.0), DomainError);
  EXPECT_THROW(noise_cdf(NoiseSpec::gaussian(0.0), 0.0), DomainError);
}

TEST(BernsteinQuantile, CauchyBoundaryDensity) {
  EXPECT_NEAR(bernstein_gamma_quantile(NoiseSpec::cauchy(), 1.0).gamma, 1.0 / (2.0 * std::numbers::pi), 1e-15);
}

TEST(BernsteinQuantile, UnitNormClosedForm) {
  // 36 |f*|^2 |K|^2 = 36 corresponds to R = 6
  const BernsteinCheck chk = bernstein_gamma_quantile(NoiseSpec::cauchy(), 6.0);
  EXPECT_NEAR(chk.gamma, std::min(1.0, 1.0 / (37.0 * std::numbers::pi)), 1e-15);
}

TEST(BernsteinQuantile, DegenerateIntervalIsPeakDensity) {
  for (const NoiseSpec& w : {NoiseSpec::gaussian(0.3), NoiseSpec::cauchy(0.5), NoiseSpec::student(3.0, 2.0), NoiseSpec::uniform(2.0)}) {
    const double g = bernstein_gamma_quantile(w, 0.0).gamma;
    EXPECT_NEAR(g, std::min(1.0, noise_density(w, 0.0)), 1e-15);
    for (double x : {0.1, 0.5, 1.0, 3.0}) EXPECT_LE(std::min(1.0, noise_density(w, x)), g);
  }
  // a narrow gaussian has peak density above one; gamma is capped
  EXPECT_EQ(bernstein_gamma_quantile(NoiseSpec::gaussian(0.1), 0.0).gamma, 1.0);
}

TEST(BernsteinQuantile, InfimumOverInterval) {
  // brute-force the infimum on a fine grid
  for (const NoiseSpec& w : {NoiseSpec::gaussian(1.0), NoiseSpec::student(2.5), NoiseSpec::cauchy(1.0)}) {
    const double R = 1.7;
    double inf = INFINITY;
    for (int i = 0; i <= 10000; ++i) inf = std::min(inf, noise_density(w, -R + 2 * R * i / 10000.0));
    EXPECT_NEAR(bernstein_gamma_quantile(w, R).gamma, std::min(1.0, inf), 1e-12);
  }
  EXPECT_THROW(bernstein_gamma_quantile(NoiseSpec::cauchy(), -1.0), DomainError);
}

TEST(BernsteinCPrime, Formula) {
  EXPECT_NEAR(c_prime_rkhs(2.0, 1.5, 0.5, 1.0), std::pow(6.0, 1.0 / 3.0), 1e-14);
  EXPECT_EQ(c_prime_rkhs(1.0, 1.0, 1.0, 0.7), 1.0);
  EXPECT_THROW(c_prime_rkhs(1.0, 1.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(c_prime_rkhs(1.0, 1.0, 1.0, 0.0), DomainError);
}
