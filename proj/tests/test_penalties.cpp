#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lipmom/error.hpp"
#include "lipmom/penalties.hpp"

using namespace lipmom;

namespace {

Eigen::VectorXd random_vec(std::mt19937_64& eng, Eigen::Index n, double scale = 2.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = g(eng);
  return v;
}

Eigen::MatrixXd random_psd(std::mt19937_64& eng, Eigen::Index n) {
  Eigen::MatrixXd a(n, n);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(eng);
  return a * a.transpose() / static_cast<double>(n);
}

// 1-D prox of step * ((1-alpha)|t| + alpha t^2) by golden section on a bracket; separable
// so each coordinate is solved independently.
double scalar_prox_oracle(double v, double step, double alpha) {
  auto obj = [&](double t) { return 0.5 * (t - v) * (t - v) + step * ((1 - alpha) * std::abs(t) + alpha * t * t); };
  double lo = -std::abs(v) - 1.0, hi = std::abs(v) + 1.0;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    if (obj(a) < obj(b)) hi = b; else lo = a;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Penalties, ElasticNetValues) {
  Eigen::VectorXd t(2);
  t << 1.0, -1.0;
  EXPECT_DOUBLE_EQ(penalty_eval(PenaltySpec::elastic_net(0.5), t), 2.0);
  EXPECT_EQ(penalty_eval(PenaltySpec::elastic_net(0.3), Eigen::VectorXd::Zero(4)), 0.0);
}

TEST(Penalties, HilbertValues) {
  Eigen::MatrixXd g(1, 1);
  g << 4.0;
  Eigen::VectorXd a(1);
  a << 1.0;
  EXPECT_DOUBLE_EQ(penalty_eval(PenaltySpec::squared_hilbert_norm(), a, &g), 4.0);
  EXPECT_EQ(penalty_eval(PenaltySpec::squared_hilbert_norm(), Eigen::VectorXd::Zero(1), &g), 0.0);
  EXPECT_THROW(penalty_eval(PenaltySpec::squared_hilbert_norm(), a), DomainError);
  Eigen::MatrixXd rect(1, 2);
  EXPECT_THROW(penalty_eval(PenaltySpec::squared_hilbert_norm(), a, &rect), DomainError);
}

TEST(Penalties, ProxExamples) {
  Eigen::VectorXd v(1);
  v << 1.0;
  EXPECT_EQ(penalty_prox(PenaltySpec::elastic_net(0.0), v, 1.0)[0], 0.0);
  v << 3.0;
  EXPECT_NEAR(penalty_prox(PenaltySpec::elastic_net(0.5), v, 1.0)[0], 1.25, 1e-12);
  EXPECT_NEAR(scalar_prox_oracle(3.0, 1.0, 0.5), 1.25, 1e-6);
  Eigen::MatrixXd g(1, 1);
  g << 1.0;
  v << 2.0;
  EXPECT_NEAR(penalty_prox(PenaltySpec::squared_hilbert_norm(), v, 0.5, &g)[0], 1.0, 1e-12);
  EXPECT_THROW(penalty_prox(PenaltySpec::elastic_net(0.5), v, 0.0), DomainError);
}

TEST(Penalties, EtaIsTwo) {
  EXPECT_EQ(eta_constant(PenaltySpec::elastic_net(0.5)), 2.0);
  EXPECT_EQ(eta_constant(PenaltySpec::squared_hilbert_norm()), 2.0);
}

TEST(Penalties, AlphaRanges) {
  EXPECT_NO_THROW(PenaltySpec::elastic_net(0.0).validate());
  EXPECT_NO_THROW(PenaltySpec::elastic_net(1.0).validate());
  EXPECT_THROW(PenaltySpec::elastic_net(1.5).validate(), DomainError);
  EXPECT_THROW(PenaltySpec::elastic_net(0.0).validate_for_estimator(), DomainError);
  EXPECT_THROW(PenaltySpec::elastic_net(1.0).validate_for_estimator(), DomainError);
  EXPECT_NO_THROW(PenaltySpec::elastic_net(0.5).validate_for_estimator());
}

TEST(Penalties, QuasiTriangleEvenZero) {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> a01(0.0, 1.0);
  int fails = 0;
  for (int t = 0; t < 10000; ++t) {
    const PenaltySpec spec = PenaltySpec::elastic_net(a01(eng));
    const Eigen::VectorXd f = random_vec(eng, 6), g = random_vec(eng, 6);
    if (penalty_eval(spec, f + g) > eta_constant(spec) * (penalty_eval(spec, f) + penalty_eval(spec, g)) + 1e-10) ++fails;
    if (penalty_eval(spec, -f) != penalty_eval(spec, f)) ++fails;
  }
  for (int t = 0; t < 2000; ++t) {
    const Eigen::MatrixXd k = random_psd(eng, 5);
    const Eigen::VectorXd f = random_vec(eng, 5), g = random_vec(eng, 5);
    const auto spec = PenaltySpec::squared_hilbert_norm();
    if (penalty_eval(spec, f + g, &k) > 2.0 * (penalty_eval(spec, f, &k) + penalty_eval(spec, g, &k)) + 1e-10) ++fails;
    if (std::abs(penalty_eval(spec, -f, &k) - penalty_eval(spec, f, &k)) > 1e-12) ++fails;
    if (penalty_eval(spec, Eigen::VectorXd::Zero(5), &k) != 0.0) ++fails;
  }
  EXPECT_EQ(fails, 0);
}

TEST(Penalties, ElasticNetProxMatchesScalarOracle) {
  std::mt19937_64 eng(21);
  std::uniform_real_distribution<double> a01(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double alpha = a01(eng), step = 0.01 + 3.0 * a01(eng);
    const Eigen::VectorXd v = random_vec(eng, 3);
    const Eigen::VectorXd got = penalty_prox(PenaltySpec::elastic_net(alpha), v, step);
    for (Eigen::Index i = 0; i < v.size(); ++i)
      worst = std::max(worst, std::abs(got[i] - scalar_prox_oracle(v[i], step, alpha)));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Penalties, HilbertProxMatchesEigenOracle) {
  // In the eigenbasis of K the prox decouples: c_k = v_k / (1 + 2 step mu_k).
  std::mt19937_64 eng(31);
  std::uniform_real_distribution<double> a01(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::MatrixXd k = random_psd(eng, 4);
    const double step = 0.01 + 3.0 * a01(eng);
    const Eigen::VectorXd v = random_vec(eng, 4);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    const Eigen::VectorXd w = es.eigenvectors().transpose() * v;
    const Eigen::VectorXd oracle =
        es.eigenvectors() * (w.array() / (1.0 + 2.0 * step * es.eigenvalues().array())).matrix();
    worst = std::max(worst, (penalty_prox(PenaltySpec::squared_hilbert_norm(), v, step, &k) - oracle).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Penalties, ProxBeatsPerturbations) {
  std::mt19937_64 eng(41);
  std::uniform_real_distribution<double> a01(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 0.1);
  int fails = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto spec = PenaltySpec::elastic_net(a01(eng));
    const double step = 0.01 + 2.0 * a01(eng);
    const Eigen::VectorXd v = random_vec(eng, 5);
    const Eigen::VectorXd x = penalty_prox(spec, v, step);
    const double best = 0.5 * (x - v).squaredNorm() + step * penalty_eval(spec, x);
    for (int q = 0; q < 100; ++q) {
      Eigen::VectorXd y = x;
      for (auto& c : y) c += g(eng);
      if (0.5 * (y - v).squaredNorm() + step * penalty_eval(spec, y) < best - 1e-12) ++fails;
    }
  }
  EXPECT_EQ(fails, 0);
}

TEST(Penalties, SoftThreshold) {
  Eigen::VectorXd v(4);
  v << -3.0, -0.5, 0.5, 2.0;
  const Eigen::VectorXd s = soft_threshold(v, 1.0);
  EXPECT_EQ(s[0], -2.0);
  EXPECT_EQ(s[1], 0.0);
  EXPECT_EQ(s[2], 0.0);
  EXPECT_EQ(s[3], 1.0);
}

TEST(Penalties, JsonRoundTrip) {
  nlohmann::json j = PenaltySpec::elastic_net(0.25);
  EXPECT_EQ(j.at("kind"), "elastic_net");
  EXPECT_EQ(j.get<PenaltySpec>().alpha, 0.25);
  nlohmann::json h = PenaltySpec::squared_hilbert_norm();
  EXPECT_FALSE(h.contains("alpha"));
  EXPECT_EQ(h.get<PenaltySpec>().kind, PenaltyKind::squared_hilbert_norm);
}
