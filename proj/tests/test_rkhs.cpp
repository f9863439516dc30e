#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lipmom/error.hpp"
#include "lipmom/rkhs.hpp"

using namespace lipmom;

namespace {

Eigen::MatrixXd random_points(std::mt19937_64& eng, Eigen::Index n, Eigen::Index d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(eng);
  return x;
}

// Direct truncated cosine sum; independent of the Chebyshev recurrence used by the library.
double mercer_direct(double beta, double p, int kmax, double x, double y) {
  double s = 0.0;
  for (int k = 1; k <= kmax; ++k)
    s += beta * std::pow(k, -1.0 / p) * 2.0 * std::cos(std::numbers::pi * k * x) * std::cos(std::numbers::pi * k * y);
  return s;
}

}  // namespace

TEST(Rkhs, KernelExamples) {
  const double x[] = {0.2, -1.0};
  EXPECT_EQ(kernel_eval(KernelSpec::rbf(0.7), x, x), 1.0);
  EXPECT_NEAR(kernel_eval(KernelSpec::synthetic_mercer(1.0, 0.5, 1), 0.0, 0.0), 2.0, 1e-14);
  EXPECT_THROW(kernel_eval(KernelSpec::synthetic_mercer(1.0, 0.5, 4), 1.2, 0.0), DomainError);
}

TEST(Rkhs, MercerMatchesDirectSum) {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double x = u(eng), y = u(eng);
    EXPECT_NEAR(kernel_eval(KernelSpec::synthetic_mercer(1.3, 0.4, 300), x, y), mercer_direct(1.3, 0.4, 300, x, y),
                1e-9);
  }
}

TEST(Rkhs, Symmetry) {
  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double x = u(eng), y = u(eng);
    const auto m = KernelSpec::synthetic_mercer(1.0, 0.5, 200);
    EXPECT_EQ(kernel_eval(KernelSpec::rbf(0.3), x, y), kernel_eval(KernelSpec::rbf(0.3), y, x));
    EXPECT_NEAR(kernel_eval(m, x, y), kernel_eval(m, y, x), 1e-12);
  }
}

TEST(Rkhs, EigenvaluesAndSupNorm) {
  const auto k = KernelSpec::synthetic_mercer(2.0, 0.5, 5);
  const Eigen::VectorXd ev = k.eigenvalues();
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(ev[i], 2.0 / ((i + 1.0) * (i + 1.0)), 1e-15);
  for (int i = 1; i < 5; ++i) EXPECT_LE(ev[i], ev[i - 1]);
  EXPECT_NEAR(k.sup_norm(), 2.0 * ev.sum(), 1e-15);
  EXPECT_NEAR(k.sup_norm(), kernel_eval(k, 0.0, 0.0), 1e-12);
  EXPECT_EQ(KernelSpec::rbf(1.0).sup_norm(), 1.0);
}

TEST(Rkhs, TruncationError) {
  const auto full = KernelSpec::synthetic_mercer(1.0, 0.5, 400);
  const auto half = KernelSpec::synthetic_mercer(1.0, 0.5, 200);
  double tail = 0.0;
  for (int k = 201; k <= 400; ++k) tail += std::pow(k, -2.0);
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double x = u(eng), y = u(eng);
    EXPECT_LE(std::abs(kernel_eval(full, x, y) - kernel_eval(half, x, y)), 2.0 * tail + 1e-12);
  }
}

TEST(Rkhs, GramExamples) {
  std::mt19937_64 eng(4);
  const Eigen::MatrixXd x = random_points(eng, 20, 3);
  const Eigen::MatrixXd g = gram_matrix(KernelSpec::rbf(0.5), x);
  for (Eigen::Index i = 0; i < 20; ++i) EXPECT_EQ(g(i, i), 1.0);
  EXPECT_EQ(g, g.transpose());
  const Eigen::MatrixXd one = gram_matrix(KernelSpec::synthetic_mercer(1.0, 0.5, 50), Eigen::MatrixXd::Constant(1, 1, 0.4));
  ASSERT_EQ(one.rows(), 1);
  EXPECT_NEAR(one(0, 0), kernel_eval(KernelSpec::synthetic_mercer(1.0, 0.5, 50), 0.4, 0.4), 1e-12);
}

TEST(Rkhs, GramMatchesReference) {
  std::mt19937_64 eng(5);
  const Eigen::MatrixXd x1 = random_points(eng, 40, 1);
  for (const auto& spec : {KernelSpec::rbf(0.2), KernelSpec::synthetic_mercer(1.0, 0.5, 64)})
    EXPECT_LE((gram_matrix(spec, x1) - gram_matrix_reference(spec, x1)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Rkhs, GramIsPsd) {
  std::mt19937_64 eng(6);
  for (int t = 0; t < 100; ++t) {
    const auto spec = t % 2 ? KernelSpec::rbf(0.3) : KernelSpec::synthetic_mercer(1.0, 0.5, 100);
    const Eigen::MatrixXd g = gram_matrix(spec, random_points(eng, 30, 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * es.eigenvalues().maxCoeff());
  }
}

TEST(Rkhs, NormExamples) {
  Eigen::MatrixXd g(1, 1);
  g << 2.0;
  EXPECT_EQ(rkhs_norm_sq({Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1)}, g), 0.0);
  EXPECT_EQ(rkhs_norm_sq({Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 1)}, g), 2.0);
  EXPECT_THROW(rkhs_norm_sq({Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Zero(2, 1)}, g), DomainError);
}

TEST(Rkhs, CauchySchwarzAndReproducing) {
  std::mt19937_64 eng(7);
  std::normal_distribution<double> n;
  const Eigen::MatrixXd x = random_points(eng, 15, 1);
  const Eigen::MatrixXd g = gram_matrix(KernelSpec::rbf(0.25), x);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd a(15), b(15);
    for (Eigen::Index i = 0; i < 15; ++i) a[i] = n(eng), b[i] = n(eng);
    const double ab = a.dot(g * b);
    EXPECT_LE(ab * ab, rkhs_norm_sq({a, x}, g) * rkhs_norm_sq({b, x}, g) * (1 + 1e-12) + 1e-12);
  }
  for (Eigen::Index i = 0; i < 15; ++i)
    EXPECT_NEAR(rkhs_norm_sq({Eigen::VectorXd::Unit(15, i), x}, g), g(i, i), 1e-15);
}

TEST(Rkhs, PredictExamples) {
  std::mt19937_64 eng(8);
  const Eigen::MatrixXd x = random_points(eng, 12, 1);
  for (const auto& spec : {KernelSpec::rbf(0.3), KernelSpec::synthetic_mercer(1.0, 0.5, 64)}) {
    for (Eigen::Index j = 0; j < 12; ++j) {
      const Eigen::VectorXd f = predict_kernel(spec, {Eigen::VectorXd::Unit(12, j), x}, x.row(j));
      EXPECT_NEAR(f[0], kernel_eval(spec, x(j, 0), x(j, 0)), 1e-10);
    }
    EXPECT_EQ(predict_kernel(spec, {Eigen::VectorXd::Zero(12), x}, x), Eigen::VectorXd::Zero(12));
    std::normal_distribution<double> n;
    Eigen::VectorXd a(12), b(12);
    for (Eigen::Index i = 0; i < 12; ++i) a[i] = n(eng), b[i] = n(eng);
    const Eigen::MatrixXd q = random_points(eng, 30, 1);
    const Eigen::VectorXd lhs = predict_kernel(spec, {2.0 * a - b, x}, q);
    const Eigen::VectorXd rhs = 2.0 * predict_kernel(spec, {a, x}, q) - predict_kernel(spec, {b, x}, q);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Rkhs, SupBound) {
  EXPECT_EQ(sup_bound_from_rkhs_ball(KernelSpec::rbf(1.0), 0.0), 0.0);
  EXPECT_EQ(sup_bound_from_rkhs_ball(KernelSpec::rbf(1.0), 3.0), 3.0);
  EXPECT_THROW(sup_bound_from_rkhs_ball(KernelSpec::rbf(1.0), -1.0), DomainError);

  // random unit-norm models never exceed the bound on a fine grid
  const auto spec = KernelSpec::synthetic_mercer(1.0, 0.5, 128);
  std::mt19937_64 eng(9);
  std::normal_distribution<double> n;
  const Eigen::MatrixXd grid = Eigen::VectorXd::LinSpaced(501, 0.0, 1.0);
  const double bound = sup_bound_from_rkhs_ball(spec, 1.0);
  for (int t = 0; t < 100; ++t) {
    const Eigen::MatrixXd x = random_points(eng, 10, 1);
    Eigen::VectorXd a(10);
    for (auto& c : a) c = n(eng);
    a /= std::sqrt(rkhs_norm_sq({a, x}, gram_matrix(spec, x)));
    EXPECT_LE(predict_kernel(spec, {a, x}, grid).cwiseAbs().maxCoeff(), bound + 1e-9);
  }
}

TEST(Rkhs, GramOperatorForms) {
  std::mt19937_64 eng(10);
  const auto spec = KernelSpec::synthetic_mercer(1.0, 0.5, 16);
  const Eigen::MatrixXd x = random_points(eng, 40, 1);
  const GramOperator f = make_gram_operator(spec, x);
  ASSERT_TRUE(f.is_factored());
  const Eigen::MatrixXd dense = gram_matrix(spec, x);
  const GramOperator d = GramOperator::dense(dense);
  EXPECT_LE((f.to_dense() - dense).cwiseAbs().maxCoeff(), 1e-10);
  Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(40, -1.0, 1.0);
  EXPECT_LE((f.apply(a) - d.apply(a)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(f.quad(a), d.quad(a), 1e-9);
  EXPECT_NEAR(f.diag(3), dense(3, 3), 1e-12);
  const std::vector<Eigen::Index> cols{1, 5, 7};
  const std::vector<double> coeffs{0.5, -1.0, 2.0};
  const Eigen::VectorXd want = 0.5 * dense.col(1) - dense.col(5) + 2.0 * dense.col(7);
  EXPECT_LE((f.apply_columns(cols, coeffs) - want).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((d.apply_columns(cols, coeffs) - want).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense, Eigen::EigenvaluesOnly);
  EXPECT_NEAR(d.op_norm(), es.eigenvalues().maxCoeff(), 1e-7 * es.eigenvalues().maxCoeff());
}

TEST(Rkhs, JsonRoundTrip) {
  nlohmann::json j = KernelSpec::synthetic_mercer(2.0, 0.25, 33);
  const auto back = j.get<KernelSpec>();
  EXPECT_EQ(back.kind, KernelKind::synthetic_mercer);
  EXPECT_EQ(back.beta, 2.0);
  EXPECT_EQ(back.p_decay, 0.25);
  EXPECT_EQ(back.k_max, 33);
  EXPECT_THROW(nlohmann::json({{"kind", "rbf"}, {"bandwidth", -1.0}}).get<KernelSpec>(), DomainError);
}
