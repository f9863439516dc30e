#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <omp.h>

#include "lipmom/kernels.hpp"

using namespace lipmom;

// Parallel kernels must agree bit-for-bit with their serial references, for
// any thread count.
class KernelsBitwise : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override { omp_set_num_threads(GetParam()); }
};

TEST_P(KernelsBitwise, Replicates) {
  auto fn = [](int d) { return std::sin(0.37 * d) * std::exp(-0.001 * d); };
  EXPECT_EQ(kernels::replicates(257, fn), kernels::serial::replicates(257, fn));
}

TEST_P(KernelsBitwise, SymmetricFill) {
  auto fn = [](Eigen::Index i, Eigen::Index j) { return std::cos(0.1 * static_cast<double>(i * j)); };
  EXPECT_EQ(kernels::symmetric_fill(97, fn), kernels::serial::symmetric_fill(97, fn));
}

TEST_P(KernelsBitwise, SymmetricMatvec) {
  const Eigen::MatrixXd a = kernels::serial::symmetric_fill(
      64, [](Eigen::Index i, Eigen::Index j) { return 1.0 / (1.0 + static_cast<double>(i + j)); });
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(64, -2.0, 3.0);
  EXPECT_EQ(kernels::symmetric_matvec(a, v), kernels::serial::symmetric_matvec(a, v));
  EXPECT_LE((kernels::symmetric_matvec(a, v) - a * v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_P(KernelsBitwise, CosineFeatures) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(101, 0.0, 1.0);
  Eigen::VectorXd ev(40);
  for (int k = 0; k < 40; ++k) ev[k] = std::pow(k + 1.0, -2.0);
  const Eigen::MatrixXd f = kernels::cosine_features(x, ev);
  EXPECT_EQ(f, kernels::serial::cosine_features(x, ev));
  // recurrence agrees with direct cosines
  for (Eigen::Index i = 0; i < x.size(); i += 10)
    for (int k = 0; k < 40; ++k)
      EXPECT_NEAR(f(i, k), std::sqrt(2.0 * ev[k]) * std::cos(std::numbers::pi * (k + 1) * x[i]), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelsBitwise, ::testing::Values(1, 2, 4));

TEST(Kernels, Summarize) {
  const Estimate e = kernels::summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(e.value, 2.5);
  EXPECT_NEAR(e.stderr_, std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(kernels::summarize({}).value, 0.0);
  EXPECT_EQ(kernels::summarize({5.0}).stderr_, 0.0);
}
