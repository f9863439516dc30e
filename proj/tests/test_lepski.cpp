#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "lipmom/error.hpp"
#include "lipmom/solvers.hpp"

using namespace lipmom;

namespace {

Dataset clean_data(std::uint64_t seed) {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(20);
  t.head(5).setOnes();
  return make_regression_dataset({}, NoiseSpec::gaussian(1.0), LinearTruth{t}, 500, seed);
}

// Set-based restatement: R_j as sets, intersect from the top down, first nonempty suffix.
std::pair<int, int> oracle_choice(const Eigen::MatrixXd& tests, const Eigen::VectorXd& thr) {
  const int J = static_cast<int>(thr.size());
  std::vector<std::set<int>> R(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j)
    for (int m = 0; m < J; ++m)
      if (tests(j, m) <= thr[j]) R[static_cast<std::size_t>(j)].insert(m + 1);
  for (int k = 1; k <= J; ++k) {
    std::set<int> inter = R[static_cast<std::size_t>(k - 1)];
    for (int j = k + 1; j <= J; ++j) {
      std::set<int> next;
      for (int m : inter)
        if (R[static_cast<std::size_t>(j - 1)].count(m)) next.insert(m);
      inter = next;
    }
    if (!inter.empty()) return {k, *inter.begin()};
  }
  return {-1, -1};
}

}  // namespace

TEST(Lepski, GridSize) {
  EXPECT_EQ(lepski_grid_size(1), 1);
  EXPECT_EQ(lepski_grid_size(2), 3);
  EXPECT_EQ(lepski_grid_size(5), 8);
  EXPECT_EQ(lepski_grid_size(8), 11);
  EXPECT_EQ(lepski_grid_size(9), 13);
  EXPECT_THROW(lepski_grid_size(0), DomainError);
}

TEST(Lepski, ChooseMatchesSetOracle) {
  std::mt19937_64 eng(1);
  std::normal_distribution<double> g;
  for (int t = 0; t < 1000; ++t) {
    const int J = 1 + t % 9;
    LepskiState s;
    s.grid.resize(static_cast<std::size_t>(J));
    s.tests.resize(J, J);
    s.thresholds = Eigen::VectorXd::Constant(J, 0.5);
    for (int j = 0; j < J; ++j)
      for (int m = 0; m < J; ++m) s.tests(j, m) = j == m ? 0.0 : g(eng);
    lepski_choose(s);
    const auto [k, m] = oracle_choice(s.tests, s.thresholds);
    ASSERT_EQ(s.k_star, k);
    ASSERT_EQ(s.selected, m);
  }
}

TEST(Lepski, SingletonGrid) {
  const Dataset d = clean_data(2);
  const LepskiState s = lepski_select(d, LossSpec::huber(1.0), PenaltySpec::elastic_net(0.5), {1, 1.0}, SolverConfig{},
                                      [](double) { return 0.1; });
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.k_star, 1);
  EXPECT_EQ(s.selected, 1);
  EXPECT_EQ(s.grid[0].phi, 1.0);
  EXPECT_NEAR(s.grid[0].lambda, 0.01, 1e-15);
}

TEST(Lepski, GridAndTests) {
  const Dataset d = clean_data(3);
  const LossSpec loss = LossSpec::huber(1.0);
  const auto pen = PenaltySpec::elastic_net(0.5);
  const LepskiState s = lepski_select(d, loss, pen, {5, 1.0}, SolverConfig{},
                                      [](double phi) { return 0.1 * std::sqrt(1.0 + phi); });
  ASSERT_EQ(s.size(), 8u);
  std::set<int> js;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& pt = s.grid[i];
    js.insert(pt.j);
    EXPECT_EQ(pt.phi, std::ldexp(1.0, pt.j - 5));
    EXPECT_NEAR(pt.lambda, pt.radius * pt.radius / pt.phi, 1e-15);
    if (i > 0) EXPECT_LE(pt.lambda, s.grid[i - 1].lambda);
  }
  EXPECT_EQ(js.size(), 8u);
  // recompute every test from the fitted models
  for (int j = 1; j <= 8; ++j) {
    const auto& gj = s.grid[static_cast<std::size_t>(j - 1)];
    const Model& fj = s.fitted[static_cast<std::size_t>(j - 1)];
    EXPECT_TRUE(s.accepts(j, j));
    EXPECT_NEAR(s.thresholds[j - 1], (1.0 / s.A_star + 2.0) * gj.lambda * gj.phi, 1e-15);
    for (int m = 1; m <= 8; ++m) {
      const Model& fm = s.fitted[static_cast<std::size_t>(m - 1)];
      const double want = composite_objective(fm, d, loss, pen, gj.lambda) - composite_objective(fj, d, loss, pen, gj.lambda);
      EXPECT_NEAR(s.tests(j - 1, m - 1), want, 1e-10);
    }
  }
  EXPECT_GE(s.k_star, 1);
  EXPECT_LE(s.k_star, 8);
  for (int j = s.k_star; j <= 8; ++j) EXPECT_TRUE(s.accepts(j, s.selected));
}

TEST(Lepski, IncreasingLambdaIsSorted) {
  const Dataset d = clean_data(4);
  // r_j^2 / phi_j increasing in phi: radius grows faster than sqrt(phi)
  const LepskiState s = lepski_select(d, LossSpec::huber(1.0), PenaltySpec::elastic_net(0.5), {3, 1.0}, SolverConfig{},
                                      [](double phi) { return 0.05 * phi; });
  EXPECT_TRUE(s.reordered);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(s.grid[i].lambda, s.grid[i - 1].lambda);
}

TEST(Lepski, SelectedModelNearBestGrid) {
  const Dataset d = clean_data(5);
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(20);
  truth.head(5).setOnes();
  const LepskiState s = lepski_select(d, LossSpec::huber(1.0), PenaltySpec::elastic_net(0.5), {5, 1.0}, SolverConfig{},
                                      [](double phi) { return 0.1 * std::sqrt(phi); });
  double best = INFINITY;
  for (const auto& m : s.fitted) best = std::min(best, (m.coeffs() - truth).squaredNorm());
  EXPECT_LE((s.f_tilde().coeffs() - truth).norm(), 3.0 * std::sqrt(best));
}

TEST(Lepski, Errors) {
  const Dataset d = clean_data(6);
  EXPECT_THROW(lepski_select(d, LossSpec::huber(1.0), PenaltySpec::elastic_net(0.5), {0, 1.0}, SolverConfig{},
                             [](double) { return 0.1; }),
               DomainError);
  EXPECT_THROW(lepski_select(d, LossSpec::huber(1.0), PenaltySpec::elastic_net(0.5), {2, 0.0}, SolverConfig{},
                             [](double) { return 0.1; }),
               DomainError);
  EXPECT_THROW(lepski_select(d, LossSpec::huber(1.0), PenaltySpec::elastic_net(0.5), {2, 1.0}, SolverConfig{},
                             [](double) { return NAN; }),
               DomainError);
  LepskiState bad;
  EXPECT_THROW(lepski_choose(bad), DomainError);
}
