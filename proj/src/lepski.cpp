#include <algorithm>
#include <cmath>
#include <numeric>

#include "lipmom/error.hpp"
#include "lipmom/solvers.hpp"
#include "problem.hpp"

namespace lipmom {

int lepski_grid_size(int M_bound) {
  if (M_bound < 1) throw DomainError("lepski: M_bound must be >= 1");
  int ceil_log2 = 0;
  while ((1LL << ceil_log2) < M_bound) ++ceil_log2;
  return M_bound + ceil_log2;
}

bool LepskiState::accepts(int j, int m) const {
  return tests(j - 1, m - 1) <= thresholds[j - 1];
}

void lepski_choose(LepskiState& state) {
  const int J = static_cast<int>(state.size());
  if (J == 0 || state.tests.rows() != J || state.tests.cols() != J || state.thresholds.size() != J)
    throw DomainError("lepski: test matrix does not match the grid");
  for (int k = 1; k <= J; ++k) {
    for (int m = 1; m <= J; ++m) {
      bool inside = true;
      for (int j = k; j <= J && inside; ++j) inside = state.accepts(j, m);
      if (inside) {
        state.k_star = k;
        state.selected = m;
        return;
      }
    }
  }
  throw SolverFailure("lepski: no candidate in the last acceptance set", {});
}

LepskiState lepski_select(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty,
                          const LepskiConfig& lep, const SolverConfig& cfg, const RadiusOracle& oracle,
                          const std::optional<KernelSpec>& kernel) {
  if (!(lep.A_star > 0.0)) throw DomainError("lepski: A_star must be > 0");
  if (!oracle) throw DomainError("lepski: missing radius oracle");
  LepskiState state;
  state.M_bound = lep.M_bound;
  state.A_star = lep.A_star;
  const int J = lepski_grid_size(lep.M_bound);

  std::vector<LepskiGridPoint> grid(static_cast<std::size_t>(J));
  for (int j = 1; j <= J; ++j) {
    LepskiGridPoint& pt = grid[static_cast<std::size_t>(j - 1)];
    pt.j = j;
    pt.phi = std::ldexp(1.0, j - lep.M_bound);
    pt.radius = oracle(pt.phi);
    if (!(pt.radius >= 0.0) || !std::isfinite(pt.radius)) throw DomainError("lepski: oracle returned an invalid radius");
    pt.lambda = pt.radius * pt.radius / pt.phi;
  }
  std::vector<LepskiGridPoint> sorted = grid;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LepskiGridPoint& a, const LepskiGridPoint& b) { return a.lambda > b.lambda; });
  state.reordered = !std::equal(sorted.begin(), sorted.end(), grid.begin(),
                                [](const LepskiGridPoint& a, const LepskiGridPoint& b) { return a.j == b.j; });
  state.grid = std::move(sorted);

  std::optional<GramOperator> gram;
  if (kernel) gram = make_gram_operator(*kernel, data.inputs);
  state.fitted.resize(static_cast<std::size_t>(J));
  std::vector<std::string> errors(static_cast<std::size_t>(J));
#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < J; ++m) {
    const auto um = static_cast<std::size_t>(m);
    try {
      state.fitted[um] = kernel ? fit_rerm(data, loss, penalty, state.grid[um].lambda, cfg, *kernel, *gram)
                                : fit_rerm(data, loss, penalty, state.grid[um].lambda, cfg);
    } catch (const std::exception& e) {
      errors[um] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw SolverFailure("lepski: grid fit failed: " + e, {});

  std::vector<double> risk(static_cast<std::size_t>(J)), phi(static_cast<std::size_t>(J));
  for (int m = 0; m < J; ++m) {
    const auto um = static_cast<std::size_t>(m);
    const Eigen::VectorXd preds = predict(state.fitted[um], data.inputs);
    risk[um] = detail::mean_loss(loss, preds, data.targets);
    phi[um] = model_penalty(state.fitted[um], penalty);
  }
  state.tests.resize(J, J);
  state.thresholds.resize(J);
  for (int j = 0; j < J; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    const double lambda = state.grid[uj].lambda;
    state.thresholds[j] = (1.0 / lep.A_star + 2.0) * lambda * state.grid[uj].phi;
    for (int m = 0; m < J; ++m) {
      const auto um = static_cast<std::size_t>(m);
      state.tests(j, m) = m == j ? 0.0 : (risk[um] - risk[uj]) + lambda * (phi[um] - phi[uj]);
    }
  }
  lepski_choose(state);
  return state;
}

}  // namespace lipmom
