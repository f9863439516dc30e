#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <utility>

#include "lipmom/error.hpp"
#include "lipmom/random.hpp"
#include "lipmom/solvers.hpp"
#include "problem.hpp"

namespace lipmom {
namespace {

std::vector<double> block_means(const Eigen::VectorXd& values, const BlockPartition& partition) {
  std::vector<double> means(partition.count());
  for (std::size_t s = 0; s < partition.count(); ++s) {
    const auto& block = partition.blocks[s];
    if (block.empty()) throw DomainError("median of means: empty block");
    double sum = 0.0;
    for (Eigen::Index i : block) {
      if (i < 0 || i >= values.size()) throw DomainError("median of means: index out of range");
      sum += values[i];
    }
    means[s] = sum / static_cast<double>(block.size());
  }
  return means;
}

std::size_t lower_median_index(const std::vector<double>& means) {
  std::vector<std::pair<double, std::size_t>> keyed(means.size());
  for (std::size_t s = 0; s < means.size(); ++s) keyed[s] = {means[s], s};
  const auto mid = keyed.begin() + static_cast<std::ptrdiff_t>((keyed.size() - 1) / 2);
  std::nth_element(keyed.begin(), mid, keyed.end());
  return mid->second;
}

struct State {
  Eigen::VectorXd params;
  Eigen::VectorXd preds;
};

struct Candidate {
  Eigen::VectorXd params;
  Eigen::VectorXd losses;
  double penalty = 0.0;
};

template <class Problem>
Candidate make_candidate(const Problem& prob, const LossSpec& loss, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& params) {
  Candidate c;
  c.params = params;
  const Eigen::VectorXd preds = prob.predict(params);
  c.losses = detail::loss_values(loss, preds, y);
  c.penalty = prob.penalty(params, preds);
  return c;
}

template <class Problem>
Eigen::VectorXd run_minmax(const Problem& prob, const Eigen::VectorXd& y, const LossSpec& loss, Eigen::Index blocks,
                           const SolverConfig& cfg, Model& out) {
  const Eigen::Index n = prob.samples();
  const double lambda = prob.lambda();
  const auto s_count = static_cast<std::size_t>(blocks);

  const BlockPartition fixed = partition_blocks(n, blocks, derive_seed(cfg.seed, {stream::partition, 0}));
  // several evaluation partitions so the sup-estimate does not hinge on one outlier layout
  std::vector<BlockPartition> evals;
  for (std::uint64_t e = 0; e < (s_count > 1 ? 5u : 1u); ++e)
    evals.push_back(partition_blocks(n, blocks, derive_seed(cfg.seed, {stream::partition, 1, e})));

  // Robust step scale: median over blocks of the mean row energy (S = 1: the design curvature).
  double energy = 0.0;
  if (s_count == 1) {
    energy = prob.design_curvature();
  } else {
    Eigen::VectorXd rows(n);
    for (Eigen::Index i = 0; i < n; ++i) rows[i] = prob.row_energy(i);
    const auto means = block_means(rows, fixed);
    energy = means[lower_median_index(means)];
  }
  const bool smooth = loss.is_smooth();
  double s0 = 0.0;
  switch (cfg.step.kind) {
    case StepRule::Kind::automatic:
      // smooth: inverse curvature; nonsmooth: inverse bound on the block subgradient norm
      s0 = smooth ? 1.0 / std::max(loss.curvature_bound() * energy, 1e-12)
                  : 1.0 / std::max(lipschitz_constant(loss) * std::sqrt(energy), 1e-12);
      break;
    default: s0 = cfg.step.value; break;
  }
  const bool diminishing = cfg.step.kind == StepRule::Kind::diminishing ||
                           (cfg.step.kind == StepRule::Kind::automatic && !smooth);

  auto eng = make_engine(cfg.seed, {stream::solver});
  std::normal_distribution<double> jitter(0.0, 1e-3);
  State f{prob.zero(), Eigen::VectorXd::Zero(n)};
  State g{prob.zero(), Eigen::VectorXd()};
  for (Eigen::Index k = 0; k < g.params.size(); ++k) g.params[k] = jitter(eng);
  g.preds = prob.predict(g.params);

  const int iters = cfg.max_iters;
  const int tail_start = iters / 2;
  const int snapshot_every = std::max(1, iters / 20);
  Eigen::VectorXd tail = Eigen::VectorXd::Zero(f.params.size());
  int tail_count = 0;
  std::vector<Candidate> candidates;

  out.objective_trace.clear();
  out.objective_trace.reserve(static_cast<std::size_t>(iters));
  Eigen::VectorXd lf(n), lg(n), grad;
  for (int k = 0; k < iters; ++k) {
    const BlockPartition reshuffled =
        cfg.reshuffle_blocks && s_count > 1
            ? partition_blocks(n, blocks, derive_seed(cfg.seed, {stream::partition, 2, static_cast<std::uint64_t>(k)}))
            : BlockPartition{};
    const BlockPartition& part = cfg.reshuffle_blocks && s_count > 1 ? reshuffled : fixed;

    lf = detail::loss_values(loss, f.preds, y);
    lg = detail::loss_values(loss, g.preds, y);
    const auto incr = block_means(lf - lg, part);
    std::size_t med = lower_median_index(incr);
    const auto [lo, hi] = std::minmax_element(incr.begin(), incr.end());
    const double scale = 1.0 + lf.cwiseAbs().mean();
    if (*hi - *lo <= 1e-12 * scale) {
      // f and g agree on every block: fall back to the median block of l_f.
      med = lower_median_index(block_means(lf, part));
    }
    const double crit = incr[med] + lambda * (prob.penalty(f.params, f.preds) - prob.penalty(g.params, g.preds));
    if (!std::isfinite(crit)) throw SolverFailure("fit_mom_minmax: non-finite criterion", out.objective_trace);
    out.objective_trace.push_back(crit);

    const auto& rows = part.blocks[med];
    const double bsize = static_cast<double>(rows.size());
    const double s = diminishing ? s0 / std::sqrt(static_cast<double>(k) + 1.0) : s0;
    grad.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      grad[static_cast<Eigen::Index>(r)] = loss_subgradient(loss, f.preds[rows[r]], y[rows[r]]);
    prob.step(f.params, f.preds, rows, grad, s, bsize);
    for (std::size_t r = 0; r < rows.size(); ++r)
      grad[static_cast<Eigen::Index>(r)] = loss_subgradient(loss, g.preds[rows[r]], y[rows[r]]);
    prob.step(g.params, g.preds, rows, grad, s, bsize);

    if (k >= tail_start) {
      tail += f.params;
      ++tail_count;
    }
    // candidates come from the averaged phase only; early iterates are still in transit
    if (tail_count > 0 && (k + 1) % snapshot_every == 0)
      candidates.push_back(make_candidate(prob, loss, y, tail / tail_count));
  }
  if (tail_count > 0) candidates.push_back(make_candidate(prob, loss, y, tail / tail_count));
  // ties in the tournament go to the earliest entry, so put the most averaged iterates first
  std::reverse(candidates.begin(), candidates.end());
  // raw f and g only act as challengers
  const std::size_t contenders = candidates.size();
  candidates.push_back(make_candidate(prob, loss, y, f.params));
  candidates.push_back(make_candidate(prob, loss, y, g.params));

  // Pick the contender minimizing max_h MOM(l_c - l_h) + lambda (phi(c) - phi(h)).
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < contenders; ++c) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < candidates.size(); ++h) {
      const Eigen::VectorXd diff = candidates[c].losses - candidates[h].losses;
      double m = 0.0;
      for (const auto& e : evals) m += median_of_block_means(diff, e);
      const double v = m / static_cast<double>(evals.size()) + lambda * (candidates[c].penalty - candidates[h].penalty);
      worst = std::max(worst, v);
    }
    if (worst < best_value) {
      best_value = worst;
      best = c;
    }
  }
  out.iterations = iters;
  out.objective = best_value;
  out.method = "mom_minmax";
  return candidates[best].params;
}

}  // namespace

double median_of_block_means(const Eigen::VectorXd& values, const BlockPartition& partition, std::size_t* block) {
  if (partition.count() == 0) throw DomainError("median of means: no blocks");
  const auto means = block_means(values, partition);
  const std::size_t s = lower_median_index(means);
  if (block != nullptr) *block = s;
  return means[s];
}

double mom_of_increments(const LossSpec& loss, const Model& f, const Model& g, const Dataset& data,
                         const BlockPartition& partition) {
  const Eigen::VectorXd pf = predict(f, data.inputs);
  const Eigen::VectorXd pg = predict(g, data.inputs);
  return median_of_block_means(detail::loss_values(loss, pf, data.targets) -
                                   detail::loss_values(loss, pg, data.targets),
                               partition);
}

Model fit_mom_minmax(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty, double lambda,
                     Eigen::Index blocks, const SolverConfig& cfg, const std::optional<KernelSpec>& kernel) {
  loss.validate();
  cfg.validate();
  penalty.validate_for_estimator();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and >= 0");
  if (blocks < 1 || blocks > data.size()) throw DomainError("fit_mom_minmax: need 1 <= S <= N");
  if (kernel.has_value() != (penalty.kind == PenaltyKind::squared_hilbert_norm))
    throw DomainError("kernel spec must be given iff the penalty is squared_hilbert_norm");

  Model out;
  if (kernel) {
    const GramOperator gram = make_gram_operator(*kernel, data.inputs);
    detail::KernelProblem prob(gram, lambda);
    KernelFit fit{*kernel, {run_minmax(prob, data.targets, loss, blocks, cfg, out), data.inputs}};
    out.params = std::move(fit);
  } else {
    detail::LinearProblem prob(data.inputs, penalty, lambda);
    out.params = run_minmax(prob, data.targets, loss, blocks, cfg, out);
  }
  return out;
}

}  // namespace lipmom
