#include "lipmom/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lipmom/error.hpp"
#include "lipmom/random.hpp"
#include "problem.hpp"

namespace lipmom {
namespace {

using detail::KernelProblem;
using detail::LinearProblem;

void check_finite(double value, const std::vector<double>& trace, const char* where) {
  if (!std::isfinite(value)) throw SolverFailure(std::string(where) + ": non-finite objective", trace);
}

void check_rerm_inputs(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty, double lambda,
                       const SolverConfig& cfg, bool kernel) {
  loss.validate();
  cfg.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and >= 0");
  if (data.size() < 1) throw DomainError("empty dataset");
  if (kernel != (penalty.kind == PenaltyKind::squared_hilbert_norm))
    throw DomainError("kernel spec must be given iff the penalty is squared_hilbert_norm");
  penalty.validate_for_estimator();
}

struct Iterate {
  Eigen::VectorXd params;
  Eigen::VectorXd preds;
};

// Smooth losses: FISTA with function-value restart, best-iterate tracking.
template <class Problem>
Iterate solve_smooth(const Problem& prob, const Eigen::VectorXd& y, const LossSpec& loss,
                     const SolverConfig& cfg, Model& out) {
  const double lambda = prob.lambda();
  const double n = static_cast<double>(prob.samples());
  const double curvature = loss.curvature_bound() * prob.design_curvature();
  const double s = cfg.step.kind == StepRule::Kind::fixed ? cfg.step.value : 1.0 / std::max(curvature, 1e-12);

  auto objective = [&](const Iterate& it) { return detail::mean_loss(loss, it.preds, y) + lambda * prob.penalty(it.params, it.preds); };

  Iterate x{prob.zero(), Eigen::VectorXd::Zero(prob.samples())};
  Iterate yk = x;
  Iterate best = x;
  double best_obj = objective(x);
  double prev_obj = best_obj;
  double theta = 1.0;
  Eigen::VectorXd g(prob.samples());
  out.objective_trace.clear();

  int k = 0;
  for (; k < cfg.max_iters; ++k) {
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = loss_subgradient(loss, yk.preds[i], y[i]);
    Iterate xn = yk;
    prob.step(xn.params, xn.preds, {}, g, s, n);
    const double obj = objective(xn);
    check_finite(obj, out.objective_trace, "fit_rerm");
    if (obj < best_obj) {
      best_obj = obj;
      best = xn;
    }
    out.objective_trace.push_back(best_obj);

    const double mapping = prob.distance(xn.params, xn.preds, yk.params, yk.preds);
    if (mapping <= cfg.tolerance * (1.0 + prob.norm(xn.params, xn.preds))) {
      ++k;
      break;
    }
    if (obj > prev_obj) {
      theta = 1.0;
      yk = xn;
    } else {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      const double beta = (theta - 1.0) / theta_next;
      yk.params = xn.params + beta * (xn.params - x.params);
      yk.preds = xn.preds + beta * (xn.preds - x.preds);
      theta = theta_next;
    }
    x = std::move(xn);
    prev_obj = obj;
  }
  out.iterations = k;
  out.objective = best_obj;
  out.method = "fista";

  // fixed-point residual of the returned iterate, same step
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = loss_subgradient(loss, best.preds[i], y[i]);
  Iterate probe = best;
  prob.step(probe.params, probe.preds, {}, g, s, n);
  out.residual = prob.distance(probe.params, probe.preds, best.params, best.preds);
  return best;
}

// Piecewise-linear losses with lambda = 0: prox-subgradient, steps c / sqrt(k+1).
template <class Problem>
Iterate solve_subgradient(const Problem& prob, const Eigen::VectorXd& y, const LossSpec& loss,
                          const SolverConfig& cfg, Model& out) {
  const double lambda = prob.lambda();
  const double n = static_cast<double>(prob.samples());
  const double c = cfg.step.kind == StepRule::Kind::automatic
                       ? 1.0 / std::max(prob.design_curvature(), 1e-12)
                       : cfg.step.value;
  auto objective = [&](const Iterate& it) { return detail::mean_loss(loss, it.preds, y) + lambda * prob.penalty(it.params, it.preds); };

  Iterate x{prob.zero(), Eigen::VectorXd::Zero(prob.samples())};
  Iterate best = x;
  double best_obj = objective(x);
  Eigen::VectorXd g(prob.samples());
  out.objective_trace.clear();
  constexpr int window = 1000;

  int k = 0;
  for (; k < cfg.max_iters; ++k) {
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = loss_subgradient(loss, x.preds[i], y[i]);
    const double s = cfg.step.kind == StepRule::Kind::fixed ? c : c / std::sqrt(static_cast<double>(k) + 1.0);
    prob.step(x.params, x.preds, {}, g, s, n);
    const double obj = objective(x);
    check_finite(obj, out.objective_trace, "fit_rerm");
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
    out.objective_trace.push_back(best_obj);
    if (k >= window) {
      const double old = out.objective_trace[static_cast<std::size_t>(k - window)];
      if (old - best_obj <= cfg.tolerance * std::max(1.0, std::abs(best_obj))) {
        ++k;
        break;
      }
    }
  }
  out.iterations = k;
  out.objective = best_obj;
  out.method = "subgradient";
  return best;
}

std::vector<Eigen::Index> permutation(Eigen::Index n, Engine& eng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), eng);
  return order;
}

void dual_boxes(const LossSpec& loss, const Eigen::VectorXd& y, Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
  lo.resize(y.size());
  hi.resize(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) linear_dual_box(loss, y[i], lo[i], hi[i]);
}

// Piecewise-linear loss l(u,y) = max_{b in box} b (u - y), elastic net with
// alpha in (0,1), lambda > 0. Dual: max_b -b.y/N - sum_j soft(v_j, c1)^2 / (4 c2)
// with v = X^T b / N and primal map t(b) = -soft(v, c1) / (2 c2).
Eigen::VectorXd solve_dual_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LossSpec& loss,
                                  const PenaltySpec& penalty, double lambda, const SolverConfig& cfg, Model& out) {
  const Eigen::Index n = x.rows();
  const double nd = static_cast<double>(n);
  const double c1 = lambda * (1.0 - penalty.alpha);
  const double c2 = lambda * penalty.alpha;
  Eigen::VectorXd lo, hi;
  dual_boxes(loss, y, lo, hi);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.cols());
  Eigen::VectorXd t = Eigen::VectorXd::Zero(x.cols());
  Eigen::VectorXd row_sq(n);
  for (Eigen::Index i = 0; i < n; ++i) row_sq[i] = x.row(i).squaredNorm();

  auto primal = [&](const Eigen::VectorXd& coef) {
    return detail::mean_loss(loss, x * coef, y) + lambda * penalty_eval(penalty, coef);
  };
  Eigen::VectorXd best = t;
  double best_obj = primal(t);
  out.objective_trace.clear();
  auto eng = make_engine(cfg.seed, {stream::solver});

  int epoch = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (; epoch < cfg.max_iters; ++epoch) {
    for (Eigen::Index i : permutation(n, eng)) {
      if (row_sq[i] == 0.0) continue;
      const double grad = (x.row(i).dot(t) - y[i]) / nd;
      const double curv = row_sq[i] / (2.0 * c2 * nd * nd);
      const double bi = std::clamp(b[i] + grad / curv, lo[i], hi[i]);
      const double delta = bi - b[i];
      if (delta == 0.0) continue;
      b[i] = bi;
      v += (delta / nd) * x.row(i).transpose();
      t = soft_threshold(v, c1) / (-2.0 * c2);
    }
    const double p_obj = primal(t);
    check_finite(p_obj, out.objective_trace, "fit_rerm");
    const double d_obj = -b.dot(y) / nd - soft_threshold(v, c1).squaredNorm() / (4.0 * c2);
    if (p_obj < best_obj) {
      best_obj = p_obj;
      best = t;
    }
    gap = best_obj - d_obj;
    out.objective_trace.push_back(best_obj);
    if (gap <= cfg.tolerance * std::max(1.0, std::abs(best_obj))) {
      ++epoch;
      break;
    }
  }
  out.iterations = epoch;
  out.objective = best_obj;
  out.residual = gap;
  out.method = "dual_coordinate_ascent";
  return best;
}

// Kernel version: dual max_b -b.y/N - b^T K b / (4 lambda N^2), a(b) = -b / (2 lambda N).
// Exact coordinate maximization (the dual is quadratic).
Eigen::VectorXd solve_dual_kernel(const GramOperator& gram, const Eigen::MatrixXd* factor, const Eigen::VectorXd& y,
                                  const LossSpec& loss, double lambda, const SolverConfig& cfg, Model& out) {
  const Eigen::Index n = gram.size();
  const double nd = static_cast<double>(n);
  const double to_primal = -1.0 / (2.0 * lambda * nd);
  Eigen::VectorXd lo, hi;
  dual_boxes(loss, y, lo, hi);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);  // K a, maintained when dense
  Eigen::VectorXd w;                             // F^T a, maintained when factored
  Eigen::MatrixXd dense;
  if (factor != nullptr) {
    w = Eigen::VectorXd::Zero(factor->cols());
  } else {
    dense = gram.to_dense();
  }
  Eigen::VectorXd diag(n);
  for (Eigen::Index i = 0; i < n; ++i) diag[i] = gram.diag(i);

  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_obj = detail::mean_loss(loss, u, y);
  out.objective_trace.clear();
  auto eng = make_engine(cfg.seed, {stream::solver});

  int epoch = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (; epoch < cfg.max_iters; ++epoch) {
    for (Eigen::Index i : permutation(n, eng)) {
      if (diag[i] <= 0.0) continue;
      const double ui = factor != nullptr ? factor->row(i).dot(w) : u[i];
      const double bi = std::clamp(b[i] + 2.0 * lambda * nd * (ui - y[i]) / diag[i], lo[i], hi[i]);
      const double delta = bi - b[i];
      if (delta == 0.0) continue;
      b[i] = bi;
      if (factor != nullptr) {
        w += (delta * to_primal) * factor->row(i).transpose();
      } else {
        u += (delta * to_primal) * dense.col(i);
      }
    }
    if (factor != nullptr) u.noalias() = *factor * w;
    const Eigen::VectorXd a = to_primal * b;
    const double quad = std::max(0.0, a.dot(u));
    const double p_obj = detail::mean_loss(loss, u, y) + lambda * quad;
    check_finite(p_obj, out.objective_trace, "fit_rerm");
    const double d_obj = -b.dot(y) / nd - lambda * quad;
    if (p_obj < best_obj) {
      best_obj = p_obj;
      best = a;
    }
    gap = best_obj - d_obj;
    out.objective_trace.push_back(best_obj);
    if (gap <= cfg.tolerance * std::max(1.0, std::abs(best_obj))) {
      ++epoch;
      break;
    }
  }
  out.iterations = epoch;
  out.objective = best_obj;
  out.residual = gap;
  out.method = "dual_coordinate_ascent";
  return best;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iters < 1) throw DomainError("solver: max_iters must be >= 1");
  if (!(tolerance > 0.0)) throw DomainError("solver: tolerance must be > 0");
  if (step.kind != StepRule::Kind::automatic && !(step.value > 0.0))
    throw DomainError("solver: step value must be > 0");
}

Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& inputs) {
  if (model.is_linear()) {
    if (model.coeffs().size() != inputs.cols()) throw DomainError("predict: dimension mismatch");
    return inputs * model.coeffs();
  }
  return predict_kernel(model.kernel().kernel, model.kernel().model, inputs);
}

double model_penalty(const Model& model, const PenaltySpec& penalty) {
  if (model.is_linear()) return penalty_eval(penalty, model.coeffs());
  const auto& fit = model.kernel();
  const GramOperator gram = make_gram_operator(fit.kernel, fit.model.training_inputs);
  return gram.quad(fit.model.coefficients);
}

double composite_objective(const Model& model, const Dataset& data, const LossSpec& loss,
                           const PenaltySpec& penalty, double lambda) {
  const Eigen::VectorXd preds = predict(model, data.inputs);
  return detail::mean_loss(loss, preds, data.targets) + lambda * model_penalty(model, penalty);
}

Model fit_rerm(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty, double lambda,
               const SolverConfig& cfg, const std::optional<KernelSpec>& kernel) {
  if (kernel) {
    const GramOperator gram = make_gram_operator(*kernel, data.inputs);
    return fit_rerm(data, loss, penalty, lambda, cfg, *kernel, gram);
  }
  check_rerm_inputs(data, loss, penalty, lambda, cfg, false);
  Model out;
  double lo = 0.0, hi = 0.0;
  const bool piecewise_linear = linear_dual_box(loss, data.targets[0], lo, hi);
  if (piecewise_linear && lambda > 0.0) {
    out.params = solve_dual_linear(data.inputs, data.targets, loss, penalty, lambda, cfg, out);
    return out;
  }
  LinearProblem prob(data.inputs, penalty, lambda);
  Iterate it = loss.is_smooth() ? solve_smooth(prob, data.targets, loss, cfg, out)
                                : solve_subgradient(prob, data.targets, loss, cfg, out);
  out.params = std::move(it.params);
  return out;
}

Model fit_rerm(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty, double lambda,
               const SolverConfig& cfg, const KernelSpec& kernel, const GramOperator& gram) {
  check_rerm_inputs(data, loss, penalty, lambda, cfg, true);
  if (gram.size() != data.size()) throw DomainError("fit_rerm: Gram size does not match the dataset");
  Model out;
  KernelFit fit{kernel, {Eigen::VectorXd(), data.inputs}};
  double lo = 0.0, hi = 0.0;
  const bool piecewise_linear = linear_dual_box(loss, data.targets[0], lo, hi);
  if (piecewise_linear && lambda > 0.0) {
    Eigen::MatrixXd factor;
    if (gram.is_factored()) factor = mercer_features(kernel, data.inputs);
    fit.model.coefficients = solve_dual_kernel(gram, gram.is_factored() ? &factor : nullptr, data.targets, loss,
                                               lambda, cfg, out);
  } else {
    KernelProblem prob(gram, lambda);
    Iterate it = loss.is_smooth() ? solve_smooth(prob, data.targets, loss, cfg, out)
                                  : solve_subgradient(prob, data.targets, loss, cfg, out);
    fit.model.coefficients = std::move(it.params);
  }
  out.params = std::move(fit);
  return out;
}

double prox_gradient_residual(const Model& model, const Dataset& data, const LossSpec& loss,
                              const PenaltySpec& penalty, double lambda) {
  if (!model.is_linear()) throw DomainError("prox_gradient_residual: linear models only");
  LinearProblem prob(data.inputs, penalty, lambda);
  const double s = 1.0 / std::max(loss.curvature_bound() * prob.design_curvature(), 1e-12);
  Eigen::VectorXd t = model.coeffs();
  Eigen::VectorXd preds = data.inputs * t;
  Eigen::VectorXd g(preds.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = loss_subgradient(loss, preds[i], data.targets[i]);
  prob.step(t, preds, {}, g, s, static_cast<double>(data.size()));
  return (t - model.coeffs()).norm();
}

void to_json(nlohmann::json& j, const SolverConfig& cfg) {
  j = {{"max_iters", cfg.max_iters}, {"tolerance", cfg.tolerance}, {"reshuffle_blocks", cfg.reshuffle_blocks},
       {"seed", cfg.seed}};
  switch (cfg.step.kind) {
    case StepRule::Kind::automatic: j["step"] = {{"kind", "automatic"}}; break;
    case StepRule::Kind::fixed: j["step"] = {{"kind", "fixed"}, {"value", cfg.step.value}}; break;
    case StepRule::Kind::diminishing: j["step"] = {{"kind", "diminishing"}, {"value", cfg.step.value}}; break;
  }
}

void from_json(const nlohmann::json& j, SolverConfig& cfg) {
  cfg = SolverConfig{};
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.tolerance = j.value("tolerance", cfg.tolerance);
  cfg.reshuffle_blocks = j.value("reshuffle_blocks", cfg.reshuffle_blocks);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("step")) {
    const auto& s = j.at("step");
    const auto kind = s.value("kind", std::string("automatic"));
    if (kind == "fixed") cfg.step = StepRule::fixed(s.at("value").get<double>());
    else if (kind == "diminishing") cfg.step = StepRule::diminishing(s.at("value").get<double>());
    else if (kind != "automatic") throw DomainError("unknown step rule: " + kind);
  }
  cfg.validate();
}

void to_json(nlohmann::json& j, const Model& model) {
  j["method"] = model.method;
  j["iterations"] = model.iterations;
  j["objective"] = model.objective;
  if (std::isfinite(model.residual)) j["residual"] = model.residual;
  if (model.is_linear()) {
    const auto& t = model.coeffs();
    j["coefficients"] = std::vector<double>(t.data(), t.data() + t.size());
  } else {
    const auto& fit = model.kernel();
    j["kernel"] = fit.kernel;
    const auto& a = fit.model.coefficients;
    j["coefficients"] = std::vector<double>(a.data(), a.data() + a.size());
  }
}

}  // namespace lipmom
