#include "lipmom/lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lipmom/error.hpp"
#include "lipmom/io.hpp"
#include "lipmom/random.hpp"
#include "lipmom/theory.hpp"

namespace lipmom {
namespace {

using nlohmann::json;

template <class T>
T param(const json& p, const char* key, T fallback) {
  return p.contains(key) ? p.at(key).get<T>() : fallback;
}

SolverConfig solver_param(const json& p, const char* key, SolverConfig base) {
  if (!p.contains(key)) return base;
  const json& s = p.at(key);
  json merged = base;
  for (auto it = s.begin(); it != s.end(); ++it) merged[it.key()] = it.value();
  return merged.get<SolverConfig>();
}

std::string cell_name(const std::string& key, double value) {
  std::ostringstream os;
  os << key << '=' << value;
  return os.str();
}

class Stopwatch {
 public:
  explicit Stopwatch(bool on) : on_(on), start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    if (!on_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool on_;
  std::chrono::steady_clock::time_point start_;
};

struct Failure {
  std::string cell;
  int rep = 0;
  std::string message;
};

// Runs tasks concurrently; rows come back in task order.
template <class Task>
std::vector<ReportRow> run_tasks(int count, Task&& task, std::vector<Failure>& failures) {
  std::vector<std::vector<ReportRow>> buffers(static_cast<std::size_t>(count));
  std::vector<std::string> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < count; ++t) {
    try {
      buffers[static_cast<std::size_t>(t)] = task(t);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(t)] = e.what();
    }
  }
  std::vector<ReportRow> rows;
  for (int t = 0; t < count; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    if (!errors[ut].empty()) failures.push_back({"task " + std::to_string(t), t, errors[ut]});
    rows.insert(rows.end(), buffers[ut].begin(), buffers[ut].end());
  }
  return rows;
}

json failures_json(const std::vector<Failure>& failures) {
  json out = json::array();
  for (const auto& f : failures) out.push_back({{"cell", f.cell}, {"message", f.message}});
  return out;
}

double mean_of(const std::vector<ReportRow>& rows, const std::function<bool(const ReportRow&)>& pick) {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : rows)
    if (pick(r)) {
      sum += r.l2_error;
      ++count;
    }
  return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

LabReport finish(std::vector<ReportRow> rows, json summary, const json& gates, const std::vector<Failure>& failures) {
  LabReport report;
  report.rows = std::move(rows);
  summary["failures"] = failures_json(failures);
  bool passed = failures.empty();
  for (auto it = gates.begin(); it != gates.end(); ++it) passed = passed && it.value().at("pass").get<bool>();
  summary["gates"] = gates;
  summary["passed"] = passed;
  report.summary = std::move(summary);
  report.passed = passed;
  return report;
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::vector<std::string> known = {"rate_scaling", "breakdown", "lepski_demo", "rerm_vs_mom"};
  if (std::find(known.begin(), known.end(), scenario) == known.end())
    throw DomainError("unknown scenario: " + scenario);
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (!params.is_object()) throw DomainError("params must be an object");
}

void from_json(const json& j, ExperimentConfig& cfg) {
  cfg = ExperimentConfig{};
  cfg.scenario = j.value("scenario", std::string());
  cfg.seed = j.value("seed", cfg.seed);
  cfg.replicates = j.value("replicates", cfg.replicates);
  cfg.timing = j.value("timing", cfg.timing);
  cfg.params = j.value("params", json::object());
  cfg.validate();
}

Estimate l2_error(const Model& model, const Truth& truth, int grid_points) {
  if (const auto* lin = std::get_if<LinearTruth>(&truth)) {
    if (!model.is_linear()) throw DomainError("l2_error: kernel model against a linear truth");
    return {(model.coeffs() - lin->coeffs).squaredNorm(), 0.0};
  }
  if (!std::holds_alternative<KernelTruth>(truth)) throw DomainError("l2_error: no truth recorded");
  if (grid_points < 2) throw DomainError("l2_error: need at least 2 grid points");
  Eigen::MatrixXd grid(grid_points, 1);
  for (int g = 0; g < grid_points; ++g) grid(g, 0) = (g + 0.5) / grid_points;
  const Eigen::VectorXd diff = predict(model, grid) - evaluate_truth(truth, grid);
  const Eigen::VectorXd sq = diff.array().square();
  return kernels::summarize(std::vector<double>(sq.data(), sq.data() + sq.size()));
}

double excess_risk(const Model& model, const Dataset& holdout, const LossSpec& loss) {
  const Eigen::VectorXd pf = predict(model, holdout.inputs);
  const Eigen::VectorXd ps = evaluate_truth(holdout.truth, holdout.inputs);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < holdout.size(); ++i)
    sum += loss_eval(loss, pf[i], holdout.targets[i]) - loss_eval(loss, ps[i], holdout.targets[i]);
  return sum / static_cast<double>(holdout.size());
}

double loglog_slope(const std::vector<double>& n, const std::vector<double>& err) {
  if (n.size() != err.size() || n.size() < 2) throw DomainError("loglog_slope: need >= 2 paired points");
  const auto k = static_cast<double>(n.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    mx += std::log(n[i]);
    my += std::log(err[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = std::log(n[i]) - mx;
    sxy += dx * (std::log(err[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

LabReport run_rate_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  const json& P = cfg.params;
  const auto n_grid = param<std::vector<Eigen::Index>>(P, "N_grid", {256, 512, 1024, 2048, 4096, 8192});
  const double p_decay = param(P, "p_decay", 0.5);
  const double beta = param(P, "beta", 1.0);
  const int k_max = param(P, "k_max", 512);
  const double x0 = param(P, "x0", 0.3);
  const NoiseSpec noise = param(P, "noise", NoiseSpec::cauchy(1.0));
  const double tau = param(P, "tau", 0.5);
  const double c_lambda = param(P, "lambda_constant", 1.0);
  const int eval_grid = param(P, "eval_grid", 2000);
  const auto holdout_n = param<Eigen::Index>(P, "holdout", 100000);
  const double slope_lo = param(P, "slope_min", -1.05);
  const double slope_hi = param(P, "slope_max", -0.35);
  SolverConfig base;
  base.max_iters = 3000;
  base.tolerance = 1e-6;
  const SolverConfig solver = solver_param(P, "solver", base);
  if (n_grid.size() < 2) throw DomainError("rate_scaling: need at least 2 sample sizes");

  const KernelSpec kernel = KernelSpec::synthetic_mercer(beta, p_decay, k_max);
  const Truth truth = unit_norm_kernel_truth(kernel, x0);
  const double f_norm = 1.0;
  const LossSpec loss = LossSpec::quantile(tau);
  const PenaltySpec penalty = PenaltySpec::squared_hilbert_norm();
  const DesignSpec design{DesignKind::uniform_unit, 0.0};

  const double sup_K = kernel.sup_norm();
  const BernsteinCheck bern = bernstein_gamma_quantile(noise, 6.0 * f_norm * sup_K);

  const int cells = static_cast<int>(n_grid.size());
  std::vector<Dataset> holdouts(static_cast<std::size_t>(cells));
  for (int c = 0; c < cells; ++c)
    holdouts[static_cast<std::size_t>(c)] =
        make_regression_dataset(design, noise, truth, holdout_n, derive_seed(cfg.seed, {stream::holdout, static_cast<std::uint64_t>(c)}));

  std::vector<double> lambda_used(static_cast<std::size_t>(cells)), lambda_theory(static_cast<std::size_t>(cells));
  for (int c = 0; c < cells; ++c) {
    const double n = static_cast<double>(n_grid[static_cast<std::size_t>(c)]);
    const double shape = std::pow(f_norm, 2.0 / (p_decay + 1.0)) / std::pow(n, 1.0 / (1.0 + p_decay));
    lambda_used[static_cast<std::size_t>(c)] = c_lambda * shape;
    lambda_theory[static_cast<std::size_t>(c)] =
        kernel_r_bar(bern.A_out, beta, 1.0, p_decay, f_norm, n).C_const *
        std::max(1.0, (8.0 + bern.gamma) * sup_K * f_norm) * shape;
  }

  std::vector<Failure> failures;
  const int reps = cfg.replicates;
  auto rows = run_tasks(cells * reps, [&](int t) {
    const int c = t / reps, r = t % reps;
    const auto uc = static_cast<std::size_t>(c);
    const Eigen::Index n = n_grid[uc];
    const auto data = make_regression_dataset(
        design, noise, truth, n, derive_seed(cfg.seed, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r)}));
    SolverConfig sc = solver;
    sc.seed = derive_seed(cfg.seed, {stream::solver, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r)});
    Stopwatch clock(cfg.timing);
    const Model m = fit_rerm(data, loss, penalty, lambda_used[uc], sc, kernel);
    const double wall = clock.ms();
    return std::vector<ReportRow>{{"rate_scaling", cell_name("N", static_cast<double>(n)), r, n, 1, 0.0, 1,
                                   lambda_used[uc], "rerm", l2_error(m, truth, eval_grid).value,
                                   excess_risk(m, holdouts[uc], loss), m.iterations, wall}};
  }, failures);

  std::vector<double> ns, means;
  json per_n = json::array();
  for (int c = 0; c < cells; ++c) {
    const auto n = n_grid[static_cast<std::size_t>(c)];
    std::vector<double> errs;
    for (const auto& row : rows)
      if (row.N == n) errs.push_back(row.l2_error);
    const Estimate e = kernels::summarize(errs);
    if (!errs.empty()) {
      ns.push_back(static_cast<double>(n));
      means.push_back(e.value);
    }
    per_n.push_back({{"N", n}, {"mean_l2_error", e.value}, {"stderr", e.stderr_},
                     {"lambda_used", lambda_used[static_cast<std::size_t>(c)]},
                     {"lambda_theory", lambda_theory[static_cast<std::size_t>(c)]}});
  }
  const double slope = ns.size() >= 2 ? loglog_slope(ns, means) : std::numeric_limits<double>::quiet_NaN();
  json summary = {{"scenario", "rate_scaling"},
                  {"p_decay", p_decay},
                  {"theory_slope", -1.0 / (1.0 + p_decay)},
                  {"slope", slope},
                  {"gamma", bern.gamma},
                  {"per_N", per_n}};
  json gates = {{"slope_in_range", {{"value", slope}, {"min", slope_lo}, {"max", slope_hi},
                                     {"pass", slope >= slope_lo && slope <= slope_hi}}}};
  return finish(std::move(rows), std::move(summary), gates, failures);
}

LabReport run_breakdown(const ExperimentConfig& cfg) {
  cfg.validate();
  const json& P = cfg.params;
  const auto n = param<Eigen::Index>(P, "N", 2000);
  const auto p = param<Eigen::Index>(P, "p", 20);
  const auto fracs = param<std::vector<double>>(P, "fracs", {0.0, 0.05});
  const double magnitude = param(P, "magnitude", 1e6);
  const auto mode = contamination_mode_from_string(param<std::string>(P, "mode", "x_only"));
  const double delta = param(P, "delta", 2.0);
  const double alpha = param(P, "alpha", 0.5);
  const double lambda = param(P, "lambda", 0.01);
  const auto margin = param<Eigen::Index>(P, "S_margin", 1);
  const NoiseSpec noise = param(P, "noise", NoiseSpec::gaussian(1.0));
  const double mom_limit = param(P, "mom_vs_clean_max", 3.0);
  const double blowup = param(P, "rerm_blowup_min", 10.0);
  const double agreement = param(P, "clean_agreement_max", 2.0);
  SolverConfig rerm_base;
  rerm_base.max_iters = 5000;
  rerm_base.tolerance = 1e-9;
  SolverConfig mom_base;
  mom_base.max_iters = 4000;
  const SolverConfig rerm_cfg = solver_param(P, "rerm_solver", rerm_base);
  const SolverConfig mom_cfg = solver_param(P, "mom_solver", mom_base);
  if (fracs.empty()) throw DomainError("breakdown: empty fraction grid");

  const Truth truth = LinearTruth{Eigen::VectorXd::Ones(p)};
  const LossSpec loss = LossSpec::huber(delta);
  const PenaltySpec penalty = PenaltySpec::elastic_net(alpha);
  const DesignSpec design{};

  std::vector<Failure> failures;
  const int reps = cfg.replicates;
  const int cells = static_cast<int>(fracs.size());
  auto rows = run_tasks(cells * reps, [&](int t) {
    const int c = t / reps, r = t % reps;
    const double frac = fracs[static_cast<std::size_t>(c)];
    const std::uint64_t data_seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)});
    const Dataset clean = make_regression_dataset(design, noise, truth, n, data_seed);
    const Dataset data = contaminate(clean, frac, magnitude, mode, data_seed);
    const auto outliers = static_cast<Eigen::Index>(data.outliers.size());
    const Eigen::Index S =
        outliers == 0 ? 1 : std::min<Eigen::Index>(n, static_cast<Eigen::Index>(std::ceil(7.0 * outliers / 3.0)) + margin);
    const std::string cell = cell_name("frac", frac);
    std::vector<ReportRow> out;

    SolverConfig rc = rerm_cfg;
    rc.seed = derive_seed(cfg.seed, {stream::solver, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r), 0});
    Stopwatch c1(cfg.timing);
    const Model rerm = fit_rerm(data, loss, penalty, lambda, rc);
    const double w1 = c1.ms();
    out.push_back({"breakdown", cell, r, n, p, frac, 1, lambda, "rerm", l2_error(rerm, truth).value,
                   excess_risk(rerm, clean, loss), rerm.iterations, w1});

    SolverConfig mc = mom_cfg;
    mc.seed = derive_seed(cfg.seed, {stream::solver, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r), 1});
    Stopwatch c2(cfg.timing);
    const Model mom = fit_mom_minmax(data, loss, penalty, lambda, S, mc);
    const double w2 = c2.ms();
    out.push_back({"breakdown", cell, r, n, p, frac, S, lambda, "mom", l2_error(mom, truth).value,
                   excess_risk(mom, clean, loss), mom.iterations, w2});
    return out;
  }, failures);

  json per_frac = json::array();
  for (double f : fracs) {
    per_frac.push_back(
        {{"frac", f},
         {"rerm_mean_l2", mean_of(rows, [&](const ReportRow& r) { return r.frac == f && r.estimator == "rerm"; })},
         {"mom_mean_l2", mean_of(rows, [&](const ReportRow& r) { return r.frac == f && r.estimator == "mom"; })}});
  }
  const double clean_rerm = mean_of(rows, [](const ReportRow& r) { return r.frac == 0.0 && r.estimator == "rerm"; });
  const double clean_mom = mean_of(rows, [](const ReportRow& r) { return r.frac == 0.0 && r.estimator == "mom"; });
  const double worst_frac = *std::max_element(fracs.begin(), fracs.end());
  const double dirty_rerm = mean_of(rows, [&](const ReportRow& r) { return r.frac == worst_frac && r.estimator == "rerm"; });
  const double dirty_mom = mean_of(rows, [&](const ReportRow& r) { return r.frac == worst_frac && r.estimator == "mom"; });

  json summary = {{"scenario", "breakdown"}, {"N", n}, {"p", p}, {"lambda", lambda}, {"per_frac", per_frac}};
  json gates = json::object();
  if (std::find(fracs.begin(), fracs.end(), 0.0) != fracs.end()) {
    const double ratio = clean_mom / clean_rerm;
    gates["clean_agreement"] = {{"mom_over_rerm", ratio}, {"max", agreement},
                                {"pass", ratio <= agreement && ratio >= 1.0 / agreement}};
    if (worst_frac > 0.0) {
      const double mom_ratio = dirty_mom / clean_rerm;
      const double rerm_ratio = dirty_rerm / clean_rerm;
      gates["mom_vs_clean_rerm"] = {{"ratio", mom_ratio}, {"max", mom_limit}, {"pass", mom_ratio <= mom_limit}};
      gates["rerm_breaks"] = {{"ratio", rerm_ratio}, {"min", blowup}, {"pass", rerm_ratio >= blowup}};
    }
  }
  return finish(std::move(rows), std::move(summary), gates, failures);
}

LabReport run_lepski_demo(const ExperimentConfig& cfg) {
  cfg.validate();
  const json& P = cfg.params;
  const auto n = param<Eigen::Index>(P, "N", 500);
  const auto p = param<Eigen::Index>(P, "p", 20);
  const auto support = param<Eigen::Index>(P, "support", 5);
  const double delta = param(P, "delta", 1.0);
  const double alpha = param(P, "alpha", 0.5);
  const double B = param(P, "B", 1.0);
  const double radius_scale = param(P, "radius_scale", 0.05);
  const NoiseSpec noise = param(P, "noise", NoiseSpec::gaussian(1.0));
  const double limit = param(P, "ratio_max", 3.0);
  LepskiConfig lep;
  lep.A_star = param(P, "A_star", 1.0);
  SolverConfig base;
  base.max_iters = 5000;
  base.tolerance = 1e-9;
  const SolverConfig solver = solver_param(P, "solver", base);
  if (support < 1 || support > p) throw DomainError("lepski_demo: support must lie in [1, p]");

  Eigen::VectorXd t_star = Eigen::VectorXd::Zero(p);
  t_star.head(support).setOnes();
  const Truth truth = LinearTruth{t_star};
  const LossSpec loss = LossSpec::huber(delta);
  const PenaltySpec penalty = PenaltySpec::elastic_net(alpha);
  const double phi_star = penalty_eval(penalty, t_star);
  lep.M_bound = param(P, "M_bound", static_cast<int>(std::ceil(phi_star)));
  const int J = lepski_grid_size(lep.M_bound);

  const RadiusOracle oracle = [&](double phi) {
    const auto radii = elastic_net_r_star(static_cast<double>(n), static_cast<double>(p), alpha, delta, B, lep.A_star, phi);
    return radius_scale * std::sqrt(radii.r_star_sq);
  };

  std::vector<Failure> failures;
  std::vector<json> per_rep(static_cast<std::size_t>(cfg.replicates));
  auto rows = run_tasks(cfg.replicates, [&](int r) {
    const Dataset data = make_regression_dataset(DesignSpec{}, noise, truth, n,
                                                 derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)}));
    SolverConfig sc = solver;
    sc.seed = derive_seed(cfg.seed, {stream::solver, static_cast<std::uint64_t>(r)});
    const LepskiState state = lepski_select(data, loss, penalty, lep, sc, oracle);
    std::vector<ReportRow> out;
    double best = std::numeric_limits<double>::infinity();
    json grid = json::array();
    for (std::size_t m = 0; m < state.size(); ++m) {
      const auto& g = state.grid[m];
      const double err = l2_error(state.fitted[m], truth).value;
      best = std::min(best, err);
      out.push_back({"lepski_demo", cell_name("j", g.j), r, n, p, 0.0, 1, g.lambda, "grid",
                     err, excess_risk(state.fitted[m], data, loss), state.fitted[m].iterations, 0.0});
      grid.push_back({{"j", g.j}, {"phi", g.phi}, {"lambda", g.lambda}, {"radius", g.radius}, {"l2_error", err}});
    }
    const Model& chosen = state.f_tilde();
    const auto& g = state.grid[static_cast<std::size_t>(state.selected - 1)];
    const double err = l2_error(chosen, truth).value;
    out.push_back({"lepski_demo", cell_name("j", g.j), r, n, p, 0.0, 1, g.lambda, "lepski", err,
                   excess_risk(chosen, data, loss), chosen.iterations, 0.0});
    const int last = static_cast<int>(state.size());
    per_rep[static_cast<std::size_t>(r)] = {{"rep", r},
                                            {"J", state.size()},
                                            {"k_star", state.k_star},
                                            {"selected_j", g.j},
                                            {"f_tilde_l2", err},
                                            {"best_grid_l2", best},
                                            {"ratio", err / best},
                                            {"last_in_last", state.accepts(last, last)},
                                            {"grid", grid}};
    return out;
  }, failures);

  bool ratio_ok = true, kstar_ok = true, last_ok = true, size_ok = true;
  json reps = json::array();
  for (const auto& rep : per_rep) {
    if (rep.is_null()) continue;
    ratio_ok = ratio_ok && rep.at("ratio").get<double>() <= limit;
    const int k = rep.at("k_star").get<int>();
    kstar_ok = kstar_ok && k >= 1 && k <= J;
    last_ok = last_ok && rep.at("last_in_last").get<bool>();
    size_ok = size_ok && rep.at("J").get<int>() == J;
    reps.push_back(rep);
  }
  json summary = {{"scenario", "lepski_demo"}, {"M_bound", lep.M_bound}, {"J", J},
                  {"phi_star", phi_star}, {"radius_scale", radius_scale}, {"replicates", reps}};
  json gates = {{"f_tilde_within_ratio", {{"max", limit}, {"pass", ratio_ok}}},
                {"k_star_in_range", {{"pass", kstar_ok}}},
                {"last_model_accepted", {{"pass", last_ok}}},
                {"grid_size", {{"expected", J}, {"pass", size_ok}}}};
  return finish(std::move(rows), std::move(summary), gates, failures);
}

LabReport run_rerm_vs_mom(const ExperimentConfig& cfg) {
  cfg.validate();
  const json& P = cfg.params;
  const auto n_grid = param<std::vector<Eigen::Index>>(P, "N_grid", {200, 400, 800, 1600, 3200});
  const auto p = param<Eigen::Index>(P, "p", 10);
  const double tau = param(P, "tau", 0.5);
  const double alpha = param(P, "alpha", 0.5);
  const double c_lambda = param(P, "lambda_constant", 0.05);
  const auto block_size = param<Eigen::Index>(P, "block_size", 20);
  const NoiseSpec heavy = param(P, "noise", NoiseSpec::cauchy(1.0));
  const NoiseSpec light = param(P, "sanity_noise", NoiseSpec::gaussian(1.0));
  const double sanity_max = param(P, "sanity_ratio_max", 2.0);
  const int inversions_allowed = param(P, "inversions_allowed", 1);
  SolverConfig rerm_base;
  rerm_base.max_iters = 3000;
  rerm_base.tolerance = 1e-8;
  SolverConfig mom_base;
  mom_base.max_iters = 3000;
  const SolverConfig rerm_cfg = solver_param(P, "rerm_solver", rerm_base);
  const SolverConfig mom_cfg = solver_param(P, "mom_solver", mom_base);

  const Truth truth = LinearTruth{Eigen::VectorXd::Ones(p)};
  const LossSpec loss = LossSpec::quantile(tau);
  const PenaltySpec penalty = PenaltySpec::elastic_net(alpha);
  const std::vector<std::pair<std::string, NoiseSpec>> noises = {{"heavy", heavy}, {"sanity", light}};

  const int cells = static_cast<int>(n_grid.size() * noises.size());
  const int reps = cfg.replicates;
  std::vector<Failure> failures;
  auto rows = run_tasks(cells * reps, [&](int t) {
    const int c = t / reps, r = t % reps;
    const auto un = static_cast<std::size_t>(c) % n_grid.size();
    const auto uz = static_cast<std::size_t>(c) / n_grid.size();
    const Eigen::Index n = n_grid[un];
    const double lambda = c_lambda * std::sqrt(static_cast<double>(p) / static_cast<double>(n));
    const Eigen::Index S = std::max<Eigen::Index>(1, n / block_size);
    const std::uint64_t data_seed =
        derive_seed(cfg.seed, {static_cast<std::uint64_t>(uz), static_cast<std::uint64_t>(un), static_cast<std::uint64_t>(r)});
    const Dataset data = make_regression_dataset(DesignSpec{}, noises[uz].second, truth, n, data_seed);
    const std::string cell = "noise=" + noises[uz].first + ";" + cell_name("N", static_cast<double>(n));
    std::vector<ReportRow> out;

    SolverConfig rc = rerm_cfg;
    rc.seed = derive_seed(data_seed, {stream::solver, 0});
    Stopwatch c1(cfg.timing);
    const Model rerm = fit_rerm(data, loss, penalty, lambda, rc);
    const double w1 = c1.ms();
    out.push_back({"rerm_vs_mom", cell, r, n, p, 0.0, 1, lambda, "rerm", l2_error(rerm, truth).value,
                   excess_risk(rerm, data, loss), rerm.iterations, w1});
    SolverConfig mc = mom_cfg;
    mc.seed = derive_seed(data_seed, {stream::solver, 1});
    Stopwatch c2(cfg.timing);
    const Model mom = fit_mom_minmax(data, loss, penalty, lambda, S, mc);
    const double w2 = c2.ms();
    out.push_back({"rerm_vs_mom", cell, r, n, p, 0.0, S, lambda, "mom", l2_error(mom, truth).value,
                   excess_risk(mom, data, loss), mom.iterations, w2});
    return out;
  }, failures);

  json curves = json::object();
  bool monotone_ok = true, sanity_ok = true;
  for (const auto& [name, spec] : noises) {
    for (const std::string est : {"rerm", "mom"}) {
      std::vector<double> means;
      for (auto n : n_grid) {
        const std::string cell = "noise=" + name + ";" + cell_name("N", static_cast<double>(n));
        means.push_back(mean_of(rows, [&](const ReportRow& r) { return r.cell == cell && r.estimator == est; }));
      }
      int inversions = 0;
      for (std::size_t i = 1; i < means.size(); ++i)
        if (!(means[i] < means[i - 1])) ++inversions;
      curves[name][est] = {{"mean_l2", means}, {"inversions", inversions}};
      if (name == "heavy") monotone_ok = monotone_ok && inversions <= inversions_allowed;
    }
    if (name == "sanity") {
      const auto& rm = curves[name]["rerm"]["mean_l2"];
      const auto& mm = curves[name]["mom"]["mean_l2"];
      for (std::size_t i = 0; i < n_grid.size(); ++i)
        sanity_ok = sanity_ok && mm[i].get<double>() <= sanity_max * rm[i].get<double>();
    }
  }
  json summary = {{"scenario", "rerm_vs_mom"}, {"N_grid", n_grid}, {"curves", curves}};
  json gates = {{"heavy_tail_decreasing", {{"inversions_allowed", inversions_allowed}, {"pass", monotone_ok}}},
                {"gaussian_sanity", {{"max", sanity_max}, {"pass", sanity_ok}}}};
  return finish(std::move(rows), std::move(summary), gates, failures);
}

LabReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.scenario == "rate_scaling") return run_rate_scaling(cfg);
  if (cfg.scenario == "breakdown") return run_breakdown(cfg);
  if (cfg.scenario == "lepski_demo") return run_lepski_demo(cfg);
  return run_rerm_vs_mom(cfg);
}

void write_rows_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kRowsHeader << '\n';
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.cell << ',' << r.rep << ',' << r.N << ',' << r.p << ',' << r.frac << ',' << r.S
        << ',' << r.lambda << ',' << r.estimator << ',' << r.l2_error << ',' << r.excess_risk << ',' << r.iters
        << ',' << r.wall_ms << '\n';
  }
}

void write_report(const std::string& dir, const LabReport& report) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  std::ofstream rows((base / "rows.csv").string());
  if (!rows) throw DomainError("cannot write " + (base / "rows.csv").string());
  write_rows_csv(rows, report.rows);
  write_json_file((base / "summary.json").string(), report.summary);
}

}  // namespace lipmom
