// lipmom command-line front end: JSON config in, JSON result out.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lipmom/error.hpp"
#include "lipmom/io.hpp"
#include "lipmom/lab.hpp"
#include "lipmom/solvers.hpp"
#include "lipmom/theory.hpp"

namespace {

using nlohmann::json;
using namespace lipmom;

struct Estimation {
  Dataset data;
  LossSpec loss;
  PenaltySpec penalty;
  double lambda = 0.0;
  SolverConfig solver;
  std::optional<KernelSpec> kernel;
};

Estimation load_estimation(const json& cfg, const std::string& base_dir) {
  Estimation e;
  e.data = dataset_from_json(cfg.at("data"), base_dir);
  e.loss = cfg.at("loss").get<LossSpec>();
  e.penalty = cfg.at("penalty").get<PenaltySpec>();
  e.lambda = cfg.value("lambda", 0.0);
  if (cfg.contains("solver")) e.solver = cfg.at("solver").get<SolverConfig>();
  if (cfg.contains("kernel")) e.kernel = cfg.at("kernel").get<KernelSpec>();
  return e;
}

json model_result(const Model& m, const Dataset& data) {
  json out = m;
  if (!std::holds_alternative<std::monostate>(data.truth)) {
    const Estimate err = l2_error(m, data.truth);
    out["l2_error_vs_truth"] = err.value;
    if (err.stderr_ > 0.0) out["l2_error_stderr"] = err.stderr_;
  }
  return out;
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(out_path, j);
  }
}

std::string parent_dir(const std::string& path) {
  return std::filesystem::path(path).parent_path().string();
}

json fit_rerm_cmd(const json& cfg, const std::string& base) {
  const Estimation e = load_estimation(cfg, base);
  return model_result(fit_rerm(e.data, e.loss, e.penalty, e.lambda, e.solver, e.kernel), e.data);
}

json fit_mom_cmd(const json& cfg, const std::string& base) {
  const Estimation e = load_estimation(cfg, base);
  const auto S = cfg.at("S").get<Eigen::Index>();
  json out = model_result(fit_mom_minmax(e.data, e.loss, e.penalty, e.lambda, S, e.solver, e.kernel), e.data);
  out["S"] = S;
  return out;
}

RadiusOracle oracle_from(const json& spec, const Estimation& e, const LepskiConfig& lep) {
  const auto kind = spec.value("kind", std::string("elastic_net"));
  const double scale = spec.value("radius_scale", 1.0);
  const double n = static_cast<double>(e.data.size());
  if (kind == "elastic_net") {
    if (e.penalty.kind != PenaltyKind::elastic_net) throw DomainError("oracle elastic_net needs an elastic-net penalty");
    const double p = static_cast<double>(e.data.dim());
    const double delta = spec.value("delta", lipschitz_constant(e.loss));
    const double B = spec.value("B", 1.0);
    const double alpha = e.penalty.alpha;
    const double A = lep.A_star;
    return [=](double phi) { return scale * std::sqrt(elastic_net_r_star(n, p, alpha, delta, B, A, phi).r_star_sq); };
  }
  if (kind == "kernel") {
    if (!e.kernel || e.kernel->kind != KernelKind::synthetic_mercer)
      throw DomainError("oracle kernel needs a synthetic_mercer kernel");
    const KernelSpec k = *e.kernel;
    const double L = lipschitz_constant(e.loss);
    const double A = lep.A_star;
    return [=](double phi) {
      return scale * std::sqrt(kernel_r_bar(A, k.beta, L, k.p_decay, std::sqrt(phi), n).r_bar_sq);
    };
  }
  if (kind == "constant") {
    const double r = spec.at("radius").get<double>();
    return [=](double) { return r; };
  }
  throw DomainError("unknown radius oracle: " + kind);
}

json lepski_cmd(const json& cfg, const std::string& base) {
  const Estimation e = load_estimation(cfg, base);
  LepskiConfig lep;
  const json l = cfg.value("lepski", json::object());
  lep.M_bound = l.value("M_bound", lep.M_bound);
  lep.A_star = l.value("A_star", lep.A_star);
  const RadiusOracle oracle = oracle_from(cfg.value("oracle", json::object()), e, lep);
  const LepskiState state = lepski_select(e.data, e.loss, e.penalty, lep, e.solver, oracle, e.kernel);
  json out = model_result(state.f_tilde(), e.data);
  out["J"] = state.size();
  out["k_star"] = state.k_star;
  out["selected_j"] = state.grid[static_cast<std::size_t>(state.selected - 1)].j;
  out["reordered"] = state.reordered;
  json grid = json::array();
  for (std::size_t m = 0; m < state.size(); ++m) {
    const auto& g = state.grid[m];
    json row = {{"j", g.j}, {"phi", g.phi}, {"lambda", g.lambda}, {"radius", g.radius},
                {"objective", state.fitted[m].objective}, {"threshold", state.thresholds[static_cast<Eigen::Index>(m)]}};
    if (!std::holds_alternative<std::monostate>(e.data.truth))
      row["l2_error_vs_truth"] = l2_error(state.fitted[m], e.data.truth).value;
    grid.push_back(row);
  }
  out["grid"] = grid;
  return out;
}

FixedPointInputs fixed_point_inputs(const json& cfg) {
  FixedPointInputs in;
  in.A = cfg.value("A", in.A);
  in.L = cfg.value("L", in.L);
  in.B = cfg.value("B", in.B);
  in.N = cfg.at("N").get<double>();
  in.tol = cfg.value("tol", in.tol);
  return in;
}

json complexity_cmd(const json& cfg) {
  const auto oracle = cfg.at("oracle").get<std::string>();
  const FixedPointInputs in = fixed_point_inputs(cfg);
  const int draws = cfg.value("draws", 400);
  const auto seed = cfg.value("seed", std::uint64_t{0});
  FixedPointResult res;
  if (oracle == "linear_analytic") {
    res = linear_analytic_radius(in);
  } else if (oracle == "elastic_net_width") {
    res = elastic_net_width_radius(cfg.at("p").get<Eigen::Index>(), cfg.at("alpha").get<double>(),
                                   cfg.value("eta", 2.0), cfg.at("phi_star").get<double>(), in, draws, seed);
  } else if (oracle == "kernel_bound") {
    const KernelSpec k = cfg.at("kernel").get<KernelSpec>();
    res = kernel_bound_radius(k.eigenvalues(), k.sup_norm(), cfg.value("f_star_norm", 1.0), in);
  } else if (oracle == "mom_linear") {
    const auto p = cfg.at("p").get<Eigen::Index>();
    const double alpha = cfg.at("alpha").get<double>();
    const double R = localization_radius(cfg.value("eta", 2.0), in.A, cfg.at("phi_star").get<double>());
    const Eigen::MatrixXd design = generate_design(DesignSpec{}, static_cast<Eigen::Index>(in.N), p, seed);
    res = mom_linear_radius(design, R / (1.0 - alpha), in, draws, seed);
  } else {
    throw DomainError("unknown complexity oracle: " + oracle);
  }
  json out = res;
  out["inputs"] = cfg;
  return out;
}

json bernstein_cmd(const json& cfg) {
  const auto loss = cfg.at("loss").get<std::string>();
  const NoiseSpec noise = cfg.at("noise").get<NoiseSpec>();
  BernsteinCheck chk;
  if (loss == "huber") {
    chk = bernstein_gamma_huber(noise, cfg.at("delta").get<double>(), cfg.value("C_prime", 1.0),
                                cfg.at("r").get<double>());
  } else if (loss == "quantile") {
    double R = 0.0;
    if (cfg.contains("radius_R")) {
      R = cfg.at("radius_R").get<double>();
    } else {
      R = 6.0 * cfg.at("f_star_norm").get<double>() * cfg.at("sup_K").get<double>();
    }
    chk = bernstein_gamma_quantile(noise, R);
  } else {
    throw DomainError("bernstein-check: loss must be huber or quantile");
  }
  json out = chk;
  out["inputs"] = cfg;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lipmom: robust estimators for Lipschitz-convex losses"};
  app.require_subcommand(1);
  std::string config, out;

  auto add_json_cmd = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "write the JSON result here instead of stdout");
    return sub;
  };
  auto* rerm = add_json_cmd("fit-rerm", "regularized empirical risk minimizer");
  auto* mom = add_json_cmd("fit-mom", "minmax median-of-means estimator");
  auto* lep = add_json_cmd("lepski", "Lepski selection over the penalty grid");
  auto* cplx = add_json_cmd("complexity", "complexity fixed point with certificate");
  auto* bern = add_json_cmd("bernstein-check", "local Bernstein constant for huber / quantile");

  std::string scenario, out_dir;
  auto* lab = app.add_subcommand("lab", "run an experiment scenario");
  lab->add_option("scenario", scenario, "rate_scaling | breakdown | lepski_demo | rerm_vs_mom")->required();
  lab->add_option("--config", config, "JSON experiment config")->check(CLI::ExistingFile);
  lab->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (lab->parsed()) {
      json j = config.empty() ? json::object() : read_json_file(config);
      j["scenario"] = scenario;
      const LabReport report = run_experiment(j.get<ExperimentConfig>());
      write_report(out_dir, report);
      std::cout << report.summary.at("gates").dump(2) << '\n';
      return report.passed ? 0 : 1;
    }
    const json cfg = read_json_file(config);
    const std::string base = parent_dir(config);
    json result;
    if (rerm->parsed()) result = fit_rerm_cmd(cfg, base);
    else if (mom->parsed()) result = fit_mom_cmd(cfg, base);
    else if (lep->parsed()) result = lepski_cmd(cfg, base);
    else if (cplx->parsed()) result = complexity_cmd(cfg);
    else if (bern->parsed()) result = bernstein_cmd(cfg);
    emit(result, out);
    return 0;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
