#include "lipmom/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lipmom/error.hpp"
#include "lipmom/penalties.hpp"
#include "lipmom/random.hpp"

namespace lipmom {
namespace {

// Minimum of a convex function on [a, b]; endpoints included.
template <class F>
double convex_min(F&& f, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double best = std::min(f(a), f(b));
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return std::min({best, f1, f2});
}

Eigen::VectorXd gaussian_vector(Eigen::Index n, Engine& eng) {
  std::normal_distribution<double> z;
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = z(eng);
  return g;
}

Eigen::VectorXd rademacher_vector(Eigen::Index n, Engine& eng) {
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = (eng() >> 63) != 0 ? 1.0 : -1.0;
  return s;
}

void check_draws(int draws) {
  if (draws < 2) throw DomainError("Monte Carlo: need at least 2 draws");
}

}  // namespace

double sup_inner_product_l1l2(const Eigen::VectorXd& g, double rho, double r) {
  if (rho < 0.0 || r < 0.0) throw DomainError("sup_inner_product_l1l2: radii must be >= 0");
  if (rho == 0.0 || r == 0.0 || g.size() == 0) return 0.0;
  const double top = g.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0.0;
  auto h = [&](double mu) { return mu * rho + r * soft_threshold(g, mu).norm(); };
  return convex_min(h, 0.0, top);
}

double sup_inner_product_ellipsoid(const Eigen::VectorXd& s, double rho, double r, const Eigen::VectorXd& mu) {
  if (rho < 0.0 || r < 0.0) throw DomainError("ellipsoid sup: radii must be >= 0");
  if (s.size() != mu.size()) throw DomainError("ellipsoid sup: size mismatch");
  if (rho == 0.0 || r == 0.0) return 0.0;
  const double r2 = r * r;
  const double rho2 = rho * rho;
  auto h = [&](double theta) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (s[k] == 0.0) continue;
      const double lam = std::max(mu[k], 0.0);
      if (lam == 0.0) {
        if (theta == 0.0) sum += s[k] * s[k] * r2;
        continue;
      }
      sum += s[k] * s[k] / (theta / (rho2 * lam) + (1.0 - theta) / r2);
    }
    return sum;
  };
  return std::sqrt(std::max(0.0, convex_min(h, 0.0, 1.0)));
}

Estimate gaussian_mean_width_mc(const WidthSet& set, int draws, std::uint64_t seed) {
  check_draws(draws);
  const auto samples = kernels::replicates(draws, [&](int d) {
    auto eng = make_engine(seed, {stream::monte_carlo, static_cast<std::uint64_t>(d)});
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, L1L2Set>) {
            return sup_inner_product_l1l2(gaussian_vector(s.p, eng), s.rho, s.r);
          } else if constexpr (std::is_same_v<T, L2BallSet>) {
            return s.r * gaussian_vector(s.p, eng).norm();
          } else {
            return sup_inner_product_ellipsoid(gaussian_vector(s.eigenvalues.size(), eng), s.rho, s.r,
                                               s.eigenvalues);
          }
        },
        set);
  });
  return kernels::summarize(samples);
}

Estimate rademacher_complexity_mc(const RademacherClass& cls, const Eigen::MatrixXd& design, int draws,
                                  std::uint64_t seed) {
  check_draws(draws);
  if (const auto* lin = std::get_if<LinearClass>(&cls)) {
    if (design.rows() == 0) throw DomainError("rademacher: empty design sample");
    const auto samples = kernels::replicates(draws, [&](int d) {
      auto eng = make_engine(seed, {stream::monte_carlo, static_cast<std::uint64_t>(d)});
      const Eigen::VectorXd v = design.transpose() * rademacher_vector(design.rows(), eng);
      return sup_inner_product_l1l2(v, lin->rho, lin->r);
    });
    return kernels::summarize(samples);
  }
  if (const auto* fixed = std::get_if<FixedFunction>(&cls)) {
    if (fixed->values.size() == 0) throw DomainError("rademacher: empty sample");
    const auto samples = kernels::replicates(draws, [&](int d) {
      auto eng = make_engine(seed, {stream::monte_carlo, static_cast<std::uint64_t>(d)});
      return std::abs(rademacher_vector(fixed->values.size(), eng).dot(fixed->values));
    });
    return kernels::summarize(samples);
  }
  const auto& ker = std::get<KernelClass>(cls);
  const Eigen::Index n = ker.gram.rows();
  if (n == 0 || ker.gram.cols() != n) throw DomainError("rademacher: Gram matrix must be square and nonempty");
  // Values v = K a: v^T K^+ v <= rho^2 and |v|^2 <= N r^2, diagonal in the Gram eigenbasis.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ker.gram);
  const Eigen::MatrixXd& u = es.eigenvectors();
  const Eigen::VectorXd mu = es.eigenvalues().cwiseMax(0.0);
  const double r_emp = ker.r * std::sqrt(static_cast<double>(n));
  const auto samples = kernels::replicates(draws, [&](int d) {
    auto eng = make_engine(seed, {stream::monte_carlo, static_cast<std::uint64_t>(d)});
    const Eigen::VectorXd s = u.transpose() * rademacher_vector(n, eng);
    return sup_inner_product_ellipsoid(s, ker.rho_norm, r_emp, mu);
  });
  return kernels::summarize(samples);
}

double kernel_complexity_bound(double rho_norm, double r, const Eigen::VectorXd& eigenvalues, double sup_K) {
  if (rho_norm < 0.0 || r < 0.0) throw DomainError("kernel_complexity_bound: radii must be >= 0");
  const double rho2 = rho_norm * rho_norm;
  const double r2 = r * r;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    if (eigenvalues[k] < 0.0) throw DomainError("kernel_complexity_bound: negative eigenvalue");
    sum += std::min(rho2 * eigenvalues[k], r2);
  }
  return std::sqrt(2.0) * sup_K * std::sqrt(sum);
}

double fixed_point_lhs(const FixedPointInputs& in, double complexity) {
  return in.shape == FixedPointShape::gaussian_width ? 32.0 * in.L * in.B * complexity : complexity;
}

double fixed_point_rhs(const FixedPointInputs& in, double r) {
  switch (in.shape) {
    case FixedPointShape::gaussian_width: return std::sqrt(in.N) * r * r / (2.0 * in.A);
    case FixedPointShape::mom_rademacher: return r * r * in.N / (384.0 * in.A * in.L);
    case FixedPointShape::rkhs_rademacher: return in.N * r * r / (64.0 * in.A * in.L);
  }
  return 0.0;
}

FixedPointResult fixed_point_solve(const ComplexityOracle& oracle, const FixedPointInputs& in) {
  if (!oracle) throw DomainError("fixed_point_solve: missing oracle");
  if (!(in.tol > 0.0) || !(in.eps > 0.0) || !(in.A > 0.0) || !(in.L > 0.0) || !(in.B > 0.0) || !(in.N > 0.0))
    throw DomainError("fixed_point_solve: A, L, B, N, tol and eps must be > 0");
  FixedPointResult res;
  res.A = in.A;
  struct Point {
    double lhs, rhs, se;
  };
  auto eval = [&](double r) {
    const Estimate e = oracle(r);
    ++res.evaluations;
    return Point{fixed_point_lhs(in, e.value), fixed_point_rhs(in, r), fixed_point_lhs(in, e.stderr_)};
  };

  if (const Point p = eval(in.eps); p.lhs <= p.rhs) {
    res.radius = 0.0;
    res.certificate = {p.lhs, p.rhs, p.se, 0.0, 0.0, 0.0, true, true};
    return res;
  }
  double lo = in.eps;
  double hi = std::max(1.0, 2.0 * in.eps);
  int doublings = 0;
  for (Point p = eval(hi); p.lhs > p.rhs; p = eval(hi)) {
    if (++doublings > 60) throw SolverFailure("fixed_point_solve: no bracket after 60 doublings", {});
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > in.tol * hi) {
    const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    const Point p = eval(mid);
    (p.lhs <= p.rhs ? hi : lo) = mid;
  }
  res.radius = hi;
  const Point at = eval(hi);
  const Point below = eval(hi / 1.1);
  res.mc_stderr = at.se;
  res.certificate = {at.lhs,   at.rhs,   at.se,
                     below.lhs, below.rhs, below.se,
                     at.lhs - 2.0 * at.se <= at.rhs, below.lhs + 2.0 * below.se > below.rhs};
  return res;
}

double localization_radius(double eta, double A, double phi_star) {
  return eta * (4.0 + 2.0 / A) * phi_star;
}

ElasticNetRadii elastic_net_r_star(double N, double p, double alpha, double delta, double B, double A,
                                   double phi_star) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("elastic_net_r_star: alpha must be in (0,1)");
  if (!(N > 0.0 && p > 0.0 && delta > 0.0 && B > 0.0 && A > 0.0 && phi_star > 0.0))
    throw DomainError("elastic_net_r_star: inputs must be > 0");
  const double c = 64.0 * delta * B * A;
  const double k = (8.0 + 4.0 / A) * phi_star;
  ElasticNetRadii out;
  if (k * k * N / ((1.0 - alpha) * (1.0 - alpha) * c) <= p * p) {
    const double arg = std::exp(1.0) * p * (1.0 - alpha) / (std::sqrt(N) * k);
    out.r1_sq = k / (1.0 - alpha) * std::sqrt(c / N * std::log(std::max(arg, std::exp(1.0))));
  } else {
    out.r1_sq = c * p / N;
  }
  if (N >= c * alpha * p / k) {
    out.r2_sq = c * p / N;
  } else {
    out.r2_sq = std::sqrt(64.0 * delta * B * k * p / (alpha * N));
  }
  out.r_star_sq = std::min(out.r1_sq, out.r2_sq);
  return out;
}

KernelRadii kernel_r_bar(double A, double beta, double L, double p_decay, double f_star_norm, double N) {
  if (!(p_decay > 0.0 && p_decay < 1.0)) throw DomainError("kernel_r_bar: p_decay must be in (0,1)");
  if (!(A > 0.0 && beta > 0.0 && L > 0.0 && N > 0.0 && f_star_norm >= 0.0))
    throw DomainError("kernel_r_bar: inputs must be positive");
  KernelRadii out;
  out.C_const = std::pow(384.0 * A * beta * L, 2.0 / (p_decay + 1.0)) *
                std::pow(4.0 * (2.0 + 1.0 / A), 2.0 * p_decay / (p_decay + 1.0));
  out.r_tilde_sq = out.C_const * std::pow(f_star_norm, 2.0 * p_decay / (p_decay + 1.0)) /
                   std::pow(N, 1.0 / (p_decay + 1.0));
  out.r_bar_sq = out.r_tilde_sq / 6.0;
  return out;
}

double c_s_r(double A, double L, double S, double N, double r_tilde_sq) {
  if (!(N > 0.0) || S < 0.0) throw DomainError("c_s_r: need N > 0 and S >= 0");
  return std::max(r_tilde_sq, 368.0 * A * A * L * L * S / N);
}

std::vector<MomentRow> moment_growth_diagnostic(const std::vector<double>& samples, int q_max) {
  if (q_max < 2) throw DomainError("moment_growth_diagnostic: q_max must be >= 2");
  if (samples.empty()) throw DomainError("moment_growth_diagnostic: empty sample");
  std::vector<MomentRow> rows;
  for (int q = 1; q <= q_max; ++q) {
    double sum = 0.0;
    for (double z : samples) sum += std::pow(std::abs(z), q);
    const double norm = std::pow(sum / static_cast<double>(samples.size()), 1.0 / q);
    rows.push_back({q, norm, norm / std::sqrt(static_cast<double>(q))});
  }
  return rows;
}

FixedPointResult mom_linear_radius(const Eigen::MatrixXd& design, double rho, const FixedPointInputs& in,
                                   int draws, std::uint64_t seed) {
  if (design.rows() < 2) throw DomainError("mom_linear_radius: need at least 2 rows");
  auto solve_on = [&](const Eigen::MatrixXd& rows) {
    FixedPointInputs local = in;
    local.shape = FixedPointShape::mom_rademacher;
    local.N = static_cast<double>(rows.rows());
    return fixed_point_solve(
        [&](double r) { return rademacher_complexity_mc(LinearClass{rho, r}, rows, draws, seed); }, local);
  };
  const FixedPointResult full = solve_on(design);

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(design.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto eng = make_engine(seed, {stream::subset});
  std::shuffle(idx.begin(), idx.end(), eng);
  idx.resize((idx.size() + 1) / 2);
  std::sort(idx.begin(), idx.end());
  const FixedPointResult half = solve_on(design(idx, Eigen::all));
  return half.radius > full.radius ? half : full;
}

FixedPointResult linear_analytic_radius(const FixedPointInputs& in) {
  FixedPointInputs local = in;
  local.shape = FixedPointShape::gaussian_width;
  return fixed_point_solve([](double r) { return Estimate{r, 0.0}; }, local);
}

FixedPointResult elastic_net_width_radius(Eigen::Index p, double alpha, double eta, double phi_star,
                                          const FixedPointInputs& in, int draws, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("elastic_net_width_radius: alpha must be in (0,1)");
  if (p < 1 || !(phi_star >= 0.0)) throw DomainError("elastic_net_width_radius: invalid inputs");
  check_draws(draws);
  const double R = localization_radius(eta, in.A, phi_star);
  const double rho = R / (1.0 - alpha);
  const double cap = std::sqrt(R / alpha);
  // one set of Gaussian draws reused for every radius
  std::vector<Eigen::VectorXd> g(static_cast<std::size_t>(draws));
  for (int d = 0; d < draws; ++d) {
    auto eng = make_engine(seed, {stream::monte_carlo, static_cast<std::uint64_t>(d)});
    g[static_cast<std::size_t>(d)] = gaussian_vector(p, eng);
  }
  FixedPointInputs local = in;
  local.shape = FixedPointShape::gaussian_width;
  return fixed_point_solve(
      [&](double r) {
        const double radius = std::min(r, cap);
        return kernels::summarize(kernels::replicates(draws, [&](int d) {
          return sup_inner_product_l1l2(g[static_cast<std::size_t>(d)], rho, radius);
        }));
      },
      local);
}

FixedPointResult kernel_bound_radius(const Eigen::VectorXd& eigenvalues, double sup_K, double f_star_norm,
                                     const FixedPointInputs& in) {
  if (!(f_star_norm >= 0.0)) throw DomainError("kernel_bound_radius: norm must be >= 0");
  const double rho = 2.0 * std::sqrt(2.0 + 1.0 / in.A) * f_star_norm;
  const double root_n = std::sqrt(in.N);
  FixedPointInputs local = in;
  local.shape = FixedPointShape::rkhs_rademacher;
  return fixed_point_solve(
      [&](double r) { return Estimate{root_n * kernel_complexity_bound(rho, r, eigenvalues, sup_K), 0.0}; }, local);
}

void to_json(nlohmann::json& j, const FixedPointResult& res) {
  const auto& c = res.certificate;
  j = {{"radius", res.radius},
       {"A", res.A},
       {"stderr", res.mc_stderr},
       {"evaluations", res.evaluations},
       {"certificate",
        {{"lhs_at", c.lhs_at},
         {"rhs_at", c.rhs_at},
         {"stderr_at", c.stderr_at},
         {"lhs_below", c.lhs_below},
         {"rhs_below", c.rhs_below},
         {"stderr_below", c.stderr_below},
         {"holds", c.holds},
         {"fails_below", c.fails_below}}}};
}

}  // namespace lipmom
