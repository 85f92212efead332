#include "ngalerkin/problems.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ngalerkin {

DomainBox::DomainBox(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.empty()) {
    throw std::invalid_argument("domain bounds must have equal positive length");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw std::invalid_argument("domain requires lower < upper");
  }
}

DomainBox DomainBox::cube(std::size_t d, double lo, double hi) {
  return DomainBox(std::vector<double>(d, lo), std::vector<double>(d, hi));
}

double DomainBox::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) v *= upper[i] - lower[i];
  return v;
}

bool DomainBox::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

// --- KdV -----------------------------------------------------------------------------

double TwoSoliton::operator()(double t, double x) const {
  // u = 2 d^2/dx^2 log tau, tau = 1 + e1 + e2 + A e1 e2, eta_i = k_i (x - x_i) - k_i^3 t
  // with wavenumbers k_i = 2 kappa_i (amplitudes 2 kappa_i^2, speeds 4 kappa_i^2).
  const double k1 = 2.0 * kappa1;
  const double k2 = 2.0 * kappa2;
  const double a12 = std::pow((k1 - k2) / (k1 + k2), 2);
  const double eta1 = k1 * (x - x1) - k1 * k1 * k1 * t;
  const double eta2 = k2 * (x - x2) - k2 * k2 * k2 * t;
  // Scale tau by exp(-max(0, eta1, eta2, eta1 + eta2)) to avoid overflow; the
  // log-derivative is unchanged.
  const double shift = std::max({0.0, eta1, eta2, eta1 + eta2});
  const double e0 = std::exp(-shift);
  const double e1 = std::exp(eta1 - shift);
  const double e2 = std::exp(eta2 - shift);
  const double e12 = a12 * std::exp(eta1 + eta2 - shift);
  // tau tau'' - tau'^2 = sum_{i<j} w_i w_j (k_i - k_j)^2 over the four terms, free of cancellation
  const std::array<double, 4> w{e0, e1, e2, e12};
  const std::array<double, 4> k{0.0, k1, k2, k1 + k2};
  double num = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) num += w[i] * w[j] * (k[i] - k[j]) * (k[i] - k[j]);
  }
  const double tau = e0 + e1 + e2 + e12;
  return 2.0 * num / (tau * tau);
}

ProblemDef kdv_problem() {
  ProblemDef p;
  p.name = "kdv";
  p.domain = DomainBox({-20.0}, {40.0});
  p.network = NetworkSpec{1, {5, 5}, Activation::sigmoid, false, Wrapper::none};
  p.param = std::make_shared<Mlp>(*p.network);
  p.rhs = make_rhs({{0, 1}, {0, 3}}, [](double, auto, const auto& u, auto d) {
    return -d[1] - 6.0 * (u * d[0]);
  });
  p.penalties.push_back(BoundaryPenalty{{{-20.0}, {40.0}}, 1e4, {}});
  const TwoSoliton sol;
  p.initial_condition = [sol](std::span<const double> x) { return sol(0.0, x[0]); };
  p.analytic = [sol](double t, std::span<const double> x) { return sol(t, x[0]); };
  return p;
}

// --- advection ------------------------------------------------------------------------

namespace {

double advection_ad(std::size_t i, std::size_t d) {
  return 2.0 + 2.0 / static_cast<double>(d) * static_cast<double>(i);
}

}  // namespace

std::vector<double> advection_velocity(double t, std::size_t d) {
  std::vector<double> a(d);
  for (std::size_t i = 0; i < d; ++i) {
    a[i] = static_cast<double>(i + 1) * (std::sin(std::numbers::pi * t * advection_ad(i, d)) + 1.25);
  }
  return a;
}

std::vector<double> advection_displacement(double t, std::size_t d) {
  std::vector<double> s(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double w = std::numbers::pi * advection_ad(i, d);
    s[i] = static_cast<double>(i + 1) * ((1.0 - std::cos(w * t)) / w + 1.25 * t);
  }
  return s;
}

double GaussianMixture::operator()(std::span<const double> x) const {
  double u = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) {
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = x[i] - means[k][i];
      q += r * r / variances[k][i];
    }
    u += std::exp(-0.5 * q);
  }
  return u;
}

void GaussianMixture::sample(Stream& rng, std::span<double> out) const {
  // Component k carries mass (2 pi)^{d/2} sqrt(det Sigma_k).
  std::vector<double> mass(means.size());
  for (std::size_t k = 0; k < means.size(); ++k) {
    double m = 1.0;
    for (double v : variances[k]) m *= std::sqrt(v);
    mass[k] = m;
  }
  std::discrete_distribution<std::size_t> pick(mass.begin(), mass.end());
  const std::size_t k = pick(rng);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = means[k][i] + std::sqrt(variances[k][i]) * normal(rng);
  }
}

GaussianMixture advection_initial_mixture(std::size_t d) {
  GaussianMixture g;
  g.means.assign(2, std::vector<double>(d));
  g.variances.assign(2, std::vector<double>(d));
  const double dd = static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double sign = (i % 2 == 0) ? -1.0 : 1.0;  // (-1)^(i+1) for 1-based i+1
    g.means[0][i] = 1.1;
    g.means[1][i] = 0.75 * (1.5 - sign / (dd + 1.0));
    g.variances[0][i] = 2.0 * static_cast<double>(i + 1) / 200.0;
    g.variances[1][i] = (dd + 1.0 - static_cast<double>(i)) / 200.0;
  }
  return g;
}

ProblemDef advection_problem() {
  constexpr std::size_t d = 5;
  ProblemDef p;
  p.name = "advection5d";
  p.domain = DomainBox::cube(d, 0.0, 10.0);
  p.network = NetworkSpec{d, {15, 15}, Activation::sigmoid, false, Wrapper::none};
  p.param = std::make_shared<Mlp>(*p.network);
  std::vector<DerivOrder> orders;
  for (std::size_t i = 0; i < d; ++i) orders.push_back({i, 1});
  p.rhs = make_rhs(orders, [](double t, auto x, const auto& u, auto grad) {
    using T = std::decay_t<decltype(u)>;
    const std::vector<double> a = advection_velocity(t, x.size());
    T f(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) f -= a[i] * grad[i];
    return f;
  });
  p.penalties.push_back(BoundaryPenalty{{std::vector<double>(d, 0.0)}, 1e2, {}});
  const GaussianMixture mix = advection_initial_mixture(d);
  p.initial_condition = mix;
  p.analytic = [mix](double t, std::span<const double> x) {
    const std::vector<double> s = advection_displacement(t, x.size());
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - s[i];
    return mix(y);
  };
  p.initial_sampler = [mix](Stream& rng, std::span<double> out) { mix.sample(rng, out); };
  p.fit_initial_fraction = 1.0;
  return p;
}

// --- Fokker-Planck ------------------------------------------------------------------------

double fp_one_body(double t, double x) {
  return (5.0 * std::cbrt(10.0) / 4.0) * (std::sin(std::numbers::pi * t) + 1.5) - x;
}

double fp_interaction(double x, double y, std::size_t d) {
  return (y - x) / (2.0 * static_cast<double>(d));
}

std::vector<double> fp_initial_mean(std::size_t d) {
  if (d < 2) throw std::invalid_argument("the Fokker-Planck initial mean needs d >= 2");
  std::vector<double> m(d);
  for (std::size_t i = 0; i < d; ++i) {
    m[i] = 2.9 + 21.0 / (10.0 * static_cast<double>(d - 1)) * static_cast<double>(i);
  }
  return m;
}

ProblemDef fokker_planck_problem(std::size_t d) {
  FokkerPlanckOptions o;
  o.d = d;
  return fokker_planck_problem(o);
}

ProblemDef fokker_planck_problem(const FokkerPlanckOptions& options) {
  const std::size_t d = options.d;
  if (d == 0) throw std::invalid_argument("dimension must be positive");
  const std::vector<double> mean = options.initial_mean ? *options.initial_mean : fp_initial_mean(d);
  if (mean.size() != d) throw std::invalid_argument("initial mean has wrong length");
  const double var = options.initial_variance;

  ProblemDef p;
  p.name = "fokker_planck";
  p.domain = DomainBox::cube(d, -3.0, 11.0);
  p.network = NetworkSpec{d, options.hidden_widths, Activation::sigmoid, false,
                          Wrapper::exp_potential_with_boundary_product};
  p.param = std::make_shared<Mlp>(*p.network);

  std::vector<DerivOrder> orders;
  for (std::size_t i = 0; i < d; ++i) {
    orders.push_back({i, 1});
    orders.push_back({i, 2});
  }
  p.rhs = make_rhs(orders, [](double t, auto x, const auto& u, auto derivs) {
    using T = std::decay_t<decltype(u)>;
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);
    // h_i = f_g(t, x_i) + sum_j (x_j - x_i) / (2d); d h_i / d x_i = -1 + (1 - d) / (2d).
    const double dh = -1.0 + (1.0 - nd) / (2.0 * nd);
    T sum_x(0.0);
    for (std::size_t j = 0; j < n; ++j) sum_x += x[j];
    const double drive = (5.0 * std::cbrt(10.0) / 4.0) * (std::sin(std::numbers::pi * t) + 1.5);
    T f(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const T h = (drive - x[i]) + (sum_x - nd * x[i]) * (1.0 / (2.0 * nd));
      f += -dh * u - h * derivs[2 * i] + kFokkerPlanckDiffusion * derivs[2 * i + 1];
    }
    return f;
  });

  const double norm = std::pow(2.0 * std::numbers::pi * var, -0.5 * static_cast<double>(d));
  p.initial_condition = [mean, var, norm](std::span<const double> x) {
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) q += (x[i] - mean[i]) * (x[i] - mean[i]);
    return norm * std::exp(-0.5 * q / var);
  };
  const DomainBox box = p.domain;
  p.initial_sampler = [mean, var, box](Stream& rng, std::span<double> out) {
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = std::clamp(mean[i] + std::sqrt(var) * normal(rng), box.lower[i], box.upper[i]);
    }
  };
  p.fit_initial_fraction = 1.0;
  return p;
}

ProblemDef problem_by_name(const std::string& name, std::size_t d) {
  if (name == "kdv") return kdv_problem();
  if (name == "advection5d") return advection_problem();
  if (name == "fokker_planck") return fokker_planck_problem(d);
  throw std::invalid_argument("unknown problem '" + name + "'");
}

// --- residuals ------------------------------------------------------------------------------

double rhs_at(const ProblemDef& problem, std::span<const double> theta, double t,
              std::span<const double> x) {
  std::vector<double> derivs(problem.rhs.orders.size());
  const double u = problem.param->eval_into(theta, x, problem.rhs.orders, {}, derivs);
  return problem.rhs.eval(t, x, u, derivs);
}

double boundary_residual(const ProblemDef& problem, std::span<const double> theta,
                         std::span<const double> dtheta, double t) {
  if (dtheta.size() != problem.param_count()) throw DimensionError("dtheta length");
  double r = 0.0;
  std::vector<double> g(problem.param_count());
  for (const BoundaryPenalty& pen : problem.penalties) {
    double sum = 0.0;
    for (const auto& xb : pen.points) {
      problem.param->eval_into(theta, xb, {}, g, {});
      double dir = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dir += g[i] * dtheta[i];
      sum += dir - pen.rate(t, xb);
    }
    r += pen.weight * sum;
  }
  return r;
}

double interior_residual(const ProblemDef& problem, std::span<const double> theta,
                         std::span<const double> dtheta, double t, std::span<const double> x) {
  if (dtheta.size() != problem.param_count()) throw DimensionError("dtheta length");
  std::vector<double> g(problem.param_count());
  std::vector<double> derivs(problem.rhs.orders.size());
  const double u = problem.param->eval_into(theta, x, problem.rhs.orders, g, derivs);
  double dir = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) dir += g[i] * dtheta[i];
  return dir - problem.rhs.eval(t, x, u, derivs);
}

double combined_residual(const ProblemDef& problem, std::span<const double> theta,
                         std::span<const double> dtheta, double t, std::span<const double> x) {
  const double r = interior_residual(problem, theta, dtheta, t, x);
  if (problem.penalties.empty()) return r;
  return r + boundary_residual(problem, theta, dtheta, t);
}

double residual_gradient(const ProblemDef& problem, std::span<const double> theta,
                         std::span<const double> dtheta, double t, std::span<const double> x,
                         std::span<double> grad) {
  const std::size_t d = problem.dim();
  if (grad.size() != d) throw DimensionError("gradient buffer size");
  double r = 0.0;
  std::vector<Dual> xs(d);
  for (std::size_t j = 0; j < d; ++j) {
    const AxisJet jet = problem.param->axis_jet(theta, dtheta, x, j, problem.rhs.orders);
    for (std::size_t c = 0; c < d; ++c) xs[c] = c == j ? Dual::variable(x[c]) : Dual(x[c]);
    const Dual f = problem.rhs.eval_dual(t, xs, jet.value, jet.spatial_derivs);
    const Dual res = jet.theta_dir - f;
    grad[j] = res.c[1];
    r = res.c[0];
  }
  return r;
}

}  // namespace ngalerkin
