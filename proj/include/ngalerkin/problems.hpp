#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ngalerkin/netparam.hpp"
#include "ngalerkin/rng.hpp"

namespace ngalerkin {

struct DomainBox {
  std::vector<double> lower;
  std::vector<double> upper;

  DomainBox() = default;
  DomainBox(std::vector<double> lo, std::vector<double> hi);
  static DomainBox cube(std::size_t d, double lo, double hi);

  std::size_t dim() const { return lower.size(); }
  double volume() const;
  bool contains(std::span<const double> x) const;
};

/// Right-hand side f(t, x, u, derivs) of du/dt = f. `derivs` is aligned with
/// `orders`. The Dual instantiation propagates one spatial direction so that
/// residual gradients can be taken exactly.
template <class T>
using RhsFn = std::function<T(double t, std::span<const T> x, const T& u, std::span<const T> derivs)>;

struct Rhs {
  std::vector<DerivOrder> orders;
  RhsFn<double> eval;
  RhsFn<Dual> eval_dual;
};

/// Builds both instantiations from one generic callable.
template <class F>
Rhs make_rhs(std::vector<DerivOrder> orders, F f) {
  return Rhs{std::move(orders), RhsFn<double>(f), RhsFn<Dual>(f)};
}

struct BoundaryPenalty {
  std::vector<std::vector<double>> points;
  double weight = 1.0;
  /// g(t, x); empty means g == 0.
  std::function<double(double, std::span<const double>)> target_rate;

  double rate(double t, std::span<const double> x) const {
    return target_rate ? target_rate(t, x) : 0.0;
  }
};

struct ProblemDef {
  std::string name;
  DomainBox domain;
  std::optional<NetworkSpec> network;
  std::shared_ptr<const Parametrization> param;
  Rhs rhs;
  std::vector<BoundaryPenalty> penalties;
  std::function<double(std::span<const double>)> initial_condition;
  /// Exact solution u(t, x) when known.
  std::function<double(double, std::span<const double>)> analytic;
  /// Draws from the density proportional to |u0| when the problem knows it in closed form.
  std::function<void(Stream&, std::span<double>)> initial_sampler;
  /// Fraction of initial-fit samples drawn from initial_sampler (rest uniform).
  double fit_initial_fraction = 0.0;

  std::size_t dim() const { return domain.dim(); }
  std::size_t param_count() const { return param->param_count(); }
};

// --- Korteweg-de Vries ------------------------------------------------------

struct TwoSoliton {
  double kappa1 = 1.0;
  double kappa2 = 0.70710678118654752440;
  double x1 = -5.0;
  double x2 = 5.0;

  double operator()(double t, double x) const;
};

ProblemDef kdv_problem();

// --- Advection in five dimensions --------------------------------------------

std::vector<double> advection_velocity(double t, std::size_t d);
std::vector<double> advection_displacement(double t, std::size_t d);

struct GaussianMixture {
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> variances;  // diagonal covariances

  /// Sum of unnormalized Gaussian waves exp(-q_k / 2).
  double operator()(std::span<const double> x) const;
  void sample(Stream& rng, std::span<double> out) const;
};

GaussianMixture advection_initial_mixture(std::size_t d);
ProblemDef advection_problem();

// --- Fokker-Planck for interacting particles -----------------------------------

constexpr double kFokkerPlanckDiffusion = 0.5;

double fp_one_body(double t, double x);
double fp_interaction(double x, double y, std::size_t d);
std::vector<double> fp_initial_mean(std::size_t d);

struct FokkerPlanckOptions {
  std::size_t d = 8;
  /// Overrides the initial mean; required for d = 1.
  std::optional<std::vector<double>> initial_mean;
  double initial_variance = 0.1;
  std::vector<std::size_t> hidden_widths{30, 30};
};

ProblemDef fokker_planck_problem(std::size_t d);
ProblemDef fokker_planck_problem(const FokkerPlanckOptions& options);

/// "kdv", "advection5d" or "fokker_planck" (d used by the latter only).
ProblemDef problem_by_name(const std::string& name, std::size_t d = 8);

// --- residuals ---------------------------------------------------------------------

/// f(x, u(theta)) at time t.
double rhs_at(const ProblemDef& problem, std::span<const double> theta, double t,
              std::span<const double> x);

/// zeta * sum_b (grad_theta u(x_b) . dtheta - g(t, x_b)); independent of x.
double boundary_residual(const ProblemDef& problem, std::span<const double> theta,
                         std::span<const double> dtheta, double t);

/// grad_theta u . dtheta - f at x.
double interior_residual(const ProblemDef& problem, std::span<const double> theta,
                         std::span<const double> dtheta, double t, std::span<const double> x);

/// Interior plus penalty residual.
double combined_residual(const ProblemDef& problem, std::span<const double> theta,
                         std::span<const double> dtheta, double t, std::span<const double> x);

/// Exact spatial gradient of the residual at x (the penalty part is x-free);
/// returns the interior residual value.
double residual_gradient(const ProblemDef& problem, std::span<const double> theta,
                         std::span<const double> dtheta, double t, std::span<const double> x,
                         std::span<double> grad);

}  // namespace ngalerkin
