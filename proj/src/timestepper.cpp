#include "ngalerkin/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ngalerkin {

void validate(const StepperConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw std::invalid_argument("dt must be positive");
  validate(cfg.solve);
}

std::size_t steps_for_final_time(double final_time, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(final_time >= 0.0)) throw std::invalid_argument("final time must be nonnegative");
  const double k = std::round(final_time / dt);
  if (std::abs(k * dt - final_time) > 1e-12) {
    throw std::invalid_argument("final time is not a multiple of dt");
  }
  return static_cast<std::size_t>(k);
}

void validate(const FitConfig& cfg) {
  if (cfg.n_fit_samples == 0) throw std::invalid_argument("n_fit_samples must be positive");
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("fit tolerance must be positive");
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("fit step_size must be positive");
}

FitError::FitError(double misfit)
    : std::runtime_error("initial fit misfit " + std::to_string(misfit) + " above tolerance"), misfit_(misfit) {}

namespace {

double misfit_of(const Parametrization& param, std::span<const double> theta, std::span<const double> points,
                 std::span<const double> targets, Eigen::VectorXd& e) {
  const std::size_t d = param.input_dim();
  const auto n = static_cast<std::ptrdiff_t>(targets.size());
  e.resize(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    e[i] = param.eval(theta, points.subspan(k * d, d)) - targets[k];
  }
  return e.squaredNorm() / static_cast<double>(n);
}

void jacobian(const Parametrization& param, std::span<const double> theta, std::span<const double> points,
              RowMatrix& J) {
  const std::size_t d = param.input_dim();
  const std::size_t p = param.param_count();
  const auto n = static_cast<std::ptrdiff_t>(J.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    param.eval_into(theta, points.subspan(k * d, d), {}, {J.row(i).data(), p}, {});
  }
}

}  // namespace

FitResult fit_to_samples(const Parametrization& param, std::span<const double> points,
                         std::span<const double> targets, std::vector<double> start, const FitConfig& cfg) {
  validate(cfg);
  const std::size_t p = param.param_count();
  if (start.size() != p) throw DimensionError("initial theta length");
  if (points.size() != targets.size() * param.input_dim()) throw DimensionError("fit samples");
  const auto n = static_cast<double>(targets.size());

  FitResult res;
  res.theta = std::move(start);
  Eigen::VectorXd e;
  res.misfit = misfit_of(param, res.theta, points, targets, e);
  const double alpha = cfg.weight_decay;
  auto objective = [alpha](double misfit, std::span<const double> th) {
    double sq = 0.0;
    for (double v : th) sq += v * v;
    return misfit + alpha * sq;
  };
  double obj = objective(res.misfit, res.theta);

  RowMatrix J(static_cast<Eigen::Index>(targets.size()), static_cast<Eigen::Index>(p));
  Eigen::MatrixXd H(p, p);
  double lambda = cfg.step_size;
  std::vector<double> trial(p);
  Eigen::VectorXd e_trial;
  while (res.iterations < cfg.max_iters && res.misfit > 0.0) {
    jacobian(param, res.theta, points, J);
    H.setZero();
    H.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose(), 1.0 / n);
    H = H.selfadjointView<Eigen::Lower>();
    Eigen::VectorXd grad = J.transpose() * e / n;
    if (alpha > 0.0) {
      for (std::size_t j = 0; j < p; ++j) grad[static_cast<Eigen::Index>(j)] += alpha * res.theta[j];
      H.diagonal().array() += alpha;
    }
    const Eigen::VectorXd diag = H.diagonal();
    const double floor = 1e-10 * std::max(diag.maxCoeff(), 1e-300);

    bool accepted = false;
    double improvement = 0.0;
    while (!accepted && lambda < 1e12) {
      Eigen::MatrixXd A = H;
      for (Eigen::Index j = 0; j < A.rows(); ++j) A(j, j) += lambda * (diag[j] + floor);
      const Eigen::VectorXd step = A.ldlt().solve(-grad);
      for (std::size_t j = 0; j < p; ++j) trial[j] = res.theta[j] + step[static_cast<Eigen::Index>(j)];
      const double m_trial = misfit_of(param, trial, points, targets, e_trial);
      const double o_trial = objective(m_trial, trial);
      if (std::isfinite(o_trial) && o_trial < obj) {
        improvement = (obj - o_trial) / obj;
        res.theta = trial;
        res.misfit = m_trial;
        obj = o_trial;
        std::swap(e, e_trial);
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
      } else {
        lambda *= 4.0;
      }
    }
    ++res.iterations;
    if (!accepted || improvement < 1e-12) break;
  }
  return res;
}

FitResult fit_initial(const ProblemDef& problem, const FitConfig& cfg, std::uint64_t seed,
                      std::optional<std::vector<double>> start) {
  validate(cfg);
  if (!problem.initial_condition) throw std::invalid_argument("problem has no initial condition");
  const Stream root(seed);
  const std::size_t d = problem.dim();
  const std::size_t n = cfg.n_fit_samples;
  const auto n_initial = problem.initial_sampler
                             ? static_cast<std::size_t>(std::llround(problem.fit_initial_fraction * n))
                             : std::size_t{0};
  std::vector<double> points(n * d);
  std::vector<double> targets(n);
  const Stream draws = root.split("points");
  for (std::size_t i = 0; i < n; ++i) {
    Stream s = draws.split(i);
    std::span<double> x(points.data() + i * d, d);
    if (i < n_initial) {
      problem.initial_sampler(s, x);
      apply_boundary(problem.domain, BoundaryPolicy::clamp, x);
    } else {
      for (std::size_t j = 0; j < d; ++j) {
        std::uniform_real_distribution<double> u(problem.domain.lower[j], problem.domain.upper[j]);
        x[j] = u(s);
      }
    }
    targets[i] = problem.initial_condition(x);
  }

  // For u = B exp(net) the log-domain problem net = log(u0 / B) is smooth; fit it first.
  const bool log_warm = problem.network && problem.network->wrapper == Wrapper::exp_potential_with_boundary_product;
  std::vector<double> log_points, log_targets;
  if (log_warm) {
    // tails far below the peak are floored so they do not dominate the log misfit
    const double peak = *std::max_element(targets.begin(), targets.end());
    const double floor_log = std::log(std::max(peak, 1e-300)) - 20.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> x(points.data() + i * d, d);
      const double b = boundary_product(x);
      if (b > 0.0) {
        log_points.insert(log_points.end(), x.begin(), x.end());
        log_targets.push_back(std::max(targets[i] > 0.0 ? std::log(targets[i]) : floor_log, floor_log) - std::log(b));
      }
    }
  }
  auto initial_guess = [&](std::size_t attempt) {
    if (attempt == 0 && start) return *start;
    if (!problem.network) return std::vector<double>(problem.param_count(), 0.0);
    std::vector<double> th = init_parameters(*problem.network, root.split(attempt).key());
    if (log_warm && !log_targets.empty()) {
      NetworkSpec inner = *problem.network;
      inner.wrapper = Wrapper::none;
      FitConfig lc = cfg;
      lc.tolerance = 1e-6;
      th = fit_to_samples(Mlp(inner), log_points, log_targets, std::move(th), lc).theta;
    }
    return th;
  };

  FitResult best;
  best.misfit = std::numeric_limits<double>::infinity();
  const std::size_t attempts = problem.network ? cfg.restarts + 1 : 1;
  for (std::size_t a = 0; a < attempts; ++a) {
    FitResult r = fit_to_samples(*problem.param, points, targets, initial_guess(a), cfg);
    if (r.misfit < best.misfit) best = std::move(r);
    if (best.misfit <= cfg.tolerance) return best;
  }
  throw FitError(best.misfit);
}

namespace {

Solution stage_solve(const ProblemDef& problem, std::span<const double> theta, const Ensemble& ensemble,
                     double t, const SolveConfig& cfg, Exec exec, GalerkinSystem* keep = nullptr) {
  GalerkinSystem sys = assemble(problem, theta, ensemble, t, exec);
  Solution sol = solve(sys, cfg);
  if (keep) *keep = std::move(sys);
  return sol;
}

std::vector<double> shifted(std::span<const double> theta, double h, const Eigen::VectorXd& k) {
  std::vector<double> out(theta.begin(), theta.end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += h * k[static_cast<Eigen::Index>(j)];
  return out;
}

}  // namespace

std::vector<double> predictor(const ProblemDef& problem, std::span<const double> theta, const Ensemble& previous,
                              double t, const SolveConfig& cfg, Exec exec) {
  const Solution s = stage_solve(problem, theta, previous, t, cfg, exec);
  return std::vector<double>(s.dtheta.data(), s.dtheta.data() + s.dtheta.size());
}

StepResult rk4_step(const ProblemDef& problem, std::span<const double> theta, const Ensemble& ensemble, double t,
                    double dt, const SolveConfig& cfg, Scheme scheme, Exec exec) {
  StepResult out;
  GalerkinSystem first;
  out.first_stage = stage_solve(problem, theta, ensemble, t, cfg, exec, &first);
  Eigen::VectorXd total = out.first_stage.dtheta;
  if (scheme == Scheme::rk4) {
    const Eigen::VectorXd k1 = out.first_stage.dtheta;
    const Eigen::VectorXd k2 = stage_solve(problem, shifted(theta, dt / 2, k1), ensemble, t + dt / 2, cfg, exec).dtheta;
    const Eigen::VectorXd k3 = stage_solve(problem, shifted(theta, dt / 2, k2), ensemble, t + dt / 2, cfg, exec).dtheta;
    const Eigen::VectorXd k4 = stage_solve(problem, shifted(theta, dt, k3), ensemble, t + dt, cfg, exec).dtheta;
    total = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
  }
  const Eigen::Index m = static_cast<Eigen::Index>(ensemble.size());
  const Eigen::VectorXd r = first.rows.topRows(m) * total - first.rows_rhs.head(m);
  out.residual_rms = r.norm();
  out.dtheta.assign(total.data(), total.data() + total.size());
  return out;
}

Trajectory integrate(const ProblemDef& problem, const StepperConfig& stepper, const SamplerConfig& sampler,
                     std::vector<double> theta0, Ensemble ensemble0, const std::vector<Observer>& observers,
                     Exec exec) {
  validate(stepper);
  validate(sampler);
  if (theta0.size() != problem.param_count()) throw DimensionError("theta0 length");
  if (ensemble0.dim != problem.dim()) throw DimensionError("ensemble dimension");

  Trajectory traj;
  std::vector<double> theta = std::move(theta0);
  Ensemble ensemble = std::move(ensemble0);
  traj.times.push_back(0.0);
  traj.thetas.push_back(theta);
  const std::vector<double> zero(theta.size(), 0.0);
  for (const Observer& obs : observers) obs(StepRecord{0, 0.0, theta, ensemble, zero, {}});

  for (std::size_t k = 1; k <= stepper.n_steps; ++k) {
    const double t = static_cast<double>(k - 1) * stepper.dt;
    try {
      StepDiagnostics diag;
      EnsembleUpdate upd;
      if (sampler.kind == SamplerKind::static_uniform) {
        upd.ensemble = uniform_ensemble(problem.domain, ensemble.size(), ensemble.rng);
      } else {
        std::vector<double> dp = predictor(problem, theta, ensemble, t, stepper.solve, exec);
        const PotentialContext ctx(problem, theta, std::move(dp), t, sampler);
        upd = update_ensemble(ensemble, ctx, exec);
      }
      diag.mean_displacement = upd.mean_displacement;
      const StepResult step = rk4_step(problem, theta, upd.ensemble, t, stepper.dt, stepper.solve,
                                       stepper.scheme, exec);
      for (std::size_t j = 0; j < theta.size(); ++j) theta[j] += stepper.dt * step.dtheta[j];
      for (double v : theta) {
        if (!std::isfinite(v)) throw std::runtime_error("non-finite parameters");
      }
      ensemble = std::move(upd.ensemble);
      diag.rank = step.first_stage.rank;
      diag.sigma_max = step.first_stage.sigma_max;
      diag.smallest_kept = step.first_stage.smallest_kept;
      diag.residual_rms = step.residual_rms;
      const double tk = static_cast<double>(k) * stepper.dt;
      traj.times.push_back(tk);
      traj.thetas.push_back(theta);
      for (const Observer& obs : observers) obs(StepRecord{k, tk, theta, ensemble, step.dtheta, diag});
    } catch (const std::exception& ex) {
      traj.error = "step " + std::to_string(k) + ": " + ex.what();
      break;
    }
  }
  traj.final_ensemble = std::move(ensemble);
  return traj;
}

RunSeeds derive_seeds(std::uint64_t root) {
  const Stream s(root);
  return {s.split("fit").key(), s.split("ensemble-init").key(), s.split("sampler").key()};
}

Trajectory run(const ProblemDef& problem, const StepperConfig& stepper, const SamplerConfig& sampler,
               const FitConfig& fit, std::size_t m, std::uint64_t seed, const std::vector<Observer>& observers,
               Exec exec) {
  const RunSeeds seeds = derive_seeds(seed);
  FitResult theta0 = fit_initial(problem, fit, seeds.fit);
  Ensemble ens = sample_initial_ensemble(problem, m, seeds.ensemble_init);
  ens.rng = Stream(seeds.sampler);
  return integrate(problem, stepper, sampler, std::move(theta0.theta), std::move(ens), observers, exec);
}

}  // namespace ngalerkin
