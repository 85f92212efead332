#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngalerkin/galerkin.hpp"
#include "ngalerkin/parallel.hpp"
#include "ngalerkin/problems.hpp"
#include "ngalerkin/samplers.hpp"

namespace ngalerkin {

enum class Scheme { rk4, forward_euler };

struct StepperConfig {
  Scheme scheme = Scheme::rk4;
  double dt = 1e-3;
  std::size_t n_steps = 0;
  SolveConfig solve;
};

void validate(const StepperConfig& cfg);

/// K with K * dt == final_time to 1e-12; throws otherwise.
std::size_t steps_for_final_time(double final_time, double dt);

struct FitConfig {
  std::size_t n_fit_samples = 1000;
  std::size_t max_iters = 200;
  /// Initial Levenberg-Marquardt damping.
  double step_size = 1e-3;
  /// Bound on the mean squared misfit.
  double tolerance = 1e-4;
  std::size_t restarts = 2;
  /// Ridge weight alpha on ||theta||^2 added to the misfit objective.
  double weight_decay = 0.0;
};

void validate(const FitConfig& cfg);

class FitError : public std::runtime_error {
 public:
  explicit FitError(double misfit);
  double misfit() const { return misfit_; }

 private:
  double misfit_;
};

struct FitResult {
  std::vector<double> theta;
  double misfit = 0.0;
  std::size_t iterations = 0;
};

/// Fits u(.; theta0) to the initial condition by damped Gauss-Newton on the
/// mean squared misfit over n_fit_samples points.
FitResult fit_initial(const ProblemDef& problem, const FitConfig& cfg, std::uint64_t seed,
                      std::optional<std::vector<double>> start = std::nullopt);

/// Least-squares fit of theta to target values at given points.
FitResult fit_to_samples(const Parametrization& param, std::span<const double> points,
                         std::span<const double> targets, std::vector<double> start,
                         const FitConfig& cfg);

/// Forward-Euler increment on the previous ensemble.
std::vector<double> predictor(const ProblemDef& problem, std::span<const double> theta,
                              const Ensemble& previous, double t, const SolveConfig& cfg,
                              Exec exec = Exec::parallel);

struct StepResult {
  std::vector<double> dtheta;
  /// Diagnostics of the first stage solve.
  Solution first_stage;
  /// sqrt of the ensemble mean of r^2 at (theta_k, t_k) with the final increment.
  double residual_rms = 0.0;
};

/// Classical RK4 over a frozen ensemble (forward Euler when scheme says so).
StepResult rk4_step(const ProblemDef& problem, std::span<const double> theta, const Ensemble& ensemble,
                    double t, double dt, const SolveConfig& cfg, Scheme scheme = Scheme::rk4,
                    Exec exec = Exec::parallel);

struct StepDiagnostics {
  std::size_t rank = 0;
  double sigma_max = 0.0;
  double smallest_kept = 0.0;
  double residual_rms = 0.0;
  double mean_displacement = 0.0;
};

/// Passed to observers after step k (k = 0 is the initial state).
struct StepRecord {
  std::size_t k;
  double t;
  std::span<const double> theta;
  const Ensemble& ensemble;
  std::span<const double> dtheta;
  StepDiagnostics diagnostics;
};

using Observer = std::function<void(const StepRecord&)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> thetas;
  Ensemble final_ensemble;
  /// Set when a step failed; the trajectory holds the steps before it.
  std::optional<std::string> error;
};

Trajectory integrate(const ProblemDef& problem, const StepperConfig& stepper, const SamplerConfig& sampler,
                     std::vector<double> theta0, Ensemble ensemble0,
                     const std::vector<Observer>& observers = {}, Exec exec = Exec::parallel);

struct RunSeeds {
  std::uint64_t fit;
  std::uint64_t ensemble_init;
  std::uint64_t sampler;
};

RunSeeds derive_seeds(std::uint64_t root);

Trajectory run(const ProblemDef& problem, const StepperConfig& stepper, const SamplerConfig& sampler,
               const FitConfig& fit, std::size_t m, std::uint64_t seed,
               const std::vector<Observer>& observers = {}, Exec exec = Exec::parallel);

}  // namespace ngalerkin
