#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ngalerkin/galerkin.hpp"
#include "ngalerkin/parallel.hpp"
#include "ngalerkin/problems.hpp"

namespace ngalerkin {

enum class SamplerKind { svgd, langevin, static_uniform };
enum class TargetKind { residual_squared, solution_magnitude };
enum class BoundaryPolicy { clamp, reflect };

enum class KernelConvention {
  gaussian,     // exp(-|x - y|^2 / (2 h^2))
  scaled_by_h,  // exp(-|x - y|^2 / h)
};

enum class GradientMode { exact, finite_difference };

struct SamplerConfig {
  SamplerKind kind = SamplerKind::svgd;
  TargetKind target = TargetKind::residual_squared;
  double gamma = 0.25;
  double bandwidth = 0.05;
  double step_size = 0.05;
  std::size_t n_substeps = 500;
  double smoothing = 1e-12;
  BoundaryPolicy boundary = BoundaryPolicy::clamp;
  KernelConvention kernel = KernelConvention::gaussian;
  GradientMode gradient = GradientMode::exact;
  /// Central-difference step for GradientMode::finite_difference, relative to the box width.
  double fd_relative_step = 1e-5;
};

void validate(const SamplerConfig& cfg);

/// Value and gradient of a potential term; writes grad_x into `grad`.
using PotentialFn = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Everything the Gibbs potential V_{theta, dtheta} depends on.
class PotentialContext {
 public:
  PotentialContext(const ProblemDef& problem, std::vector<double> theta, std::vector<double> dtheta,
                   double t, SamplerConfig cfg);
  /// Fixed potential V over a box, for sampler checks against known targets.
  PotentialContext(DomainBox box, PotentialFn potential, SamplerConfig cfg);

  bool has_problem() const { return problem_ != nullptr; }
  const ProblemDef& problem() const { return *problem_; }
  const DomainBox& domain() const { return box_; }
  std::size_t dim() const { return box_.dim(); }
  std::span<const double> theta() const { return theta_; }
  std::span<const double> dtheta() const { return dtheta_; }
  double time() const { return t_; }
  const SamplerConfig& config() const { return cfg_; }
  /// x-independent penalty part of the combined residual.
  double boundary_term() const { return boundary_term_; }
  const PotentialFn& custom() const { return custom_; }

  /// log nu for a non-uniform reference measure; adds -gamma log nu to V.
  void set_reference_log_density(PotentialFn log_nu) { log_nu_ = std::move(log_nu); }
  const PotentialFn& reference_log_density() const { return log_nu_; }

 private:
  const ProblemDef* problem_ = nullptr;
  DomainBox box_;
  std::vector<double> theta_;
  std::vector<double> dtheta_;
  double t_ = 0.0;
  SamplerConfig cfg_;
  double boundary_term_ = 0.0;
  PotentialFn custom_;
  PotentialFn log_nu_;
};

double potential(const PotentialContext& ctx, std::span<const double> x);

/// Writes grad_x V into `grad`; returns V.
double grad_potential(const PotentialContext& ctx, std::span<const double> x, std::span<double> grad);

struct KernelValue {
  double value;
  std::vector<double> grad1;  // gradient in the first argument
};

KernelValue gaussian_kernel(std::span<const double> x, std::span<const double> y, double h,
                            KernelConvention convention = KernelConvention::gaussian);

void apply_boundary(const DomainBox& box, BoundaryPolicy policy, std::span<double> x);

/// One synchronous explicit-Euler SVGD step.
Ensemble svgd_substep(const Ensemble& ensemble, const PotentialContext& ctx,
                      Exec exec = Exec::parallel);

/// One Euler-Maruyama step of overdamped Langevin dynamics. Noise for
/// particle i comes from stream i of the ensemble's current substep stream.
Ensemble langevin_substep(const Ensemble& ensemble, const PotentialContext& ctx,
                          Exec exec = Exec::parallel);

/// m fresh uniform draws over the box (advances the ensemble stream).
Ensemble uniform_ensemble(const DomainBox& box, std::size_t m, Stream rng);

struct EnsembleUpdate {
  Ensemble ensemble;
  double mean_displacement = 0.0;
};

EnsembleUpdate update_ensemble(const Ensemble& previous, const PotentialContext& ctx,
                               Exec exec = Exec::parallel);

class DegenerateEnvelope : public std::runtime_error {
 public:
  explicit DegenerateEnvelope(double rate);
  double acceptance_rate() const { return rate_; }

 private:
  double rate_;
};

/// Draws proportional to |u0|: closed-form sampler when the problem has one,
/// otherwise rejection sampling against a dense-scan envelope.
Ensemble sample_initial_ensemble(const ProblemDef& problem, std::size_t m, std::uint64_t seed);

/// Rejection sampling of |density| over a box.
Ensemble rejection_sample(const DomainBox& box, const std::function<double(std::span<const double>)>& density,
                          std::size_t m, Stream rng);

}  // namespace ngalerkin
