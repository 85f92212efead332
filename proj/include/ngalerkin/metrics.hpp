#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ngalerkin/parallel.hpp"
#include "ngalerkin/problems.hpp"

namespace ngalerkin {

using ScalarField = std::function<double(std::span<const double>)>;

struct Quadrature {
  enum class Kind { grid, mc };
  Kind kind = Kind::grid;
  /// Grid: nodes per axis. MC: number of draws.
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  static Quadrature grid(std::size_t n) { return {Kind::grid, n, 0}; }
  static Quadrature mc(std::size_t n, std::uint64_t seed) { return {Kind::mc, n, seed}; }
};

class MissingAnalytic : public std::invalid_argument {
 public:
  MissingAnalytic() : std::invalid_argument("problem has no analytic solution") {}
};

/// ||approx - exact|| / ||exact|| under a tensor trapezoid grid or uniform MC.
double relative_l2(const ScalarField& approx, const ScalarField& exact, const DomainBox& box,
                   const Quadrature& quad);
double relative_l2(const ProblemDef& problem, std::span<const double> theta, double t, const Quadrature& quad);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Integral of f over every coordinate but `axis`, with x_axis = x.
McEstimate marginal(const ScalarField& f, const DomainBox& box, std::size_t axis, double x, std::size_t n,
                    std::uint64_t seed);
McEstimate marginal(const ProblemDef& problem, std::span<const double> theta, std::size_t axis, double x,
                    std::size_t n, std::uint64_t seed);

struct GaussianBias {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

struct MomentEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double ess = 0.0;
  Eigen::VectorXd mean_std_error;
};

class ZeroWeights : public std::runtime_error {
 public:
  ZeroWeights() : std::runtime_error("all importance weights are zero") {}
};

/// Self-normalized importance sampling of the density proportional to the
/// positive part of f.
MomentEstimate snis_moments(const ScalarField& f, const GaussianBias& bias, std::size_t n, std::uint64_t seed);
MomentEstimate snis_moments(const ProblemDef& problem, std::span<const double> theta, const GaussianBias& bias,
                            std::size_t n, std::uint64_t seed);

struct EntropyEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double normalizer = 0.0;
  double ess = 0.0;
};

EntropyEstimate snis_entropy(const ScalarField& f, const GaussianBias& bias, std::size_t n, std::uint64_t seed);
EntropyEstimate snis_entropy(const ProblemDef& problem, std::span<const double> theta, const GaussianBias& bias,
                             std::size_t n, std::uint64_t seed);

/// dX_i = (f_g(t, X_i) + sum_j f_K(X_i, X_j)) dt + sqrt(2 D) dW_i.
struct SdeModel {
  std::size_t d = 1;
  double diffusion = 0.5;
  std::function<double(double t, double x)> one_body;
  std::function<double(double x, double y)> interaction;
  std::vector<double> initial_mean;
  double initial_variance = 0.0;
};

SdeModel fokker_planck_sde(std::size_t d);
SdeModel fokker_planck_sde(std::size_t d, std::vector<double> initial_mean, double initial_variance);

struct PathBundle {
  std::size_t n_paths = 0;
  std::size_t d = 0;
  std::vector<double> times;
  /// states[k] holds n_paths x d positions (row-major) at times[k].
  std::vector<std::vector<double>> states;
  std::uint64_t seed = 0;

  std::size_t time_index(double t) const;
};

PathBundle euler_maruyama(const SdeModel& model, std::size_t n_paths, double dt, const std::vector<double>& t_grid,
                          std::uint64_t seed, Exec exec = Exec::parallel);

MomentEstimate mc_moments(const PathBundle& bundle, double t);
MomentEstimate sample_moments(std::span<const double> xs, std::size_t d);

struct KdeBandwidth {
  enum class Rule { silverman, fixed };
  Rule rule = Rule::silverman;
  double h = 0.0;

  static KdeBandwidth silverman() { return {}; }
  static KdeBandwidth fixed(double h) { return {Rule::fixed, h}; }
};

/// Resubstitution entropy -(1/n) sum_j log p_KDE(x_j) with a Gaussian product kernel.
double kde_entropy(std::span<const double> xs, std::size_t d, KdeBandwidth bw, Exec exec = Exec::parallel);
double kde_entropy(const PathBundle& bundle, double t, KdeBandwidth bw, Exec exec = Exec::parallel);

struct Spread {
  double min = 0.0;
  double max = 0.0;
  double avg = 0.0;
};

struct MomentErrors {
  Eigen::VectorXd mean_rel;
  Eigen::MatrixXd cov_rel;
  Eigen::VectorXd cov_diag_rel;
  /// Entries whose benchmark value is zero carry absolute errors.
  std::vector<bool> mean_absolute;
  std::vector<bool> cov_absolute;
  Spread mean;
  Spread cov;
  Spread cov_diag;
};

MomentErrors relative_moment_errors(const MomentEstimate& estimate, const MomentEstimate& benchmark);

}  // namespace ngalerkin
