#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ngalerkin/parallel.hpp"
#include "ngalerkin/problems.hpp"
#include "ngalerkin/rng.hpp"

namespace ngalerkin {

/// m particles in d dimensions, stored row-major, plus the stream that feeds
/// stochastic updates of this ensemble.
struct Ensemble {
  std::size_t dim = 1;
  std::vector<double> coords;
  Stream rng;

  Ensemble() = default;
  Ensemble(std::size_t d, std::vector<double> xs, Stream s = Stream());

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, dim}; }
  std::span<double> point(std::size_t i) { return {coords.data() + i * dim, dim}; }
};

/// Indices of the particles in lexicographic coordinate order (stable).
std::vector<std::size_t> canonical_order(const Ensemble& ensemble);

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, std::size_t index)
      : std::runtime_error(what + " at particle " + std::to_string(index)), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class DegenerateTangentSpace : public std::runtime_error {
 public:
  DegenerateTangentSpace() : std::runtime_error("degenerate tangent space") {}
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// M_hat dtheta = F_hat with M_hat = A^T A and F_hat = A^T b. The factor rows
/// are g(x_i) / sqrt(m) for particles and sqrt(zeta) g(x_b) for penalty points.
struct GalerkinSystem {
  Eigen::MatrixXd M;
  Eigen::VectorXd F;
  RowMatrix rows;
  Eigen::VectorXd rows_rhs;
  /// Leading rows that come from particles; the rest are penalty rows.
  Eigen::Index particle_rows = 0;

  std::size_t param_count() const { return static_cast<std::size_t>(F.size()); }
};

enum class SolveMethod { svd_pinv, tikhonov };

/// What rel_cutoff is relative to: the largest eigenvalue of M_hat, or that
/// of the particle part alone (penalty rows excluded).
enum class CutoffReference { full_system, particle_rows };

struct SolveConfig {
  SolveMethod method = SolveMethod::svd_pinv;
  double rel_cutoff = 1e-6;
  double lambda = 0.0;
  CutoffReference cutoff_reference = CutoffReference::particle_rows;
};

void validate(const SolveConfig& cfg);

struct Solution {
  Eigen::VectorXd dtheta;
  std::size_t rank = 0;
  double sigma_max = 0.0;
  double smallest_kept = 0.0;
};

GalerkinSystem assemble(const ProblemDef& problem, std::span<const double> theta,
                        const Ensemble& ensemble, double t, Exec exec = Exec::parallel);

/// System from explicit tangent rows and right-hand side values with uniform
/// weight 1/m, for callers that already hold g(x_i) and f(x_i).
GalerkinSystem system_from_rows(RowMatrix rows, Eigen::VectorXd rhs);

Solution solve(const GalerkinSystem& system, const SolveConfig& cfg);

/// Delegates to combined_residual.
double residual_at(const ProblemDef& problem, std::span<const double> theta,
                   std::span<const double> dtheta, double t, std::span<const double> x);

/// (1/m) sum_i g(x_i) r(x_i) + sum_b zeta g(x_b) r_b(x_b): the gradient of the
/// penalized least-squares objective whose stationarity the solve enforces.
Eigen::VectorXd tangent_projection(const ProblemDef& problem, std::span<const double> theta,
                                   std::span<const double> dtheta, const Ensemble& ensemble,
                                   double t);

}  // namespace ngalerkin
