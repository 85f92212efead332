#include "ngalerkin/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ngalerkin {

Ensemble::Ensemble(std::size_t d, std::vector<double> xs, Stream s)
    : dim(d), coords(std::move(xs)), rng(s) {
  if (d == 0) throw std::invalid_argument("ensemble dimension must be positive");
  if (coords.size() % d != 0) throw std::invalid_argument("ensemble coordinates not a multiple of d");
}

std::vector<std::size_t> canonical_order(const Ensemble& ensemble) {
  std::vector<std::size_t> order(ensemble.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto pa = ensemble.point(a);
    const auto pb = ensemble.point(b);
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  });
  return order;
}

void validate(const SolveConfig& cfg) {
  if (!(cfg.rel_cutoff > 0.0 && cfg.rel_cutoff < 1.0)) {
    throw std::invalid_argument("rel_cutoff must lie in (0, 1)");
  }
  if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
}

namespace {

std::size_t penalty_point_count(const ProblemDef& problem) {
  std::size_t n = 0;
  for (const BoundaryPenalty& p : problem.penalties) n += p.points.size();
  return n;
}

void finish_from_rows(GalerkinSystem& sys) {
  const Eigen::Index n = sys.rows.cols();
  sys.M = Eigen::MatrixXd::Zero(n, n);
  sys.M.selfadjointView<Eigen::Lower>().rankUpdate(sys.rows.transpose());
  sys.M = sys.M.selfadjointView<Eigen::Lower>();
  sys.F = sys.rows.transpose() * sys.rows_rhs;
}

// Penalty rows sqrt(zeta) g(x_b) with right-hand side sqrt(zeta) g_rate(t, x_b).
void add_penalty_rows(const ProblemDef& problem, std::span<const double> theta, double t,
                      Eigen::Index first_row, GalerkinSystem& sys) {
  Eigen::Index r = first_row;
  const std::size_t n = problem.param_count();
  for (const BoundaryPenalty& pen : problem.penalties) {
    const double s = std::sqrt(pen.weight);
    for (const auto& xb : pen.points) {
      std::span<double> row(sys.rows.row(r).data(), n);
      problem.param->eval_into(theta, xb, {}, row, {});
      sys.rows.row(r) *= s;
      sys.rows_rhs[r] = s * pen.rate(t, xb);
      ++r;
    }
  }
}

GalerkinSystem assemble_parallel(const ProblemDef& problem, std::span<const double> theta,
                                 const Ensemble& ensemble, double t) {
  const std::vector<std::size_t> order = canonical_order(ensemble);
  const std::size_t m = ensemble.size();
  const std::size_t n = problem.param_count();
  const std::size_t n_orders = problem.rhs.orders.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));

  GalerkinSystem sys;
  sys.rows.resize(static_cast<Eigen::Index>(m + penalty_point_count(problem)),
                  static_cast<Eigen::Index>(n));
  sys.rows_rhs.resize(sys.rows.rows());

  std::size_t bad = std::numeric_limits<std::size_t>::max();
  const long long mm = static_cast<long long>(m);
#pragma omp parallel
  {
    std::vector<double> derivs(n_orders);
#pragma omp for schedule(static)
    for (long long r = 0; r < mm; ++r) {
      const std::size_t i = order[static_cast<std::size_t>(r)];
      const auto x = ensemble.point(i);
      std::span<double> row(sys.rows.row(r).data(), n);
      const double u = problem.param->eval_into(theta, x, problem.rhs.orders, row, derivs);
      const double f = problem.rhs.eval(t, x, u, derivs);
      bool finite = std::isfinite(f);
      for (double g : row) finite = finite && std::isfinite(g);
      if (!finite) {
#pragma omp critical(ngalerkin_assemble_bad)
        bad = std::min(bad, i);
      }
      sys.rows.row(r) *= scale;
      sys.rows_rhs[r] = scale * f;
    }
  }
  if (bad != std::numeric_limits<std::size_t>::max()) {
    throw NonFiniteError("non-finite tangent or right-hand side", bad);
  }
  sys.particle_rows = static_cast<Eigen::Index>(m);
  add_penalty_rows(problem, theta, t, static_cast<Eigen::Index>(m), sys);
  finish_from_rows(sys);
  return sys;
}

// Reference: explicit sums of outer products in canonical particle order.
GalerkinSystem assemble_serial(const ProblemDef& problem, std::span<const double> theta,
                               const Ensemble& ensemble, double t) {
  const std::vector<std::size_t> order = canonical_order(ensemble);
  const std::size_t m = ensemble.size();
  const std::size_t n = problem.param_count();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));

  GalerkinSystem sys;
  sys.M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  sys.F = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  sys.rows.resize(static_cast<Eigen::Index>(m + penalty_point_count(problem)),
                  static_cast<Eigen::Index>(n));
  sys.rows_rhs.resize(sys.rows.rows());

  std::vector<double> g(n);
  std::vector<double> derivs(problem.rhs.orders.size());
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = order[r];
    const auto x = ensemble.point(i);
    const double u = problem.param->eval_into(theta, x, problem.rhs.orders, g, derivs);
    const double f = problem.rhs.eval(t, x, u, derivs);
    if (!std::isfinite(f)) throw NonFiniteError("non-finite right-hand side", i);
    for (std::size_t a = 0; a < n; ++a) {
      if (!std::isfinite(g[a])) throw NonFiniteError("non-finite tangent", i);
      for (std::size_t b = 0; b < n; ++b) sys.M(a, b) += g[a] * g[b];
      sys.F[a] += g[a] * f;
      sys.rows(r, a) = scale * g[a];
    }
    sys.rows_rhs[r] = scale * f;
  }
  sys.M /= static_cast<double>(m);
  sys.F /= static_cast<double>(m);

  sys.particle_rows = static_cast<Eigen::Index>(m);
  add_penalty_rows(problem, theta, t, static_cast<Eigen::Index>(m), sys);
  for (Eigen::Index r = static_cast<Eigen::Index>(m); r < sys.rows.rows(); ++r) {
    for (Eigen::Index a = 0; a < sys.rows.cols(); ++a) {
      for (Eigen::Index b = 0; b < sys.rows.cols(); ++b) sys.M(a, b) += sys.rows(r, a) * sys.rows(r, b);
      sys.F[a] += sys.rows(r, a) * sys.rows_rhs[r];
    }
  }
  return sys;
}

}  // namespace

GalerkinSystem assemble(const ProblemDef& problem, std::span<const double> theta,
                        const Ensemble& ensemble, double t, Exec exec) {
  if (ensemble.dim != problem.dim()) throw DimensionError("ensemble dimension does not match problem");
  if (ensemble.size() == 0) throw std::invalid_argument("empty ensemble");
  if (theta.size() != problem.param_count()) throw DimensionError("theta length");
  return exec == Exec::serial ? assemble_serial(problem, theta, ensemble, t)
                              : assemble_parallel(problem, theta, ensemble, t);
}

GalerkinSystem system_from_rows(RowMatrix rows, Eigen::VectorXd rhs) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows.rows()));
  GalerkinSystem sys;
  sys.rows = std::move(rows) * scale;
  sys.rows_rhs = std::move(rhs) * scale;
  sys.particle_rows = sys.rows.rows();
  finish_from_rows(sys);
  return sys;
}

Solution solve(const GalerkinSystem& system, const SolveConfig& cfg) {
  validate(cfg);
  const Eigen::Index n = system.M.rows();
  Solution sol;
  if (cfg.method == SolveMethod::tikhonov) {
    const Eigen::MatrixXd A = system.M + cfg.lambda * Eigen::MatrixXd::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
    sol.sigma_max = eig.eigenvalues().cwiseAbs().maxCoeff();
    sol.smallest_kept = eig.eigenvalues().cwiseAbs().minCoeff();
    if (!(sol.smallest_kept > 0.0)) throw DegenerateTangentSpace();
    sol.dtheta = A.ldlt().solve(system.F);
    sol.rank = static_cast<std::size_t>(n);
    return sol;
  }

  const bool gram = system.rows.rows() > 0 && system.rows.rows() < n;
  Eigen::VectorXd lambda;
  Eigen::MatrixXd vectors;
  if (gram) {
    // Nonzero spectrum of A^T A equals that of A A^T.
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(system.rows.rows(), system.rows.rows());
    K.selfadjointView<Eigen::Lower>().rankUpdate(system.rows);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    lambda = eig.eigenvalues();
    vectors = eig.eigenvectors();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(system.M);
    lambda = eig.eigenvalues();
    vectors = eig.eigenvectors();
  }
  if (!lambda.allFinite()) throw DegenerateTangentSpace();
  sol.sigma_max = lambda.cwiseAbs().maxCoeff();
  if (!(sol.sigma_max > 0.0)) throw DegenerateTangentSpace();
  double reference = sol.sigma_max;
  const Eigen::Index mp = system.particle_rows;
  if (cfg.cutoff_reference == CutoffReference::particle_rows && mp > 0 && mp < system.rows.rows()) {
    const auto part = system.rows.topRows(mp);
    const Eigen::MatrixXd G = mp < n ? Eigen::MatrixXd(part * part.transpose())
                                     : Eigen::MatrixXd(part.transpose() * part);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
    reference = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(reference > 0.0)) reference = sol.sigma_max;
  }
  const double cutoff = cfg.rel_cutoff * reference;

  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(lambda.size());
  const Eigen::VectorXd proj = gram ? Eigen::VectorXd(vectors.transpose() * system.rows_rhs)
                                    : Eigen::VectorXd(vectors.transpose() * system.F);
  sol.smallest_kept = sol.sigma_max;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (std::abs(lambda[k]) < cutoff) continue;
    coeff[k] = proj[k] / lambda[k];
    ++sol.rank;
    sol.smallest_kept = std::min(sol.smallest_kept, std::abs(lambda[k]));
  }
  if (sol.rank == 0) throw DegenerateTangentSpace();
  if (gram) {
    sol.dtheta = system.rows.transpose() * (vectors * coeff);
  } else {
    sol.dtheta = vectors * coeff;
  }
  return sol;
}

double residual_at(const ProblemDef& problem, std::span<const double> theta,
                   std::span<const double> dtheta, double t, std::span<const double> x) {
  return combined_residual(problem, theta, dtheta, t, x);
}

Eigen::VectorXd tangent_projection(const ProblemDef& problem, std::span<const double> theta,
                                   std::span<const double> dtheta, const Ensemble& ensemble,
                                   double t) {
  const std::size_t n = problem.param_count();
  const std::size_t m = ensemble.size();
  Eigen::VectorXd proj = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<double> g(n);
  std::vector<double> derivs(problem.rhs.orders.size());
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = ensemble.point(i);
    const double u = problem.param->eval_into(theta, x, problem.rhs.orders, g, derivs);
    double dir = 0.0;
    for (std::size_t a = 0; a < n; ++a) dir += g[a] * dtheta[a];
    const double r = dir - problem.rhs.eval(t, x, u, derivs);
    for (std::size_t a = 0; a < n; ++a) proj[static_cast<Eigen::Index>(a)] += g[a] * r;
  }
  proj /= static_cast<double>(m);
  for (const BoundaryPenalty& pen : problem.penalties) {
    for (const auto& xb : pen.points) {
      problem.param->eval_into(theta, xb, {}, g, {});
      double dir = 0.0;
      for (std::size_t a = 0; a < n; ++a) dir += g[a] * dtheta[a];
      const double r = dir - pen.rate(t, xb);
      for (std::size_t a = 0; a < n; ++a) proj[static_cast<Eigen::Index>(a)] += pen.weight * g[a] * r;
    }
  }
  return proj;
}

}  // namespace ngalerkin
