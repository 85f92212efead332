#include "ngalerkin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "ngalerkin/rng.hpp"

namespace ngalerkin {

namespace {

// Tensor-grid node k along an axis with n nodes, and its trapezoid weight.
double grid_node(const DomainBox& box, std::size_t axis, std::size_t k, std::size_t n) {
  const double lo = box.lower[axis];
  const double hi = box.upper[axis];
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
}

double trapezoid_weight(std::size_t k, std::size_t n) { return (k == 0 || k + 1 == n) ? 0.5 : 1.0; }

void uniform_point(const DomainBox& box, Stream& s, std::span<double> x) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    std::uniform_real_distribution<double> u(box.lower[j], box.upper[j]);
    x[j] = u(s);
  }
}

}  // namespace

double relative_l2(const ScalarField& approx, const ScalarField& exact, const DomainBox& box,
                   const Quadrature& quad) {
  const std::size_t d = box.dim();
  std::size_t total;
  if (quad.kind == Quadrature::Kind::grid) {
    if (quad.n < 2) throw std::invalid_argument("grid quadrature needs at least 2 nodes per axis");
    const double nodes = std::pow(static_cast<double>(quad.n), static_cast<double>(d));
    if (nodes > 1e8) throw std::invalid_argument("grid quadrature too large; use mc");
    total = static_cast<std::size_t>(std::llround(nodes));
  } else {
    if (quad.n == 0) throw std::invalid_argument("mc quadrature needs draws");
    total = quad.n;
  }
  std::vector<double> diff2(total);
  std::vector<double> ref2(total);
  const Stream root(quad.seed);
  const auto nt = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel
  {
    std::vector<double> x(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < nt; ++ii) {
      auto idx = static_cast<std::size_t>(ii);
      double w = 1.0;
      if (quad.kind == Quadrature::Kind::grid) {
        for (std::size_t j = 0; j < d; ++j) {
          const std::size_t k = idx % quad.n;
          idx /= quad.n;
          x[j] = grid_node(box, j, k, quad.n);
          w *= trapezoid_weight(k, quad.n);
        }
      } else {
        Stream s = root.split(idx);
        uniform_point(box, s, x);
      }
      const double e = exact(x);
      const double a = approx(x);
      diff2[static_cast<std::size_t>(ii)] = w * (a - e) * (a - e);
      ref2[static_cast<std::size_t>(ii)] = w * e * e;
    }
  }
  const double num = std::accumulate(diff2.begin(), diff2.end(), 0.0);
  const double den = std::accumulate(ref2.begin(), ref2.end(), 0.0);
  if (!(den > 0.0)) throw std::domain_error("reference solution has zero norm");
  return std::sqrt(num / den);
}

double relative_l2(const ProblemDef& problem, std::span<const double> theta, double t, const Quadrature& quad) {
  if (!problem.analytic) throw MissingAnalytic();
  const auto* param = problem.param.get();
  const std::vector<double> th(theta.begin(), theta.end());
  return relative_l2([param, &th](std::span<const double> x) { return param->eval(th, x); },
                     [&problem, t](std::span<const double> x) { return problem.analytic(t, x); }, problem.domain,
                     quad);
}

McEstimate marginal(const ScalarField& f, const DomainBox& box, std::size_t axis, double x, std::size_t n,
                    std::uint64_t seed) {
  const std::size_t d = box.dim();
  if (d < 2) throw std::invalid_argument("marginal needs d >= 2");
  if (axis >= d) throw DimensionError("marginal axis");
  if (n < 2) throw std::invalid_argument("marginal needs at least 2 draws");
  double volume = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (j != axis) volume *= box.upper[j] - box.lower[j];
  }
  std::vector<double> vals(n);
  const Stream root(seed);
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> p(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < nn; ++ii) {
      Stream s = root.split(static_cast<std::uint64_t>(ii));
      uniform_point(box, s, p);
      p[axis] = x;
      vals[static_cast<std::size_t>(ii)] = f(p);
    }
  }
  const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  return {volume * mean, volume * std::sqrt(var / static_cast<double>(n))};
}

McEstimate marginal(const ProblemDef& problem, std::span<const double> theta, std::size_t axis, double x,
                    std::size_t n, std::uint64_t seed) {
  const auto* param = problem.param.get();
  const std::vector<double> th(theta.begin(), theta.end());
  return marginal([param, &th](std::span<const double> p) { return param->eval(th, p); }, problem.domain, axis, x,
                  n, seed);
}

namespace {

struct WeightedDraws {
  std::size_t d = 0;
  std::vector<double> xs;
  std::vector<double> log_f;  // -inf where f <= 0
  std::vector<double> w;      // scaled weights f / q / exp(shift)
  double shift = 0.0;
  double sum_w = 0.0;
};

WeightedDraws weighted_draws(const ScalarField& f, const GaussianBias& bias, std::size_t n, std::uint64_t seed) {
  const auto d = static_cast<std::size_t>(bias.mean.size());
  if (bias.covariance.rows() != bias.mean.size() || bias.covariance.cols() != bias.mean.size()) {
    throw DimensionError("biasing covariance shape");
  }
  if (n == 0) throw std::invalid_argument("snis needs draws");
  const Eigen::LLT<Eigen::MatrixXd> llt(bias.covariance);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("biasing covariance must be positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  double log_norm = 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < d; ++j) log_norm += std::log(L(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));

  WeightedDraws out;
  out.d = d;
  out.xs.resize(n * d);
  out.log_f.resize(n);
  std::vector<double> log_w(n);
  const Stream root(seed);
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    Eigen::VectorXd z(static_cast<Eigen::Index>(d));
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < nn; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      Stream s = root.split(i);
      std::normal_distribution<double> normal;
      for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = normal(s);
      const Eigen::VectorXd x = bias.mean + L * z;
      std::copy(x.data(), x.data() + d, out.xs.begin() + static_cast<std::ptrdiff_t>(i * d));
      const double fx = f(std::span<const double>(x.data(), d));
      const double log_q = -0.5 * z.squaredNorm() - log_norm;
      out.log_f[i] = fx > 0.0 ? std::log(fx) : -std::numeric_limits<double>::infinity();
      log_w[i] = out.log_f[i] - log_q;
    }
  }
  out.shift = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(out.shift)) throw ZeroWeights();
  out.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.w[i] = std::exp(log_w[i] - out.shift);
  out.sum_w = std::accumulate(out.w.begin(), out.w.end(), 0.0);
  return out;
}

double ess_of(const WeightedDraws& wd) {
  double s2 = 0.0;
  for (double w : wd.w) s2 += w * w;
  return wd.sum_w * wd.sum_w / s2;
}

ScalarField field_of(const ProblemDef& problem, std::span<const double> theta) {
  auto param = problem.param;
  std::vector<double> th(theta.begin(), theta.end());
  return [param, th](std::span<const double> x) { return param->eval(th, x); };
}

}  // namespace

MomentEstimate snis_moments(const ScalarField& f, const GaussianBias& bias, std::size_t n, std::uint64_t seed) {
  const WeightedDraws wd = weighted_draws(f, bias, n, seed);
  const auto d = static_cast<Eigen::Index>(wd.d);
  MomentEstimate est;
  est.mean = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) est.mean[j] += wd.w[i] * wd.xs[i * wd.d + static_cast<std::size_t>(j)];
  }
  est.mean /= wd.sum_w;
  est.covariance = Eigen::MatrixXd::Zero(d, d);
  est.mean_std_error = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd c(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) c[j] = wd.xs[i * wd.d + static_cast<std::size_t>(j)] - est.mean[j];
    est.covariance.noalias() += wd.w[i] * c * c.transpose();
    est.mean_std_error += (wd.w[i] * wd.w[i]) * c.cwiseProduct(c);
  }
  est.covariance /= wd.sum_w;
  est.covariance = 0.5 * (est.covariance + est.covariance.transpose()).eval();
  est.mean_std_error = est.mean_std_error.cwiseSqrt() / wd.sum_w;
  est.ess = ess_of(wd);
  return est;
}

MomentEstimate snis_moments(const ProblemDef& problem, std::span<const double> theta, const GaussianBias& bias,
                            std::size_t n, std::uint64_t seed) {
  return snis_moments(field_of(problem, theta), bias, n, seed);
}

EntropyEstimate snis_entropy(const ScalarField& f, const GaussianBias& bias, std::size_t n, std::uint64_t seed) {
  const WeightedDraws wd = weighted_draws(f, bias, n, seed);
  const double nd = static_cast<double>(n);
  const double b = wd.sum_w / nd;
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (wd.w[i] > 0.0) a -= wd.w[i] * wd.log_f[i];
  }
  a /= nd;
  const double h1 = a / b;
  EntropyEstimate est;
  est.normalizer = b * std::exp(wd.shift);
  est.value = h1 + std::log(est.normalizer);
  // Influence function of a / b + log b.
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = wd.w[i] > 0.0 ? -wd.w[i] * wd.log_f[i] : 0.0;
    psi[i] = (ai - h1 * wd.w[i]) / b + (wd.w[i] - b) / b;
  }
  const double mpsi = std::accumulate(psi.begin(), psi.end(), 0.0) / nd;
  double var = 0.0;
  for (double p : psi) var += (p - mpsi) * (p - mpsi);
  est.std_error = n > 1 ? std::sqrt(var / (nd - 1.0) / nd) : 0.0;
  est.ess = ess_of(wd);
  return est;
}

EntropyEstimate snis_entropy(const ProblemDef& problem, std::span<const double> theta, const GaussianBias& bias,
                             std::size_t n, std::uint64_t seed) {
  return snis_entropy(field_of(problem, theta), bias, n, seed);
}

SdeModel fokker_planck_sde(std::size_t d) { return fokker_planck_sde(d, fp_initial_mean(d), 0.1); }

SdeModel fokker_planck_sde(std::size_t d, std::vector<double> initial_mean, double initial_variance) {
  SdeModel m;
  m.d = d;
  m.diffusion = kFokkerPlanckDiffusion;
  m.one_body = fp_one_body;
  m.interaction = [d](double x, double y) { return fp_interaction(x, y, d); };
  m.initial_mean = std::move(initial_mean);
  m.initial_variance = initial_variance;
  return m;
}

std::size_t PathBundle::time_index(double t) const {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
  }
  throw std::invalid_argument("time " + std::to_string(t) + " is not on the path grid");
}

PathBundle euler_maruyama(const SdeModel& model, std::size_t n_paths, double dt, const std::vector<double>& t_grid,
                          std::uint64_t seed, Exec exec) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (model.initial_mean.size() != model.d) throw DimensionError("initial mean length");
  const std::size_t d = model.d;
  std::vector<std::size_t> record_steps;
  for (double t : t_grid) {
    const double k = std::round(t / dt);
    if (t < 0.0 || std::abs(k * dt - t) > 1e-9 * std::max(1.0, t)) {
      throw std::invalid_argument("requested time not on the dt grid");
    }
    if (!record_steps.empty() && static_cast<std::size_t>(k) < record_steps.back()) {
      throw std::invalid_argument("time grid must be ascending");
    }
    record_steps.push_back(static_cast<std::size_t>(k));
  }
  const std::size_t n_total = record_steps.empty() ? 0 : record_steps.back();

  PathBundle b;
  b.n_paths = n_paths;
  b.d = d;
  b.times = t_grid;
  b.seed = seed;
  b.states.assign(t_grid.size(), std::vector<double>(n_paths * d));
  const Stream root(seed);
  const double noise = std::sqrt(2.0 * model.diffusion * dt);
  const double sd0 = std::sqrt(model.initial_variance);
  const auto np = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel if (exec == Exec::parallel)
  {
    std::vector<double> x(d);
    std::vector<double> drift(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t pi = 0; pi < np; ++pi) {
      const auto p = static_cast<std::size_t>(pi);
      Stream s = root.split(p);
      std::normal_distribution<double> normal;
      for (std::size_t i = 0; i < d; ++i) x[i] = model.initial_mean[i] + sd0 * normal(s);
      std::size_t next = 0;
      for (std::size_t step = 0;; ++step) {
        while (next < record_steps.size() && record_steps[next] == step) {
          std::copy(x.begin(), x.end(), b.states[next].begin() + static_cast<std::ptrdiff_t>(p * d));
          ++next;
        }
        if (step == n_total) break;
        const double t = static_cast<double>(step) * dt;
        for (std::size_t i = 0; i < d; ++i) {
          double h = model.one_body ? model.one_body(t, x[i]) : 0.0;
          if (model.interaction) {
            for (std::size_t j = 0; j < d; ++j) h += model.interaction(x[i], x[j]);
          }
          drift[i] = h;
        }
        for (std::size_t i = 0; i < d; ++i) x[i] += drift[i] * dt + noise * normal(s);
      }
    }
  }
  return b;
}

MomentEstimate sample_moments(std::span<const double> xs, std::size_t d) {
  const std::size_t n = d == 0 ? 0 : xs.size() / d;
  if (n < 2) throw std::invalid_argument("moments need at least 2 samples");
  const auto dd = static_cast<Eigen::Index>(d);
  MomentEstimate est;
  est.mean = Eigen::VectorXd::Zero(dd);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dd; ++j) est.mean[j] += xs[i * d + static_cast<std::size_t>(j)];
  }
  est.mean /= static_cast<double>(n);
  est.covariance = Eigen::MatrixXd::Zero(dd, dd);
  Eigen::VectorXd c(dd);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dd; ++j) c[j] = xs[i * d + static_cast<std::size_t>(j)] - est.mean[j];
    est.covariance.noalias() += c * c.transpose();
  }
  est.covariance /= static_cast<double>(n - 1);
  est.covariance = 0.5 * (est.covariance + est.covariance.transpose()).eval();
  est.mean_std_error = (est.covariance.diagonal() / static_cast<double>(n)).cwiseSqrt();
  est.ess = static_cast<double>(n);
  return est;
}

MomentEstimate mc_moments(const PathBundle& bundle, double t) {
  return sample_moments(bundle.states[bundle.time_index(t)], bundle.d);
}

double kde_entropy(std::span<const double> xs_in, std::size_t d, KdeBandwidth bw, Exec exec) {
  const std::size_t n = d == 0 ? 0 : xs_in.size() / d;
  if (n < 2) throw std::invalid_argument("kde needs at least 2 samples");
  // Canonical order makes the sums independent of the input permutation.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(xs_in.begin() + static_cast<std::ptrdiff_t>(a * d),
                                        xs_in.begin() + static_cast<std::ptrdiff_t>((a + 1) * d),
                                        xs_in.begin() + static_cast<std::ptrdiff_t>(b * d),
                                        xs_in.begin() + static_cast<std::ptrdiff_t>((b + 1) * d));
  });
  std::vector<double> xs(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(xs_in.begin() + static_cast<std::ptrdiff_t>(order[r] * d), d, xs.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  bool identical = true;
  for (std::size_t i = 1; i < n && identical; ++i) {
    identical = std::equal(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(d),
                           xs.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  if (identical) throw std::domain_error("kde of identical samples is degenerate");

  std::vector<double> h(d);
  if (bw.rule == KdeBandwidth::Rule::fixed) {
    if (!(bw.h > 0.0)) throw std::invalid_argument("kde bandwidth must be positive");
    std::fill(h.begin(), h.end(), bw.h);
  } else {
    const MomentEstimate m = sample_moments(xs, d);
    const double factor = std::pow(4.0 / ((static_cast<double>(d) + 2.0) * static_cast<double>(n)),
                                   1.0 / (static_cast<double>(d) + 4.0));
    for (std::size_t j = 0; j < d; ++j) {
      h[j] = std::sqrt(m.covariance(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))) * factor;
      if (!(h[j] > 0.0)) throw std::domain_error("kde bandwidth degenerate along an axis");
    }
  }
  double log_const = std::log(static_cast<double>(n)) + 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);
  for (double hj : h) log_const += std::log(hj);

  std::vector<double> log_p(n);
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t ii = 0; ii < nn; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double sum = 0.0;  // exponents are <= 0 with the self term equal to 0
    for (std::size_t l = 0; l < n; ++l) {
      double q = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double z = (xs[i * d + j] - xs[l * d + j]) / h[j];
        q += z * z;
      }
      sum += std::exp(-0.5 * q);
    }
    log_p[i] = std::log(sum) - log_const;
  }
  return -std::accumulate(log_p.begin(), log_p.end(), 0.0) / static_cast<double>(n);
}

double kde_entropy(const PathBundle& bundle, double t, KdeBandwidth bw, Exec exec) {
  return kde_entropy(bundle.states[bundle.time_index(t)], bundle.d, bw, exec);
}

namespace {

Spread spread_of(const double* v, std::size_t n) {
  Spread s;
  if (n == 0) return s;
  s.min = *std::min_element(v, v + n);
  s.max = *std::max_element(v, v + n);
  s.avg = std::accumulate(v, v + n, 0.0) / static_cast<double>(n);
  return s;
}

double rel_or_abs(double a, double b, bool& absolute) {
  absolute = b == 0.0;
  return absolute ? std::abs(a - b) : std::abs(a - b) / std::abs(b);
}

}  // namespace

MomentErrors relative_moment_errors(const MomentEstimate& est, const MomentEstimate& bench) {
  if (est.mean.size() != bench.mean.size() || est.covariance.rows() != bench.covariance.rows() ||
      est.covariance.cols() != bench.covariance.cols()) {
    throw DimensionError("moment shapes differ");
  }
  const Eigen::Index d = est.mean.size();
  MomentErrors e;
  e.mean_rel.resize(d);
  e.cov_diag_rel.resize(d);
  e.cov_rel.resize(d, d);
  e.mean_absolute.resize(static_cast<std::size_t>(d));
  e.cov_absolute.resize(static_cast<std::size_t>(d * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    bool abs_flag = false;
    e.mean_rel[i] = rel_or_abs(est.mean[i], bench.mean[i], abs_flag);
    e.mean_absolute[static_cast<std::size_t>(i)] = abs_flag;
    for (Eigen::Index j = 0; j < d; ++j) {
      e.cov_rel(i, j) = rel_or_abs(est.covariance(i, j), bench.covariance(i, j), abs_flag);
      e.cov_absolute[static_cast<std::size_t>(i * d + j)] = abs_flag;
    }
    e.cov_diag_rel[i] = e.cov_rel(i, i);
  }
  e.mean = spread_of(e.mean_rel.data(), static_cast<std::size_t>(d));
  e.cov = spread_of(e.cov_rel.data(), static_cast<std::size_t>(d * d));
  e.cov_diag = spread_of(e.cov_diag_rel.data(), static_cast<std::size_t>(d));
  return e;
}

}  // namespace ngalerkin
