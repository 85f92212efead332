#include "ngalerkin/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace ngalerkin {

void validate(const SamplerConfig& cfg) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(cfg.gamma, "gamma");
  positive(cfg.bandwidth, "bandwidth");
  if (!(cfg.step_size >= 0.0) || !std::isfinite(cfg.step_size)) {
    throw std::invalid_argument("step_size must be non-negative");
  }
  positive(cfg.smoothing, "smoothing");
  positive(cfg.fd_relative_step, "fd_relative_step");
}

PotentialContext::PotentialContext(const ProblemDef& problem, std::vector<double> theta,
                                   std::vector<double> dtheta, double t, SamplerConfig cfg)
    : problem_(&problem),
      box_(problem.domain),
      theta_(std::move(theta)),
      dtheta_(std::move(dtheta)),
      t_(t),
      cfg_(cfg) {
  validate(cfg_);
  if (theta_.size() != problem.param_count()) throw DimensionError("theta length");
  if (dtheta_.size() != problem.param_count()) throw DimensionError("dtheta length");
  if (!problem.penalties.empty()) boundary_term_ = boundary_residual(problem, theta_, dtheta_, t_);
}

PotentialContext::PotentialContext(DomainBox box, PotentialFn potential, SamplerConfig cfg)
    : box_(std::move(box)), cfg_(cfg), custom_(std::move(potential)) {
  validate(cfg_);
  if (!custom_) throw std::invalid_argument("empty potential");
}

namespace {

void check_point(const PotentialContext& ctx, std::span<const double> x) {
  if (x.size() != ctx.dim()) throw DimensionError("point dimension");
}

double residual_value(const PotentialContext& ctx, std::span<const double> x) {
  return interior_residual(ctx.problem(), ctx.theta(), ctx.dtheta(), ctx.time(), x) + ctx.boundary_term();
}

// Writes grad_x of the interior residual; returns the combined residual.
double residual_and_gradient(const PotentialContext& ctx, std::span<const double> x, std::span<double> grad) {
  const ProblemDef& p = ctx.problem();
  if (ctx.config().gradient == GradientMode::exact) {
    return residual_gradient(p, ctx.theta(), ctx.dtheta(), ctx.time(), x, grad) + ctx.boundary_term();
  }
  std::vector<double> xp(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = ctx.config().fd_relative_step * (p.domain.upper[j] - p.domain.lower[j]);
    xp[j] = x[j] + h;
    const double rp = interior_residual(p, ctx.theta(), ctx.dtheta(), ctx.time(), xp);
    xp[j] = x[j] - h;
    const double rm = interior_residual(p, ctx.theta(), ctx.dtheta(), ctx.time(), xp);
    xp[j] = x[j];
    grad[j] = (rp - rm) / (2.0 * h);
  }
  return residual_value(ctx, x);
}

double reference_term(const PotentialContext& ctx, std::span<const double> x, std::span<double> grad) {
  // -gamma log nu, added to V and its gradient.
  if (!ctx.reference_log_density()) return 0.0;
  std::vector<double> g(x.size());
  const double log_nu = ctx.reference_log_density()(x, g);
  for (std::size_t j = 0; j < x.size(); ++j) grad[j] -= ctx.config().gamma * g[j];
  return -ctx.config().gamma * log_nu;
}

}  // namespace

double potential(const PotentialContext& ctx, std::span<const double> x) {
  std::vector<double> scratch(x.size());
  check_point(ctx, x);
  double v;
  if (ctx.custom()) {
    v = ctx.custom()(x, scratch);
  } else {
    const SamplerConfig& cfg = ctx.config();
    if (cfg.target == TargetKind::residual_squared) {
      const double r = residual_value(ctx, x);
      v = -cfg.gamma * std::log(r * r + cfg.smoothing);
    } else {
      const double u = ctx.problem().param->eval(ctx.theta(), x);
      v = -cfg.gamma * std::log(std::abs(u) + cfg.smoothing);
    }
  }
  return v + reference_term(ctx, x, scratch);
}

double grad_potential(const PotentialContext& ctx, std::span<const double> x, std::span<double> grad) {
  check_point(ctx, x);
  if (grad.size() != x.size()) throw DimensionError("gradient buffer size");
  double v;
  if (ctx.custom()) {
    v = ctx.custom()(x, grad);
  } else {
    const SamplerConfig& cfg = ctx.config();
    const std::size_t d = x.size();
    if (cfg.target == TargetKind::residual_squared) {
      const double r = residual_and_gradient(ctx, x, grad);
      const double denom = r * r + cfg.smoothing;
      for (std::size_t j = 0; j < d; ++j) grad[j] = -2.0 * cfg.gamma * r * grad[j] / denom;
      v = -cfg.gamma * std::log(denom);
    } else {
      std::vector<DerivOrder> orders(d);
      for (std::size_t j = 0; j < d; ++j) orders[j] = {j, 1};
      std::vector<double> du(d);
      const double u = ctx.problem().param->eval_into(ctx.theta(), x, orders, {}, du);
      const double denom = std::abs(u) + cfg.smoothing;
      const double sign = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
      for (std::size_t j = 0; j < d; ++j) grad[j] = -cfg.gamma * sign * du[j] / denom;
      v = -cfg.gamma * std::log(denom);
    }
  }
  return v + reference_term(ctx, x, grad);
}

KernelValue gaussian_kernel(std::span<const double> x, std::span<const double> y, double h,
                            KernelConvention convention) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (x.size() != y.size()) throw DimensionError("kernel arguments");
  double r2 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) r2 += (x[j] - y[j]) * (x[j] - y[j]);
  // Same arithmetic as the fused loop in svgd_substep, so both agree bitwise.
  const double inv = convention == KernelConvention::gaussian ? 1.0 / (2.0 * h * h) : 1.0 / h;
  const double coef = 2.0 * inv;
  KernelValue out;
  out.value = std::exp(-r2 * inv);
  out.grad1.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out.grad1[j] = -coef * (x[j] - y[j]) * out.value;
  return out;
}

void apply_boundary(const DomainBox& box, BoundaryPolicy policy, std::span<double> x) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lo = box.lower[j];
    const double hi = box.upper[j];
    if (policy == BoundaryPolicy::reflect && std::isfinite(lo) && std::isfinite(hi)) {
      const double w = hi - lo;
      double y = std::fmod(x[j] - lo, 2.0 * w);
      if (y < 0.0) y += 2.0 * w;
      x[j] = y > w ? hi - (y - w) : lo + y;
    }
    x[j] = std::clamp(x[j], lo, hi);
  }
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

std::vector<double> all_gradients(const Ensemble& ens, const PotentialContext& ctx, Exec exec) {
  const std::size_t m = ens.size();
  const std::size_t d = ens.dim;
  std::vector<double> grads(m * d);
  const auto n = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic, 4) if (exec == Exec::parallel)
  for (std::ptrdiff_t l = 0; l < n; ++l) {
    const auto i = static_cast<std::size_t>(l);
    grad_potential(ctx, ens.point(i), {grads.data() + i * d, d});
  }
  return grads;
}

void finish(Ensemble& out, const Ensemble& in, const PotentialContext& ctx, std::size_t bad, const char* what) {
  if (bad != kNone) throw NonFiniteError(std::string("non-finite ") + what + " displacement", bad);
  for (std::size_t i = 0; i < out.size(); ++i) apply_boundary(ctx.domain(), ctx.config().boundary, out.point(i));
  out.rng = Stream(in.rng.key(), in.rng.counter() + 1);
}

Ensemble svgd_reference(const Ensemble& ens, const PotentialContext& ctx) {
  const std::size_t m = ens.size();
  const std::size_t d = ens.dim;
  const SamplerConfig& cfg = ctx.config();
  const std::vector<double> grads = all_gradients(ens, ctx, Exec::serial);
  Ensemble out = ens;
  std::size_t bad = kNone;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> phi(d, 0.0);
    for (std::size_t l = 0; l < m; ++l) {
      const KernelValue k = gaussian_kernel(ens.point(l), ens.point(i), cfg.bandwidth, cfg.kernel);
      for (std::size_t j = 0; j < d; ++j) phi[j] += k.grad1[j] - k.value * grads[l * d + j];
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double dx = cfg.step_size / static_cast<double>(m) * phi[j];
      if (!std::isfinite(dx) && bad == kNone) bad = i;
      out.coords[i * d + j] += dx;
    }
  }
  finish(out, ens, ctx, bad, "SVGD");
  return out;
}

}  // namespace

Ensemble svgd_substep(const Ensemble& ens, const PotentialContext& ctx, Exec exec) {
  if (ens.dim != ctx.dim()) throw DimensionError("ensemble dimension");
  if (exec == Exec::serial) return svgd_reference(ens, ctx);
  const std::size_t m = ens.size();
  const std::size_t d = ens.dim;
  const SamplerConfig& cfg = ctx.config();
  const std::vector<double> grads = all_gradients(ens, ctx, exec);
  const double h = cfg.bandwidth;
  const double inv = cfg.kernel == KernelConvention::gaussian ? 1.0 / (2.0 * h * h) : 1.0 / h;
  const double coef = 2.0 * inv;
  const double scale = cfg.step_size / static_cast<double>(m);
  Ensemble out = ens;
  std::size_t bad = kNone;
  const auto n = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel
  {
    std::vector<double> phi(d);
#pragma omp for schedule(static) reduction(min : bad)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const double* xi = ens.coords.data() + i * d;
      std::fill(phi.begin(), phi.end(), 0.0);
      for (std::size_t l = 0; l < m; ++l) {
        const double* xl = ens.coords.data() + l * d;
        double r2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) r2 += (xl[j] - xi[j]) * (xl[j] - xi[j]);
        const double k = std::exp(-r2 * inv);
        for (std::size_t j = 0; j < d; ++j) phi[j] += -coef * (xl[j] - xi[j]) * k - k * grads[l * d + j];
      }
      for (std::size_t j = 0; j < d; ++j) {
        const double dx = scale * phi[j];
        if (!std::isfinite(dx)) bad = std::min(bad, i);
        out.coords[i * d + j] += dx;
      }
    }
  }
  finish(out, ens, ctx, bad, "SVGD");
  return out;
}

Ensemble langevin_substep(const Ensemble& ens, const PotentialContext& ctx, Exec exec) {
  if (ens.dim != ctx.dim()) throw DimensionError("ensemble dimension");
  const std::size_t m = ens.size();
  const std::size_t d = ens.dim;
  const double step = ctx.config().step_size;
  const double noise = std::sqrt(2.0 * step);
  const Stream substep = ens.rng.split(ens.rng.counter());
  Ensemble out = ens;
  std::size_t bad = kNone;
  const auto n = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel if (exec == Exec::parallel)
  {
    std::vector<double> g(d);
#pragma omp for schedule(dynamic, 4) reduction(min : bad)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      Stream s = substep.split(i);
      std::normal_distribution<double> normal;
      grad_potential(ctx, ens.point(i), g);
      for (std::size_t j = 0; j < d; ++j) {
        const double dx = -step * g[j] + noise * normal(s);
        if (!std::isfinite(dx)) bad = std::min(bad, i);
        out.coords[i * d + j] += dx;
      }
    }
  }
  finish(out, ens, ctx, bad, "Langevin");
  return out;
}

Ensemble uniform_ensemble(const DomainBox& box, std::size_t m, Stream rng) {
  const std::size_t d = box.dim();
  const Stream draw = rng.split(rng.counter());
  std::vector<double> xs(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    Stream s = draw.split(i);
    for (std::size_t j = 0; j < d; ++j) {
      std::uniform_real_distribution<double> u(box.lower[j], box.upper[j]);
      xs[i * d + j] = u(s);
    }
  }
  return Ensemble(d, std::move(xs), Stream(rng.key(), rng.counter() + 1));
}

EnsembleUpdate update_ensemble(const Ensemble& previous, const PotentialContext& ctx, Exec exec) {
  const SamplerConfig& cfg = ctx.config();
  EnsembleUpdate out;
  if (cfg.kind == SamplerKind::static_uniform) {
    out.ensemble = uniform_ensemble(ctx.domain(), previous.size(), previous.rng);
  } else {
    out.ensemble = previous;
    for (std::size_t s = 0; s < cfg.n_substeps; ++s) {
      out.ensemble = cfg.kind == SamplerKind::svgd ? svgd_substep(out.ensemble, ctx, exec)
                                                   : langevin_substep(out.ensemble, ctx, exec);
    }
  }
  const std::size_t m = previous.size();
  const std::size_t d = previous.dim;
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double dx = out.ensemble.coords[i * d + j] - previous.coords[i * d + j];
      r2 += dx * dx;
    }
    total += std::sqrt(r2);
  }
  out.mean_displacement = m == 0 ? 0.0 : total / static_cast<double>(m);
  return out;
}

DegenerateEnvelope::DegenerateEnvelope(double rate)
    : std::runtime_error("rejection acceptance rate " + std::to_string(rate) + " below 1e-4"), rate_(rate) {}

Ensemble rejection_sample(const DomainBox& box, const std::function<double(std::span<const double>)>& density,
                          std::size_t m, Stream rng) {
  const std::size_t d = box.dim();
  std::vector<double> x(d);
  double peak = 0.0;
  double mean = 0.0;
  std::size_t n_scan;
  if (d == 1) {
    n_scan = 10001;
    for (std::size_t k = 0; k < n_scan; ++k) {
      x[0] = box.lower[0] + (box.upper[0] - box.lower[0]) * static_cast<double>(k) / static_cast<double>(n_scan - 1);
      const double v = std::abs(density(x));
      peak = std::max(peak, v);
      mean += v;
    }
  } else {
    n_scan = 100000;
    Stream scan = rng.split("envelope");
    for (std::size_t k = 0; k < n_scan; ++k) {
      for (std::size_t j = 0; j < d; ++j) {
        std::uniform_real_distribution<double> u(box.lower[j], box.upper[j]);
        x[j] = u(scan);
      }
      const double v = std::abs(density(x));
      peak = std::max(peak, v);
      mean += v;
    }
  }
  mean /= static_cast<double>(n_scan);
  const double envelope = 1.1 * peak;
  const double rate = envelope > 0.0 ? mean / envelope : 0.0;
  if (!(rate >= 1e-4)) throw DegenerateEnvelope(rate);

  const auto max_tries = static_cast<std::size_t>(100.0 / rate) + 1000;
  std::vector<double> xs(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    Stream s = rng.split(i);
    std::uniform_real_distribution<double> accept(0.0, 1.0);
    bool done = false;
    for (std::size_t tries = 0; tries < max_tries && !done; ++tries) {
      for (std::size_t j = 0; j < d; ++j) {
        std::uniform_real_distribution<double> u(box.lower[j], box.upper[j]);
        x[j] = u(s);
      }
      if (accept(s) * envelope < std::abs(density(x))) {
        std::copy(x.begin(), x.end(), xs.begin() + static_cast<std::ptrdiff_t>(i * d));
        done = true;
      }
    }
    if (!done) throw DegenerateEnvelope(0.0);
  }
  return Ensemble(d, std::move(xs), rng.split("dynamics"));
}

Ensemble sample_initial_ensemble(const ProblemDef& problem, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw std::invalid_argument("ensemble size must be positive");
  const Stream root(seed);
  if (!problem.initial_sampler) {
    if (!problem.initial_condition) throw std::invalid_argument("problem has no initial condition");
    return rejection_sample(problem.domain, problem.initial_condition, m, root);
  }
  const std::size_t d = problem.dim();
  std::vector<double> xs(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    Stream s = root.split(i);
    std::span<double> p(xs.data() + i * d, d);
    problem.initial_sampler(s, p);
    apply_boundary(problem.domain, BoundaryPolicy::clamp, p);
  }
  return Ensemble(d, std::move(xs), root.split("dynamics"));
}

}  // namespace ngalerkin
