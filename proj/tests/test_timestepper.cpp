#include <gtest/gtest.h>

#include <cmath>

#include "ngalerkin/timestepper.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ngalerkin;

namespace {

const Ensemble kUnitEnsemble(1, {0.25, 0.5, 0.75});

double one_step(const ProblemDef& p, double theta, double t, double dt, Scheme scheme = Scheme::rk4) {
  const StepResult r = rk4_step(p, std::vector<double>{theta}, kUnitEnsemble, t, dt, {}, scheme);
  return dt * r.dtheta[0];
}

double rk4_global_error(double dt) {
  const ProblemDef p = ngtest::scalar_ode([](double, const auto& u) { return -u; });
  double theta = 1.0;
  const auto steps = steps_for_final_time(1.0, dt);
  for (std::size_t k = 0; k < steps; ++k) theta += one_step(p, theta, k * dt, dt);
  return std::abs(theta - std::exp(-1.0));
}

Ensemble uniform(const DomainBox& box, std::size_t m, std::uint64_t seed) {
  Stream s(seed);
  std::vector<double> xs;
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = ngtest::uniform_point(box, s);
    xs.insert(xs.end(), x.begin(), x.end());
  }
  return Ensemble(box.dim(), xs, Stream(seed + 7));
}

SamplerConfig frozen() {
  SamplerConfig c;
  c.n_substeps = 0;
  return c;
}

}  // namespace

TEST(StepsForFinalTime, ExactMultiples) {
  EXPECT_EQ(steps_for_final_time(0.5, 1e-3), 500u);
  EXPECT_EQ(steps_for_final_time(1.0, 0.0125), 80u);
  EXPECT_EQ(steps_for_final_time(0.0, 0.1), 0u);
  EXPECT_THROW(steps_for_final_time(1.0, 0.3), std::invalid_argument);
  EXPECT_THROW(steps_for_final_time(1.0, 0.0), std::invalid_argument);
}

TEST(Rk4, ExponentialGrowthFactor) {
  const ProblemDef p = ngtest::scalar_ode([](double, const auto& u) { return u; });
  const double dt = 0.1;
  const double factor = 1 + dt + dt * dt / 2 + dt * dt * dt / 6 + dt * dt * dt * dt / 24;
  EXPECT_NEAR(1.0 + one_step(p, 1.0, 0.0, dt), factor, 1e-14);
  EXPECT_NEAR(1.0 + one_step(p, 1.0, 0.0, dt, Scheme::forward_euler), 1.0 + dt, 1e-15);
}

TEST(Rk4, ExponentialDecayOneStep) {
  const ProblemDef p = ngtest::scalar_ode([](double, const auto& u) { return -u; });
  EXPECT_LT(std::abs(one_step(p, 1.0, 0.0, 0.1) - (std::exp(-0.1) - 1.0)), 1e-7);
}

TEST(Rk4, StageTimesFollowTableau) {
  const ProblemDef p = ngtest::scalar_ode([](double t, const auto& u) { return t + 0.0 * u; });
  EXPECT_NEAR(one_step(p, 0.0, 0.0, 0.2), 0.02, 1e-16);
  // theta' = t^3 from t = 1: exact increment ((1 + h)^4 - 1) / 4
  const ProblemDef q = ngtest::scalar_ode([](double t, const auto& u) { return t * t * t + 0.0 * u; });
  EXPECT_NEAR(one_step(q, 0.0, 1.0, 0.5), (std::pow(1.5, 4) - 1.0) / 4.0, 1e-14);
}

TEST(Rk4, FourthOrderConvergence) {
  const std::vector<double> dts{0.1, 0.05, 0.025, 0.0125};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double dt : dts) {
    const double x = std::log(dt), y = std::log(rk4_global_error(dt));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double n = static_cast<double>(dts.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_GE(slope, 3.8);
  EXPECT_LE(slope, 4.2);
}

TEST(Rk4, ResidualRmsIsZeroForRealizableRhs) {
  const ProblemDef p = ngtest::scalar_ode([](double, const auto& u) { return -u; });
  const StepResult r = rk4_step(p, std::vector<double>{2.0}, kUnitEnsemble, 0.0, 0.1, {}, Scheme::forward_euler);
  EXPECT_NEAR(r.residual_rms, 0.0, 1e-15);
  EXPECT_EQ(r.first_stage.rank, 1u);
}

TEST(Predictor, EqualsFirstStage) {
  const ProblemDef p = kdv_problem();
  const std::vector<double> theta = init_parameters(*p.network, 3);
  const Ensemble ens = uniform(p.domain, 80, 4);
  const std::vector<double> pred = predictor(p, theta, ens, 0.0, {});
  const StepResult r = rk4_step(p, theta, ens, 0.0, 1e-3, {});
  for (std::size_t j = 0; j < pred.size(); ++j) EXPECT_EQ(pred[j], r.first_stage.dtheta[static_cast<Eigen::Index>(j)]);
}

TEST(Predictor, ScalarGrowth) {
  const ProblemDef p = ngtest::scalar_ode([](double, const auto& u) { return u; });
  EXPECT_NEAR(predictor(p, std::vector<double>{1.7}, kUnitEnsemble, 0.0, {})[0], 1.7, 1e-15);
}

TEST(Predictor, PermutationInvariant) {
  const ProblemDef p = advection_problem();
  const std::vector<double> theta = init_parameters(*p.network, 5);
  const Ensemble ens = uniform(p.domain, 100, 6);
  std::vector<double> rev(ens.coords.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    std::copy_n(ens.point(i).begin(), 5, rev.begin() + static_cast<long>(5 * (ens.size() - 1 - i)));
  }
  const std::vector<double> a = predictor(p, theta, ens, 0.1, {});
  const std::vector<double> b = predictor(p, theta, Ensemble(5, rev), 0.1, {});
  EXPECT_LT(ngtest::rel_error(a, b), 1e-12);
}

TEST(Integrate, ZeroStepsGivesInitialState) {
  const ProblemDef p = kdv_problem();
  StepperConfig sc;
  sc.n_steps = 0;
  const std::vector<double> theta = init_parameters(*p.network, 7);
  const Trajectory tr = integrate(p, sc, frozen(), theta, uniform(p.domain, 10, 8));
  ASSERT_EQ(tr.thetas.size(), 1u);
  EXPECT_EQ(tr.thetas[0], theta);
  EXPECT_EQ(tr.times, std::vector<double>{0.0});
  EXPECT_FALSE(tr.error);
}

TEST(Integrate, ZeroRhsKeepsParametersConstant) {
  ProblemDef p;
  p.name = "still";
  p.domain = DomainBox({-1.0}, {1.0});
  p.network = NetworkSpec{1, {5, 5}, Activation::sigmoid, false, Wrapper::none};
  p.param = std::make_shared<Mlp>(*p.network);
  p.rhs = make_rhs({}, [](double, auto, const auto&, auto) { return 0.0; });
  StepperConfig sc;
  sc.n_steps = 5;
  sc.dt = 0.01;
  SamplerConfig smp;
  smp.kind = SamplerKind::static_uniform;
  const std::vector<double> theta = init_parameters(*p.network, 9);
  const Trajectory tr = integrate(p, sc, smp, theta, uniform(p.domain, 30, 10));
  ASSERT_FALSE(tr.error);
  for (const auto& th : tr.thetas) EXPECT_EQ(th, theta);
}

TEST(Integrate, ObserversSeeEveryStep) {
  const ProblemDef p = ngtest::scalar_ode([](double, const auto& u) { return -u; });
  StepperConfig sc;
  sc.n_steps = 4;
  sc.dt = 0.25;
  std::vector<std::size_t> ks;
  std::vector<double> ts;
  const Observer obs = [&](const StepRecord& r) {
    ks.push_back(r.k);
    ts.push_back(r.t);
    EXPECT_EQ(r.ensemble.size(), 3u);
  };
  const Trajectory tr = integrate(p, sc, frozen(), {1.0}, kUnitEnsemble, {obs});
  EXPECT_EQ(ks, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(ts, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(tr.times, ts);
  double exact = 1.0;
  for (int k = 0; k < 4; ++k) exact *= 1 - 0.25 + 0.25 * 0.25 / 2 - std::pow(0.25, 3) / 6 + std::pow(0.25, 4) / 24;
  EXPECT_NEAR(tr.thetas.back()[0], exact, 1e-14);
}

TEST(Integrate, SpectralOracleOnFourierAdvection) {
  const std::size_t modes = 16;
  const double c = 1.3;
  const ProblemDef p = ngtest::fourier_advection(modes, c);
  Stream s(11);
  const std::vector<double> theta0 = ngtest::uniform_vector(2 * modes + 1, -1.0, 1.0, s);
  StepperConfig sc;
  sc.dt = 1e-2;
  sc.n_steps = 100;
  sc.solve.rel_cutoff = 1e-12;
  const Trajectory tr = integrate(p, sc, frozen(), theta0, Ensemble(1, ngtest::periodic_grid(64)));
  ASSERT_FALSE(tr.error);
  double worst = 0.0;
  for (std::size_t k = 0; k <= 100; k += 10) {
    const std::vector<double> ref = ngtest::spectral_advection_rk4(theta0, c, sc.dt, k);
    for (std::size_t j = 0; j < ref.size(); ++j) worst = std::max(worst, std::abs(ref[j] - tr.thetas[k][j]));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Integrate, DeterministicAcrossRuns) {
  const ProblemDef p = kdv_problem();
  StepperConfig sc;
  sc.n_steps = 3;
  sc.dt = 1e-3;
  SamplerConfig smp;
  smp.n_substeps = 3;
  smp.bandwidth = 0.5;
  const std::vector<double> theta = init_parameters(*p.network, 12);
  const Ensemble ens = uniform(p.domain, 40, 13);
  const Trajectory a = integrate(p, sc, smp, theta, ens);
  const Trajectory b = integrate(p, sc, smp, theta, ens);
  EXPECT_EQ(a.thetas, b.thetas);
  EXPECT_EQ(a.final_ensemble.coords, b.final_ensemble.coords);
  SamplerConfig lang = smp;
  lang.kind = SamplerKind::langevin;
  lang.step_size = 1e-3;
  EXPECT_EQ(integrate(p, sc, lang, theta, ens).thetas, integrate(p, sc, lang, theta, ens).thetas);
}

TEST(Integrate, SerialReferenceTracksParallel) {
  const ProblemDef p = advection_problem();
  StepperConfig sc;
  sc.n_steps = 2;
  SamplerConfig smp;
  smp.n_substeps = 2;
  smp.bandwidth = 0.5;
  const std::vector<double> theta = init_parameters(*p.network, 14);
  const Ensemble ens = uniform(p.domain, 60, 15);
  const Trajectory a = integrate(p, sc, smp, theta, ens, {}, Exec::serial);
  const Trajectory b = integrate(p, sc, smp, theta, ens, {}, Exec::parallel);
  EXPECT_LT(ngtest::rel_error(a.thetas.back(), b.thetas.back()), 1e-8);
}

TEST(Integrate, FailureKeepsPartialTrajectory) {
  const ProblemDef p = ngtest::scalar_ode([](double t, const auto& u) {
    using T = std::decay_t<decltype(u)>;
    return t > 0.15 ? T(std::nan("")) : -u;
  });
  StepperConfig sc;
  sc.n_steps = 10;
  sc.dt = 0.1;
  const Trajectory tr = integrate(p, sc, frozen(), {1.0}, kUnitEnsemble);
  ASSERT_TRUE(tr.error);
  EXPECT_EQ(tr.thetas.size(), 2u);
  EXPECT_NE(tr.error->find("step 2"), std::string::npos);
}

TEST(Fit, RecoversRealizableTarget) {
  ProblemDef p;
  p.name = "teacher";
  p.domain = DomainBox({-3.0}, {3.0});
  p.network = NetworkSpec{1, {5, 5}, Activation::sigmoid, false, Wrapper::none};
  auto net = std::make_shared<Mlp>(*p.network);
  p.param = net;
  std::vector<double> star = init_parameters(*p.network, 16);
  for (double& v : star) v *= 3.0;
  p.initial_condition = [net, star](std::span<const double> x) { return net->eval(star, x); };
  FitConfig fc;
  fc.tolerance = 1e-8;
  fc.max_iters = 500;
  fc.restarts = 4;
  const FitResult r = fit_initial(p, fc, 17);
  EXPECT_LT(r.misfit, 1e-8);
}

TEST(Fit, LinearModelMatchesNormalEquations) {
  const ProblemDef p = ngtest::fourier_advection(3, 1.0);
  FitConfig fc;
  fc.n_fit_samples = 300;
  fc.tolerance = 1.0;
  const FitResult r = fit_initial(p, fc, 18);
  // same points as fit_initial draws
  const Stream draws = Stream(18).split("points");
  Eigen::MatrixXd A(300, 7);
  Eigen::VectorXd b(300);
  for (std::size_t i = 0; i < 300; ++i) {
    Stream s = draws.split(i);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    const std::vector<double> x{u(s)};
    const std::vector<double> g = p.param->grad_theta(std::vector<double>(7, 0.0), x);
    for (std::size_t j = 0; j < 7; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g[j];
    b[static_cast<Eigen::Index>(i)] = p.initial_condition(x);
  }
  const Eigen::VectorXd ls = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  for (std::size_t j = 0; j < 7; ++j) EXPECT_NEAR(r.theta[j], ls[static_cast<Eigen::Index>(j)], 1e-8);
}

TEST(Fit, ZeroTargetWithZeroOutputIsImmediate) {
  ProblemDef p = kdv_problem();
  p.initial_condition = [](std::span<const double>) { return 0.0; };
  std::vector<double> start = init_parameters(*p.network, 19);
  std::fill(start.end() - 5, start.end(), 0.0);
  const FitResult r = fit_initial(p, FitConfig{}, 20, start);
  EXPECT_EQ(r.misfit, 0.0);
  EXPECT_EQ(r.iterations, 0u);
}

TEST(Fit, ErrorCarriesMisfit) {
  ProblemDef p = kdv_problem();
  FitConfig fc;
  fc.max_iters = 1;
  fc.restarts = 0;
  fc.tolerance = 1e-12;
  try {
    fit_initial(p, fc, 21);
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    EXPECT_GT(e.misfit(), 1e-12);
    EXPECT_TRUE(std::isfinite(e.misfit()));
  }
}

TEST(Fit, KdvInitialConditionIsFittable) {
  const ProblemDef p = kdv_problem();
  FitConfig fc;
  fc.n_fit_samples = 2000;
  fc.tolerance = 1e-4;
  fc.restarts = 8;
  fc.weight_decay = 1e-8;
  const FitResult r = fit_initial(p, fc, 22);
  EXPECT_LT(r.misfit, 1e-4);
}

TEST(Seeds, NamedStreamsDiffer) {
  const RunSeeds s = derive_seeds(42);
  EXPECT_NE(s.fit, s.ensemble_init);
  EXPECT_NE(s.fit, s.sampler);
  EXPECT_NE(s.ensemble_init, s.sampler);
  EXPECT_EQ(derive_seeds(42).sampler, s.sampler);
  EXPECT_NE(derive_seeds(43).sampler, s.sampler);
}
