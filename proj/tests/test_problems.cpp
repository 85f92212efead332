#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ngalerkin/metrics.hpp"
#include "ngalerkin/problems.hpp"
#include "test_support.hpp"

using namespace ngalerkin;
using ngtest::rel_error;

namespace {

// d/dt u + d^3/dx^3 u + 6 u d/dx u by fourth-order stencils.
double kdv_fd_residual(const TwoSoliton& u, double t, double x, double h) {
  auto in_x = [&](double y) { return u(t, y); };
  auto in_t = [&](double s) { return u(s, x); };
  return ngtest::stencil(in_t, t, h, 1) + ngtest::stencil(in_x, x, h, 3) + 6.0 * u(t, x) * ngtest::stencil(in_x, x, h, 1);
}

ProblemDef affine_problem(double f_value) {
  ProblemDef p;
  p.name = "affine";
  p.domain = DomainBox({0.0}, {1.0});
  p.network = NetworkSpec{1, {}, Activation::sigmoid, true, Wrapper::none};
  p.param = std::make_shared<Mlp>(*p.network);
  p.rhs = make_rhs({}, [f_value](double, auto, const auto&, auto) { return decltype(f_value)(f_value); });
  p.initial_condition = [](std::span<const double>) { return 0.0; };
  return p;
}

std::vector<double> random_theta(const ProblemDef& p, Stream& s) { return init_parameters(*p.network, s()); }

}  // namespace

TEST(DomainBox, VolumeAndContains) {
  const DomainBox box({-1.0, 0.0}, {1.0, 3.0});
  EXPECT_DOUBLE_EQ(box.volume(), 6.0);
  EXPECT_TRUE(box.contains(std::vector<double>{0.0, 3.0}));
  EXPECT_FALSE(box.contains(std::vector<double>{0.0, 3.1}));
  EXPECT_THROW(DomainBox({1.0}, {1.0}), std::invalid_argument);
}

TEST(Kdv, RhsPlugIn) {
  const ProblemDef p = kdv_problem();
  const std::vector<double> derivs{1.0, 2.0};
  EXPECT_DOUBLE_EQ(p.rhs.eval(0.0, std::vector<double>{0.0}, 0.0, derivs), -2.0);
  const std::vector<double> d2{0.5, -1.0};
  EXPECT_DOUBLE_EQ(p.rhs.eval(0.0, std::vector<double>{0.0}, 2.0, d2), 1.0 - 6.0);
}

TEST(Kdv, SetupValues) {
  const ProblemDef p = kdv_problem();
  EXPECT_EQ(p.domain.lower, std::vector<double>{-20.0});
  EXPECT_EQ(p.domain.upper, std::vector<double>{40.0});
  ASSERT_EQ(p.penalties.size(), 1u);
  EXPECT_DOUBLE_EQ(p.penalties[0].weight, 1e4);
  EXPECT_EQ(p.penalties[0].points.size(), 2u);
  EXPECT_EQ(p.param_count(), 45u);
  EXPECT_EQ(p.rhs.orders, (std::vector<DerivOrder>{{0, 1}, {0, 3}}));
}

TEST(Kdv, TwoSolitonSatisfiesPde) {
  const TwoSoliton u;
  Stream s(31);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = ngtest::uniform_vector(1, 0.0, 6.0, s)[0];
    const double x = ngtest::uniform_vector(1, -20.0, 40.0, s)[0];
    worst = std::max(worst, std::abs(kdv_fd_residual(u, t, x, 1e-3)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Kdv, TwoSolitonShape) {
  const TwoSoliton u;
  // Two well separated humps of height 2 kappa^2 at t = 0.
  double tall = 0.0, short_peak = 0.0;
  for (double x = -20.0; x <= 0.0; x += 1e-3) tall = std::max(tall, u(0.0, x));
  for (double x = 0.0; x <= 40.0; x += 1e-3) short_peak = std::max(short_peak, u(0.0, x));
  EXPECT_NEAR(tall, 2.0, 1e-3);
  EXPECT_NEAR(short_peak, 1.0, 1e-3);
  EXPECT_LT(u(0.0, -20.0), 1e-10);
  EXPECT_LT(u(0.0, 40.0), 1e-10);
  // The tall soliton has passed the short one by t = 10.
  double argmax = 0.0, best = 0.0;
  for (double x = -20.0; x < 40.0; x += 1e-2) {
    if (u(10.0, x) > best) {
      best = u(10.0, x);
      argmax = x;
    }
  }
  EXPECT_GT(argmax, 10.0);
}

TEST(Kdv, AnalyticSelfErrorIsZero) {
  const ProblemDef p = kdv_problem();
  auto f = [&](std::span<const double> x) { return p.analytic(0.7, x); };
  EXPECT_LT(relative_l2(f, f, p.domain, Quadrature::grid(4001)), 1e-12);
}

TEST(Advection, VelocityAtZero) {
  const std::vector<double> a = advection_velocity(0.0, 5);
  const std::vector<double> expect{1.25, 2.5, 3.75, 5.0, 6.25};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a[i], expect[i], 1e-14);
  for (double v : advection_displacement(0.0, 5)) EXPECT_EQ(v, 0.0);
}

TEST(Advection, DisplacementIsIntegralOfVelocity) {
  for (double t : {0.3, 1.0, 2.7}) {
    const std::vector<double> s = advection_displacement(t, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      // composite Simpson on 2000 panels
      const int n = 2000;
      double acc = advection_velocity(0.0, 5)[i] + advection_velocity(t, 5)[i];
      for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * advection_velocity(t * k / n, 5)[i];
      EXPECT_NEAR(s[i], acc * t / (3.0 * n), 1e-9);
    }
  }
}

TEST(Advection, SetupValues) {
  const ProblemDef p = advection_problem();
  EXPECT_EQ(p.dim(), 5u);
  EXPECT_EQ(p.param_count(), 345u);
  ASSERT_EQ(p.penalties.size(), 1u);
  EXPECT_DOUBLE_EQ(p.penalties[0].weight, 1e2);
  EXPECT_EQ(p.penalties[0].points[0], std::vector<double>(5, 0.0));
  ASSERT_EQ(p.rhs.orders.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(p.rhs.orders[i], (DerivOrder{i, 1}));
}

TEST(Advection, AnalyticAtZeroIsInitialCondition) {
  const ProblemDef p = advection_problem();
  Stream s(32);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> x = ngtest::uniform_point(p.domain, s);
    EXPECT_EQ(p.analytic(0.0, x), p.initial_condition(x));
  }
}

TEST(Advection, AnalyticSatisfiesPde) {
  const ProblemDef p = advection_problem();
  Stream s(33);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = ngtest::uniform_vector(1, 0.0, 3.0, s)[0];
    const std::vector<double> x = ngtest::uniform_point(p.domain, s);
    const std::vector<double> a = advection_velocity(t, 5);
    double r = ngtest::stencil([&](double tt) { return p.analytic(tt, x); }, t, 1e-3, 1);
    for (std::size_t i = 0; i < 5; ++i) {
      r += a[i] * ngtest::stencil(
                      [&](double xi) {
                        std::vector<double> y = x;
                        y[i] = xi;
                        return p.analytic(t, y);
                      },
                      x[i], 1e-3, 1);
    }
    worst = std::max(worst, std::abs(r));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Advection, MixtureSamplerMatchesMoments) {
  const GaussianMixture mix = advection_initial_mixture(5);
  Stream s(34);
  const std::size_t n = 40000;
  std::vector<double> mean(5, 0.0);
  std::vector<double> draw(5);
  for (std::size_t k = 0; k < n; ++k) {
    mix.sample(s, draw);
    for (std::size_t i = 0; i < 5; ++i) mean[i] += draw[i] / n;
  }
  // Mass of an unnormalized wave is proportional to sqrt(det Sigma).
  std::vector<double> w;
  for (const auto& var : mix.variances) {
    double det = 1.0;
    for (double v : var) det *= v;
    w.push_back(std::sqrt(det));
  }
  const double total = w[0] + w[1];
  for (std::size_t i = 0; i < 5; ++i) {
    const double expect = (w[0] * mix.means[0][i] + w[1] * mix.means[1][i]) / total;
    EXPECT_NEAR(mean[i], expect, 0.05);
  }
}

TEST(FokkerPlanck, ClosedFormValues) {
  EXPECT_NEAR(fp_one_body(0.0, 0.0), 5.0 * std::cbrt(10.0) / 4.0 * 1.5, 1e-14);
  EXPECT_NEAR(fp_one_body(0.0, 0.0), 4.0396, 1e-4);
  EXPECT_NEAR(fp_one_body(0.5, 1.0), 5.0 * std::cbrt(10.0) / 4.0 * 2.5 - 1.0, 1e-14);
  for (double x : {-2.0, 0.0, 3.3}) EXPECT_EQ(fp_interaction(x, x, 8), 0.0);
  EXPECT_DOUBLE_EQ(fp_interaction(1.0, 5.0, 2), 1.0);
  EXPECT_DOUBLE_EQ(fp_interaction(5.0, 1.0, 2), -1.0);
}

TEST(FokkerPlanck, InitialMean) {
  const std::vector<double> m = fp_initial_mean(8);
  EXPECT_DOUBLE_EQ(m.front(), 2.9);
  EXPECT_NEAR(m.back(), 5.0, 1e-14);
  EXPECT_NEAR(m[1] - m[0], 0.3, 1e-14);
  EXPECT_THROW(fp_initial_mean(1), std::invalid_argument);
  EXPECT_THROW(fokker_planck_problem(1), std::invalid_argument);
}

TEST(FokkerPlanck, SetupValues) {
  const ProblemDef p = fokker_planck_problem(8);
  EXPECT_EQ(p.dim(), 8u);
  EXPECT_EQ(p.domain.lower, std::vector<double>(8, -3.0));
  EXPECT_EQ(p.domain.upper, std::vector<double>(8, 11.0));
  EXPECT_TRUE(p.penalties.empty());
  EXPECT_EQ(p.param_count(), 1230u);
  ASSERT_EQ(p.rhs.orders.size(), 16u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(p.rhs.orders[2 * i], (DerivOrder{i, 1}));
    EXPECT_EQ(p.rhs.orders[2 * i + 1], (DerivOrder{i, 2}));
  }
}

TEST(FokkerPlanck, RhsMatchesDivergenceForm) {
  // f = sum_i -d_i(u h_i) + D d_ii u against stencils of an explicit u.
  const std::size_t d = 3;
  const ProblemDef p = fokker_planck_problem(d);
  auto u = [](std::span<const double> x) {
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) q += (x[i] - 3.0 - 0.5 * i) * (x[i] - 3.0 - 0.5 * i);
    return std::exp(-q);
  };
  auto h = [&](double t, std::span<const double> x, std::size_t i) {
    double acc = fp_one_body(t, x[i]);
    for (std::size_t j = 0; j < x.size(); ++j) acc += fp_interaction(x[i], x[j], d);
    return acc;
  };
  Stream s(35);
  for (int rep = 0; rep < 10; ++rep) {
    const double t = 0.37;
    const std::vector<double> x = ngtest::uniform_vector(d, 2.0, 5.0, s);
    std::vector<double> derivs;
    double expect = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      auto along = [&](auto fn) {
        return [&, fn](double xi) {
          std::vector<double> y = x;
          y[i] = xi;
          return fn(y);
        };
      };
      auto uf = along([&](std::span<const double> y) { return u(y); });
      auto flux = along([&](std::span<const double> y) { return u(y) * h(t, y, i); });
      derivs.push_back(ngtest::stencil(uf, x[i], 1e-3, 1));
      derivs.push_back(ngtest::stencil(uf, x[i], 1e-3, 2));
      expect += -ngtest::stencil(flux, x[i], 1e-3, 1) + kFokkerPlanckDiffusion * derivs.back();
    }
    EXPECT_NEAR(p.rhs.eval(t, x, u(x), derivs), expect, 1e-8);
  }
}

TEST(FokkerPlanck, RhsConservesMassInOneDimension) {
  FokkerPlanckOptions opt;
  opt.d = 1;
  opt.initial_mean = std::vector<double>{3.5};
  const ProblemDef p = fokker_planck_problem(opt);
  const double c = 4.0, w = 0.5;
  const int n = 20000;
  const double lo = p.domain.lower[0], hi = p.domain.upper[0], dx = (hi - lo) / n;
  double integral = 0.0, mass = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double x = lo + k * dx;
    const double z = (x - c) / w;
    const double u = std::exp(-0.5 * z * z);
    const std::vector<double> derivs{-z / w * u, (z * z - 1.0) / (w * w) * u};
    const double wt = (k == 0 || k == n) ? 0.5 : 1.0;
    integral += wt * dx * p.rhs.eval(0.2, std::vector<double>{x}, u, derivs);
    mass += wt * dx * u;
  }
  EXPECT_LT(std::abs(integral) / mass, 1e-10);
}

TEST(ProblemByName, KnownAndUnknown) {
  EXPECT_EQ(problem_by_name("kdv").name, "kdv");
  EXPECT_EQ(problem_by_name("advection5d").dim(), 5u);
  EXPECT_EQ(problem_by_name("fokker_planck", 2).dim(), 2u);
  EXPECT_THROW(problem_by_name("heat"), std::invalid_argument);
}

TEST(Boundary, PenaltyPointsLieOnBoundary) {
  for (const ProblemDef& p : {kdv_problem(), advection_problem()}) {
    for (const BoundaryPenalty& pen : p.penalties) {
      for (const auto& x : pen.points) {
        bool on_face = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
          on_face = on_face || x[i] == p.domain.lower[i] || x[i] == p.domain.upper[i];
        }
        EXPECT_TRUE(on_face);
      }
    }
  }
}

TEST(Residual, AffinePlugIn) {
  const ProblemDef p = affine_problem(1.0);
  const std::vector<double> theta{0.0, 0.0};
  const std::vector<double> dtheta{1.0, 2.0};
  EXPECT_DOUBLE_EQ(combined_residual(p, theta, dtheta, 0.0, std::vector<double>{1.0}), 2.0);
  EXPECT_DOUBLE_EQ(boundary_residual(p, theta, dtheta, 0.0), 0.0);
}

TEST(Residual, ZeroUpdateGivesMinusRhs) {
  const ProblemDef p = kdv_problem();
  Stream s(36);
  const std::vector<double> theta = random_theta(p, s);
  const std::vector<double> zero(45, 0.0);
  for (double x : {-3.0, 0.5, 12.0}) {
    const std::vector<double> xs{x};
    EXPECT_DOUBLE_EQ(combined_residual(p, theta, zero, 0.1, xs), -rhs_at(p, theta, 0.1, xs));
  }
}

TEST(Residual, CombinedIsSumOfParts) {
  const ProblemDef p = kdv_problem();
  Stream s(37);
  const std::vector<double> theta = random_theta(p, s);
  const std::vector<double> dtheta = random_theta(p, s);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> x = ngtest::uniform_point(p.domain, s);
    const double whole = combined_residual(p, theta, dtheta, 0.2, x);
    const double parts = interior_residual(p, theta, dtheta, 0.2, x) + boundary_residual(p, theta, dtheta, 0.2);
    EXPECT_LE(std::abs(whole - parts), 1e-12 * std::max(1.0, std::abs(whole)));
    double manual = -rhs_at(p, theta, 0.2, x);
    const std::vector<double> g = p.param->grad_theta(theta, x);
    for (std::size_t j = 0; j < g.size(); ++j) manual += g[j] * dtheta[j];
    EXPECT_NEAR(interior_residual(p, theta, dtheta, 0.2, x), manual, 1e-12 * std::max(1.0, std::abs(manual)));
  }
}

TEST(Residual, AffineInUpdate) {
  Stream s(38);
  for (const ProblemDef& p : {kdv_problem(), advection_problem(), fokker_planck_problem(2)}) {
    const std::vector<double> theta = random_theta(p, s);
    const std::vector<double> a = random_theta(p, s);
    const std::vector<double> b = random_theta(p, s);
    std::vector<double> ab(a.size()), zero(a.size(), 0.0);
    for (std::size_t j = 0; j < a.size(); ++j) ab[j] = a[j] + b[j];
    const std::vector<double> x = ngtest::uniform_point(p.domain, s);
    const double r0 = combined_residual(p, theta, zero, 0.4, x);
    const double ra = combined_residual(p, theta, a, 0.4, x) - r0;
    const double rb = combined_residual(p, theta, b, 0.4, x) - r0;
    const double rab = combined_residual(p, theta, ab, 0.4, x) - r0;
    EXPECT_NEAR(rab, ra + rb, 1e-9 * std::max({1.0, std::abs(ra), std::abs(rb)})) << p.name;
  }
}

TEST(Residual, DualRhsAgreesWithScalar) {
  Stream s(39);
  for (const ProblemDef& p : {kdv_problem(), advection_problem(), fokker_planck_problem(3)}) {
    const std::vector<double> theta = random_theta(p, s);
    const std::vector<double> x = ngtest::uniform_point(p.domain, s);
    std::vector<double> derivs = p.param->spatial_derivs(theta, x, p.rhs.orders);
    const double u = p.param->eval(theta, x);
    std::vector<Dual> xd(x.begin(), x.end()), dd(derivs.begin(), derivs.end());
    const Dual fd = p.rhs.eval_dual(0.3, xd, Dual(u), dd);
    EXPECT_DOUBLE_EQ(fd.c[0], p.rhs.eval(0.3, x, u, derivs)) << p.name;
  }
}

TEST(Residual, GradientMatchesFiniteDifferences) {
  Stream s(40);
  for (const ProblemDef& p : {kdv_problem(), advection_problem(), fokker_planck_problem(2)}) {
    for (int rep = 0; rep < 5; ++rep) {
      const std::vector<double> theta = random_theta(p, s);
      const std::vector<double> dtheta = random_theta(p, s);
      std::vector<double> x = ngtest::uniform_point(p.domain, s);
      std::vector<double> grad(p.dim());
      const double r = residual_gradient(p, theta, dtheta, 0.25, x, grad);
      EXPECT_DOUBLE_EQ(r, interior_residual(p, theta, dtheta, 0.25, x));
      std::vector<double> fd(p.dim());
      for (std::size_t j = 0; j < p.dim(); ++j) {
        fd[j] = ngtest::central_diff(
            [&](std::span<const double> y) { return interior_residual(p, theta, dtheta, 0.25, y); }, x, j, 1e-5);
      }
      EXPECT_LT(rel_error(grad, fd), 1e-5) << p.name;
    }
  }
}

TEST(Residual, DimensionMismatchThrows) {
  const ProblemDef p = kdv_problem();
  const std::vector<double> theta(45, 0.1);
  EXPECT_THROW(combined_residual(p, theta, std::vector<double>(44, 0.0), 0.0, std::vector<double>{0.0}),
               DimensionError);
}
