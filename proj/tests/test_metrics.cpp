#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ngalerkin/metrics.hpp"
#include "test_support.hpp"

using namespace ngalerkin;

namespace {

double gaussian_pdf(std::span<const double> x, std::span<const double> mean, double var) {
  double q = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) q += (x[j] - mean[j]) * (x[j] - mean[j]);
  return std::exp(-0.5 * q / var) / std::pow(2.0 * std::numbers::pi * var, 0.5 * x.size());
}

GaussianBias isotropic(const std::vector<double>& mean, double var) {
  GaussianBias b;
  b.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  b.covariance = var * Eigen::MatrixXd::Identity(b.mean.size(), b.mean.size());
  return b;
}

std::vector<double> normal_samples(std::size_t n, std::size_t d, double scale, std::uint64_t seed) {
  Stream s(seed);
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> xs(n * d);
  for (double& v : xs) v = nd(s);
  return xs;
}

SdeModel linear_model(std::size_t d, double diffusion, bool drift, bool interaction) {
  SdeModel m;
  m.d = d;
  m.diffusion = diffusion;
  m.one_body = [drift](double, double x) { return drift ? -x : 0.0; };
  m.interaction = [interaction, d](double x, double y) { return interaction ? fp_interaction(x, y, d) : 0.0; };
  m.initial_mean.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) m.initial_mean[j] = 1.0 + j;
  m.initial_variance = 0.0;
  return m;
}

}  // namespace

TEST(RelativeL2, IdentityAndHomogeneity) {
  const DomainBox box({-1.0}, {2.0});
  const ScalarField u = [](std::span<const double> x) { return std::sin(3 * x[0]) + 0.2; };
  EXPECT_LT(relative_l2(u, u, box, Quadrature::grid(1001)), 1e-12);
  for (double c : {1.1, 0.5, 3.0}) {
    const ScalarField cu = [&](std::span<const double> x) { return c * u(x); };
    EXPECT_NEAR(relative_l2(cu, u, box, Quadrature::grid(1001)), std::abs(c - 1.0), 1e-14);
    EXPECT_NEAR(relative_l2(cu, u, DomainBox::cube(3, 0.0, 1.0), Quadrature::mc(500, 3)), std::abs(c - 1.0), 1e-14);
  }
}

TEST(RelativeL2, PythagorasOnGrid) {
  // cos is orthogonal to sin on the periodic trapezoid grid
  const DomainBox box({0.0}, {2.0 * std::numbers::pi});
  const ScalarField u = [](std::span<const double> x) { return std::sin(x[0]); };
  const double c = 0.3;
  const ScalarField v = [&](std::span<const double> x) { return std::sin(x[0]) + c * std::cos(2 * x[0]); };
  EXPECT_NEAR(relative_l2(v, u, box, Quadrature::grid(257)), c, 1e-10);
}

TEST(RelativeL2, ProblemOverloads) {
  ProblemDef p = kdv_problem();
  const std::vector<double> theta = init_parameters(*p.network, 1);
  const double e = relative_l2(p, theta, 0.0, Quadrature::grid(2001));
  EXPECT_GT(e, 0.0);
  EXPECT_TRUE(std::isfinite(e));
  p.analytic = nullptr;
  EXPECT_THROW(relative_l2(p, theta, 0.0, Quadrature::grid(11)), MissingAnalytic);
}

TEST(Marginal, ConstantOnAdvectionBox) {
  const DomainBox box = DomainBox::cube(5, 0.0, 10.0);
  const McEstimate m = marginal([](std::span<const double>) { return 1.0; }, box, 2, 3.3, 1000, 4);
  EXPECT_NEAR(m.value, 1e4, 1e-9);
  EXPECT_NEAR(m.std_error, 0.0, 1e-9);
}

TEST(Marginal, SeparableClosedForm) {
  const DomainBox box = DomainBox::cube(3, 0.0, 1.0);
  // f = g(x_0) * x_1 * x_2^2, integral of the rest = 1/6
  const ScalarField f = [](std::span<const double> x) { return std::cos(x[0]) * x[1] * x[2] * x[2]; };
  const McEstimate m = marginal(f, box, 0, 0.4, 20000, 5);
  EXPECT_NEAR(m.value, std::cos(0.4) / 6.0, 3.0 * m.std_error);
  EXPECT_GT(m.std_error, 0.0);
}

TEST(Marginal, GaussianMixtureClosedForm) {
  const ProblemDef p = advection_problem();
  const GaussianMixture mix = advection_initial_mixture(5);
  const std::size_t axis = 1;
  for (double x : {2.0, 4.5}) {
    double expect = 0.0;
    for (std::size_t k = 0; k < mix.means.size(); ++k) {
      double w = std::exp(-0.5 * (x - mix.means[k][axis]) * (x - mix.means[k][axis]) / mix.variances[k][axis]);
      for (std::size_t j = 0; j < 5; ++j) {
        if (j == axis) continue;
        const double s = std::sqrt(mix.variances[k][j]);
        // integral of exp(-(y - mu)^2 / (2 s^2)) over [0, 10]
        w *= s * std::sqrt(std::numbers::pi / 2) *
             (std::erf((10.0 - mix.means[k][j]) / (s * std::sqrt(2.0))) - std::erf(-mix.means[k][j] / (s * std::sqrt(2.0))));
      }
      expect += w;
    }
    const McEstimate m = marginal(p.initial_condition, p.domain, axis, x, 200000, 6);
    EXPECT_NEAR(m.value, expect, 3.0 * m.std_error) << x;
  }
}

TEST(Snis, GaussianIdentity) {
  const std::vector<double> mu{1.0, -2.0, 0.5};
  const GaussianBias bias = isotropic(mu, 0.3);
  const ScalarField f = [&](std::span<const double> x) { return gaussian_pdf(x, mu, 0.3); };
  const std::size_t n = 20000;
  const MomentEstimate m = snis_moments(f, bias, n, 7);
  EXPECT_NEAR(m.ess, double(n), 1e-6 * n);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(m.mean[j], mu[j], 3.0 * m.mean_std_error[j]);
    EXPECT_NEAR(m.covariance(j, j), 0.3, 3.0 * 0.3 * std::sqrt(2.0 / n));
  }
  EXPECT_LE((m.covariance - m.covariance.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Snis, ScaleInvariant) {
  const std::vector<double> mu{0.0, 0.0};
  const GaussianBias bias = isotropic(mu, 1.0);
  const ScalarField f = [](std::span<const double> x) { return std::exp(-std::abs(x[0]) - 0.5 * x[1] * x[1]); };
  const ScalarField g = [&](std::span<const double> x) { return 7.0 * f(x); };
  const MomentEstimate a = snis_moments(f, bias, 5000, 8);
  const MomentEstimate b = snis_moments(g, bias, 5000, 8);
  EXPECT_LT((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((a.covariance - b.covariance).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(a.ess, b.ess, 1e-9);
  EXPECT_LT(a.ess, 5000.0);
  const EntropyEstimate ea = snis_entropy(f, bias, 5000, 8);
  const EntropyEstimate eb = snis_entropy(g, bias, 5000, 8);
  EXPECT_NEAR(ea.value, eb.value, 1e-12);
  EXPECT_NEAR(eb.normalizer, 7.0 * ea.normalizer, 1e-12 * eb.normalizer);
}

TEST(Snis, ZeroWeightsThrow) {
  const GaussianBias bias = isotropic({0.0}, 1.0);
  EXPECT_THROW(snis_moments([](std::span<const double>) { return 0.0; }, bias, 100, 9), ZeroWeights);
  EXPECT_THROW(snis_moments([](std::span<const double>) { return -1.0; }, bias, 100, 9), ZeroWeights);
}

TEST(Snis, EntropyOfGaussian) {
  const std::size_t d = 8;
  const std::vector<double> mu = fp_initial_mean(d);
  const GaussianBias bias = isotropic(mu, 0.1);
  // unnormalized on purpose
  const ScalarField f = [&](std::span<const double> x) { return 3.0 * gaussian_pdf(x, mu, 0.1); };
  const EntropyEstimate e = snis_entropy(f, bias, 100000, 10);
  const double exact = 0.5 * d * std::log(2.0 * std::numbers::pi * std::numbers::e * 0.1);
  EXPECT_NEAR(e.value, exact, 3.0 * e.std_error + 1e-12);
  EXPECT_NEAR(e.normalizer, 3.0, 1e-9);
}

TEST(Snis, EntropyOfUniformIsZero) {
  const GaussianBias bias = isotropic({0.5}, 0.25);
  const ScalarField f = [](std::span<const double> x) { return x[0] >= 0.0 && x[0] <= 1.0 ? 1.0 : 0.0; };
  const EntropyEstimate e = snis_entropy(f, bias, 50000, 11);
  EXPECT_NEAR(e.value, 0.0, 3.0 * e.std_error + 1e-12);
  EXPECT_NEAR(e.normalizer, 1.0, 0.02);
}

TEST(EulerMaruyama, LinearDecay) {
  const SdeModel m = linear_model(3, 0.0, true, false);
  const PathBundle b = euler_maruyama(m, 100, 1e-3, {0.0, 0.5, 1.0}, 12);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double exact = m.initial_mean[j] * std::exp(-b.times[k]);
      EXPECT_LT(std::abs(b.states[k][j] - exact), 0.01 * exact);
    }
  }
}

TEST(EulerMaruyama, BrownianVariance) {
  const SdeModel m = linear_model(2, 0.5, false, false);
  const std::size_t n = 10000;
  const PathBundle b = euler_maruyama(m, n, 1e-2, {1.0}, 13);
  const MomentEstimate est = mc_moments(b, 1.0);
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(est.covariance(j, j), 1.0, 3.0 * std::sqrt(2.0 / n));
  EXPECT_EQ(est.ess, double(n));
}

TEST(EulerMaruyama, InteractionConservesMean) {
  const SdeModel m = linear_model(4, 0.0, false, true);
  const PathBundle b = euler_maruyama(m, 5, 1e-2, {0.0, 2.0}, 14);
  for (std::size_t p = 0; p < 5; ++p) {
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      s0 += b.states[0][p * 4 + j];
      s1 += b.states[1][p * 4 + j];
    }
    EXPECT_NEAR(s1, s0, 1e-12);
  }
}

TEST(EulerMaruyama, BitReproducibleAndThreadIndependent) {
  const SdeModel m = fokker_planck_sde(3);
  const PathBundle a = euler_maruyama(m, 200, 1e-3, {0.1, 0.2}, 15, Exec::parallel);
  const PathBundle b = euler_maruyama(m, 200, 1e-3, {0.1, 0.2}, 15, Exec::serial);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(euler_maruyama(m, 200, 1e-3, {0.1}, 16).states[0], a.states[0]);
}

TEST(EulerMaruyama, StandardErrorHalvesWithFourfoldPaths) {
  const SdeModel m = linear_model(1, 0.5, true, false);
  std::vector<double> xs, ys;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    const MomentEstimate e = mc_moments(euler_maruyama(m, n, 1e-2, {0.5}, 17), 0.5);
    xs.push_back(std::log(double(n)));
    ys.push_back(std::log(e.mean_std_error[0]));
  }
  const double slope = (ys[2] - ys[0]) / (xs[2] - xs[0]);
  EXPECT_NEAR(slope, -0.5, 0.1);
}

TEST(EulerMaruyama, FokkerPlanckModelMatchesProblem) {
  const SdeModel m = fokker_planck_sde(8);
  EXPECT_EQ(m.initial_mean, fp_initial_mean(8));
  EXPECT_DOUBLE_EQ(m.initial_variance, 0.1);
  EXPECT_DOUBLE_EQ(m.diffusion, kFokkerPlanckDiffusion);
  EXPECT_DOUBLE_EQ(m.one_body(0.3, 1.2), fp_one_body(0.3, 1.2));
  EXPECT_DOUBLE_EQ(m.interaction(1.0, 2.5), fp_interaction(1.0, 2.5, 8));
}

TEST(MonteCarloMoments, Degenerate) {
  PathBundle b;
  b.n_paths = 3;
  b.d = 2;
  b.times = {0.0};
  b.states = {{1.0, 2.0, 1.0, 2.0, 1.0, 2.0}};
  const MomentEstimate e = mc_moments(b, 0.0);
  EXPECT_EQ(e.covariance, Eigen::MatrixXd::Zero(2, 2));
  EXPECT_THROW(mc_moments(b, 0.5), std::invalid_argument);
  b.n_paths = 1;
  b.states = {{1.0, 2.0}};
  EXPECT_THROW(mc_moments(b, 0.0), std::invalid_argument);
}

TEST(MonteCarloMoments, StandardNormalCltBounds) {
  const std::size_t n = 20000;
  const std::vector<double> xs = normal_samples(n, 2, 1.0, 18);
  const MomentEstimate e = sample_moments(xs, 2);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(e.mean[j], 0.0, 3.0 / std::sqrt(double(n)));
    EXPECT_NEAR(e.covariance(j, j), 1.0, 3.0 * std::sqrt(2.0 / n));
  }
}

TEST(Kde, StandardNormalEntropy) {
  const std::vector<double> xs = normal_samples(20000, 1, 1.0, 19);
  const double h = kde_entropy(xs, 1, KdeBandwidth::silverman());
  EXPECT_NEAR(h, 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e), 0.05 * 1.4189);
}

TEST(Kde, ScalingLaw) {
  const std::vector<double> xs = normal_samples(5000, 2, 1.0, 20);
  std::vector<double> ys = xs;
  for (double& v : ys) v *= 3.0;
  const double a = kde_entropy(xs, 2, KdeBandwidth::silverman());
  const double b = kde_entropy(ys, 2, KdeBandwidth::silverman());
  // Silverman's rule scales with the data, so the shift is exact up to rounding
  EXPECT_NEAR(b - a, 2.0 * std::log(3.0), 1e-9);
}

TEST(Kde, PermutationInvariantAndDegenerate) {
  const std::vector<double> xs = normal_samples(300, 3, 1.0, 21);
  std::vector<double> rev(xs.size());
  for (std::size_t i = 0; i < 300; ++i) std::copy_n(xs.begin() + 3 * i, 3, rev.begin() + 3 * (299 - i));
  EXPECT_EQ(kde_entropy(xs, 3, KdeBandwidth::silverman()), kde_entropy(rev, 3, KdeBandwidth::silverman()));
  EXPECT_EQ(kde_entropy(xs, 3, KdeBandwidth::fixed(0.3), Exec::serial),
            kde_entropy(xs, 3, KdeBandwidth::fixed(0.3), Exec::parallel));
  EXPECT_THROW(kde_entropy(std::vector<double>{1.0, 1.0}, 1, KdeBandwidth::silverman()), std::domain_error);
}

TEST(MomentErrors, Arithmetic) {
  MomentEstimate bench;
  bench.mean = Eigen::Vector2d(2.0, -4.0);
  bench.covariance = (Eigen::Matrix2d() << 1.0, 0.0, 0.0, 0.5).finished();
  MomentEstimate same = bench;
  MomentErrors z = relative_moment_errors(same, bench);
  EXPECT_EQ(z.mean.max, 0.0);
  EXPECT_EQ(z.cov.max, 0.0);

  MomentEstimate scaled = bench;
  scaled.mean *= 1.1;
  scaled.covariance.diagonal() *= 1.1;
  const MomentErrors e = relative_moment_errors(scaled, bench);
  EXPECT_NEAR(e.mean_rel[0], 0.1, 1e-14);
  EXPECT_NEAR(e.mean_rel[1], 0.1, 1e-14);
  EXPECT_NEAR(e.cov_diag_rel[1], 0.1, 1e-14);
  EXPECT_NEAR(e.mean.avg, 0.1, 1e-14);

  MomentEstimate hand = bench;
  hand.mean = Eigen::Vector2d(2.5, -3.0);
  hand.covariance = (Eigen::Matrix2d() << 0.8, 0.2, 0.2, 0.5).finished();
  const MomentErrors h = relative_moment_errors(hand, bench);
  EXPECT_DOUBLE_EQ(h.mean_rel[0], 0.25);
  EXPECT_DOUBLE_EQ(h.mean_rel[1], 0.25);
  EXPECT_NEAR(h.cov_diag_rel[0], 0.2, 1e-15);
  EXPECT_EQ(h.cov_diag_rel[1], 0.0);
  EXPECT_TRUE(h.cov_absolute[1]);
  EXPECT_FALSE(h.cov_absolute[0]);
  EXPECT_NEAR(h.cov_rel(0, 1), 0.2, 1e-15);
  EXPECT_NEAR(h.cov_diag.min, 0.0, 1e-15);
  EXPECT_NEAR(h.cov_diag.max, 0.2, 1e-15);
  EXPECT_NEAR(h.cov_diag.avg, 0.1, 1e-15);
}
