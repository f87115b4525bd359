#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "balayage/coulomb.hpp"

using namespace balayage;
using std::numbers::pi;

namespace {

McConfig config(std::size_t n, std::uint64_t seed = 1) {
  McConfig cfg;
  cfg.n_walks = n;
  cfg.seed = seed;
  cfg.eps_shell = 1e-9;
  return cfg;
}

// Mean and standard error of the batch means of a chain trace.
std::pair<double, double> batch_mean(const std::vector<double>& trace, std::size_t batches) {
  const std::size_t len = trace.size() / batches;
  std::vector<double> means;
  for (std::size_t k = 0; k < batches; ++k) {
    double s = 0;
    for (std::size_t i = k * len; i < (k + 1) * len; ++i) s += trace[i];
    means.push_back(s / len);
  }
  double m = 0, v = 0;
  for (double x : means) m += x;
  m /= batches;
  for (double x : means) v += (x - m) * (x - m);
  return {m, std::sqrt(v / (batches - 1) / batches)};
}

}  // namespace

TEST(Equilibrium, DensityExamples) {
  EXPECT_NEAR(equilibrium_density(1, {0.3, 0.2}), 1 / pi, 1e-15);
  EXPECT_NEAR(equilibrium_density(1, {0, 0}), 1 / pi, 1e-15);
  EXPECT_EQ(equilibrium_density(1, {1.01, 0}), 0.0);
  EXPECT_TRUE(std::isinf(equilibrium_density(0.5, {0, 0})));
  EXPECT_EQ(equilibrium_density(2, {0, 0}), 0.0);
  EXPECT_NEAR(equilibrium_radius(1), 1.0, 1e-15);
  EXPECT_NEAR(equilibrium_radius(0.5), 2.0, 1e-15);
  EXPECT_EQ(equilibrium_density(2, {1.2 * equilibrium_radius(2), 0}), 0.0);
  EXPECT_THROW(equilibrium_density(0, {1, 0}), ConfigError);
}

TEST(Equilibrium, TotalMassIsOne) {
  for (double b : {1.0 / 3, 0.5, 1.0, 2.0, 0.7}) {
    const double s0 = equilibrium_radius(b);
    // Substituting r = s0 t^{1/(2b)} removes the endpoint singularity.
    const double mass = integrate(
        [&](double t) {
          const double r = s0 * std::pow(t, 1 / (2 * b));
          const double dr = s0 / (2 * b) * std::pow(t, 1 / (2 * b) - 1);
          return equilibrium_density(b, {r, 0}) * 2 * pi * r * dr;
        },
        0, 1, 1e-13, 20);
    EXPECT_NEAR(mass, 1.0, 1e-8) << b;
  }
}

TEST(HardWall, ConstructionAndInnerMass) {
  EXPECT_THROW(HardWallProblem(1, make_sector(0.4, 1.0)), ConfigError);
  const auto p = sector_wall(1, 0.4);
  EXPECT_NEAR(p.s0_radius, 1.0, 1e-15);
  const double a = 0.8;
  for (double b : {1.0 / 3, 0.5, 1.0, 2.0}) {
    const auto q = sector_wall(b, 0.4);
    const double aa = 0.8 * equilibrium_radius(b);
    EXPECT_NEAR(q.inner_measure().total_mass(), 0.4 * b * std::pow(aa, 2 * b) / 2, 1e-10) << b;
  }
  EXPECT_NEAR(p.inner_measure().total_mass(), 0.4 * a * a / 2, 1e-12);
}

TEST(HardWall, ProfileTotalAndShape) {
  const auto p = sector_wall(1, 0.4);
  const auto prof = wall_profile(p, config(40000), 32);
  ASSERT_EQ(prof.density.size(), 32u);
  const double perimeter = 2 * 0.8 + 0.8 * 0.4 * pi;
  EXPECT_NEAR(prof.perimeter, perimeter, 1e-12);
  double sum = 0, norm = 0;
  for (std::size_t k = 0; k < 32; ++k) {
    EXPECT_GE(prof.density[k], 0.0);
    EXPECT_GE(prof.std_error[k], 0.0);
    sum += prof.density[k] * prof.bin_width;
    norm += prof.normalized[k] * prof.bin_width;
  }
  EXPECT_NEAR(sum, p.inner_measure().total_mass(), 1e-12);
  EXPECT_NEAR(norm, 1.0, 1e-12);
  // The wedge is symmetric about its bisector, so the profile is symmetric in s.
  for (std::size_t k = 0; k < 16; ++k) {
    const double d = prof.density[k] - prof.density[31 - k];
    EXPECT_LT(std::abs(d), 4 * std::hypot(prof.std_error[k], prof.std_error[31 - k])) << k;
  }
}

TEST(HardWall, EdgeWindowAndInsufficientStatistics) {
  EXPECT_NEAR(edge_fit_upper(0.4, 0.5, 0.8, 0.03), 0.8 * std::pow(0.03, 1 / 1.5), 1e-14);
  EXPECT_NEAR(edge_fit_upper(0.4, 2.0, 1.0, 0.03), std::pow(0.03, 1 / 1.5), 1e-14);
  EXPECT_NEAR(edge_fit_upper(0.4, 0.25, 1.0, 0.5), 0.2, 1e-14);
  EXPECT_NEAR(edge_fit_upper(0.5, 1.0, 1.0, 0.03), 0.05, 1e-14);
  const auto report = edge_rate_check(sector_wall(2, 0.4), config(2000));
  EXPECT_FALSE(report.sufficient);
  EXPECT_FALSE(report.pass);
  EXPECT_FALSE(report.warning.empty());
  EXPECT_NEAR(report.expected, 1.5, 1e-15);
}

TEST(HardWall, EdgeRateHalf) {
  const auto report = edge_rate_check(sector_wall(0.5, 0.4), config(300000));
  EXPECT_TRUE(report.sufficient) << report.warning;
  EXPECT_NEAR(report.fit.exponent, 0.0, 0.07);
  EXPECT_TRUE(report.pass);
}

TEST(Gas, SecondMomentMatchesFiniteN) {
  GasConfig cfg;
  cfg.n = 64;
  cfg.sweeps = 4000;
  const auto res = gas_sampler(cfg);
  const auto [m, se] = batch_mean(res.mean_sq_radius, 10);
  const double expected = (64.0 + 1) / (2 * 64);
  EXPECT_NEAR(m, expected, 3 * se);
  EXPECT_GT(res.acceptance_rate, 0.1);
  EXPECT_LT(res.acceptance_rate, 0.6);
}

TEST(Gas, RadialDistributionFollowsCircularLaw) {
  GasConfig cfg;
  cfg.n = 128;
  cfg.sweeps = 2000;
  const auto res = gas_sampler(cfg);
  std::vector<double> r;
  for (const auto& z : res.points) r.push_back(std::abs(z));
  std::sort(r.begin(), r.end());
  double ks = 0;
  const double n = static_cast<double>(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double cdf = std::min(1.0, r[i] * r[i]);
    ks = std::max({ks, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
  }
  EXPECT_LT(ks, 0.05);
}

TEST(Gas, SingleParticleGibbs) {
  // n = 1: density proportional to exp(-beta |z|^{2b} / 2).
  GasConfig cfg;
  cfg.n = 1;
  cfg.b = 0.5;
  cfg.beta = 2;
  cfg.sweeps = 400000;
  const auto res = gas_sampler(cfg);
  const auto weight = [&](double r, double p) { return std::pow(r, p) * std::exp(-cfg.beta * std::pow(r, 2 * cfg.b) / 2); };
  const double num = integrate([&](double r) { return weight(r, 3); }, 0, 200, 1e-13, 30);
  const double den = integrate([&](double r) { return weight(r, 1); }, 0, 200, 1e-13, 30);
  const auto [m, se] = batch_mean(res.mean_sq_radius, 20);
  EXPECT_NEAR(m, num / den, 3 * se);
}

TEST(Gas, HardWallExcludesPoints) {
  GasConfig cfg;
  cfg.n = 64;
  cfg.sweeps = 400;
  cfg.wall = make_sector(0.4, 0.8);
  const auto res = gas_sampler(cfg);
  for (const auto& z : res.points) EXPECT_FALSE(cfg.wall->contains(z));
}

TEST(Gas, Validation) {
  GasConfig cfg;
  cfg.n = 513;
  EXPECT_THROW(gas_sampler(cfg), ConfigError);
  cfg.n = 4;
  cfg.beta = 0;
  EXPECT_THROW(gas_sampler(cfg), ConfigError);
}
