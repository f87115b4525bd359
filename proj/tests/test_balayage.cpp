#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "balayage/balayage.hpp"
#include "balayage/sector_exact.hpp"

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

BalayageRun sector_run(double alpha, double b, std::size_t n, std::vector<double> radii = {}, std::uint64_t seed = 1) {
  return BalayageRun(corner_measure(make_sector(alpha, 1.0), b), config(n, seed), std::move(radii));
}

const std::vector<Point> kExterior{{0, -0.5}, {0.5, -0.6}, {-0.5, -0.6}, {1.5, 0.3},
                                   {-1.5, 0.3}, {0, 1.5},   {1.2, 1.2},   {-1.2, 1.2}};

}  // namespace

TEST(Balayage, RunValidatesRadii) {
  const auto mu = corner_measure(make_sector(1, 1), 0.25);
  EXPECT_THROW(BalayageRun(mu, config(10), {0.1, 0.05}), ConfigError);
  EXPECT_THROW(BalayageRun(mu, config(10), {0.0, 0.1}), ConfigError);
  EXPECT_THROW(BalayageRun(mu, config(10), {0.1, 0.1}), ConfigError);
  EXPECT_NO_THROW(BalayageRun(mu, config(10), {0.01, 0.1}));
}

TEST(Balayage, SectorWindowMassMatchesSeries) {
  const auto run = sector_run(1, 0.25, 40000, {0.05});
  const auto est = window_mass(run, 0.05);
  const double exact = sector_mass({1, 1, 0.25}, 0.05, 1e-14).value;
  EXPECT_NEAR(est.mean, exact, 3 * est.std_error);
}

TEST(Balayage, SectorCurveMatchesSeriesOnLogGrid) {
  std::vector<double> radii;
  for (int k = 0; k < 10; ++k) radii.push_back(0.01 * std::pow(90.0, k / 9.0));
  const auto run = sector_run(0.5, 0.5, 40000, radii, 3);
  const auto est = window_mass_curve(run);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double exact = sector_mass({0.5, 1, 0.5}, radii[i], 1e-14).value;
    EXPECT_NEAR(est[i].mean, exact, 3 * est[i].std_error) << "r = " << radii[i];
  }
}

TEST(Balayage, TrivialWindows) {
  const auto run = sector_run(1, 0.5, 5000);
  const auto nu = empirical_balayage(run);
  const auto est = window_masses(nu, {1e-12, 2.5}, run.domain().corner());
  EXPECT_EQ(est[0].mean, 0.0);
  EXPECT_NEAR(est[1].mean, run.measure.total_mass(), 1e-12);
  EXPECT_LT(est[1].std_error, 1e-12);
}

TEST(Balayage, MassConservedExactly) {
  for (double b : {0.25, 1.0, 2.0}) {
    const auto run = sector_run(1.5, b, 3000);
    const auto nu = empirical_balayage(run);
    double sum = 0.0;
    for (const auto& a : nu.atoms) sum += a.weight;
    EXPECT_NEAR(sum, nu.total, 1e-12 * nu.total);
    EXPECT_EQ(nu.total, run.measure.total_mass());
    EXPECT_EQ(nu.atoms.size() + nu.aborted, 3000u);
  }
}

TEST(Balayage, WindowMassesMonotone) {
  std::vector<double> radii;
  for (int k = 1; k <= 40; ++k) radii.push_back(0.025 * k);
  const auto run = sector_run(0.5, 0.25, 5000, radii);
  const auto est = window_mass_curve(run);
  for (std::size_t i = 1; i < est.size(); ++i) EXPECT_GE(est[i].mean, est[i - 1].mean);
}

TEST(Balayage, ExitsOnBoundary) {
  const auto nu = empirical_balayage(sector_run(0.75, 0.5, 2000));
  const auto domain = make_sector(0.75, 1.0);
  for (const auto& a : nu.atoms) {
    EXPECT_LT(domain.distance_to_boundary(a.point), 1e-8);
    EXPECT_TRUE(domain.contains(a.source));
  }
}

TEST(Balayage, PointMassProxyExitsUniformly) {
  const auto disk = make_disk({0, 0}, 1.0);
  const RadialPowerMeasure mu(disk, 1.0, {0, 0}, {}, std::nullopt, 1e-3);
  const auto nu = empirical_balayage(BalayageRun(mu, config(100000, 7)));
  std::vector<double> u;
  for (const auto& a : nu.atoms) u.push_back((std::arg(a.point) + pi) / (2 * pi));
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    ks = std::max({ks, std::abs(u[i] - i / n), std::abs(u[i] - (i + 1) / n)});
  }
  EXPECT_LT(ks, 0.01);
}

TEST(Balayage, DeterministicAcrossThreadCounts) {
  const auto run = sector_run(1, 0.25, 9000, {0.01, 0.1});
  set_threads(1);
  const auto a = empirical_balayage(run);
  set_threads(3);
  const auto b = empirical_balayage(run);
  set_threads(1);
  ASSERT_EQ(a.atoms.size(), b.atoms.size());
  for (std::size_t i = 0; i < a.atoms.size(); ++i) {
    EXPECT_EQ(a.atoms[i].point, b.atoms[i].point);
    EXPECT_EQ(a.atoms[i].weight, b.atoms[i].weight);
  }
}

TEST(Balayage, PotentialMatching) {
  const auto run = sector_run(1, 0.25, 50000, {}, 11);
  const auto nu = empirical_balayage(run);
  const auto diffs = potential_differences(run.domain(), nu, kExterior);
  ASSERT_EQ(diffs.size(), kExterior.size());
  for (const auto& d : diffs) EXPECT_LT(std::abs(d.mean), 4 * d.std_error);
  EXPECT_LT(potential_match(run.domain(), nu, kExterior), 2e-2);
}

TEST(Balayage, PotentialMatchingFarPointsAndEmptyCloud) {
  const auto run = sector_run(1, 0.25, 2000);
  const auto nu = empirical_balayage(run);
  EXPECT_LT(potential_match(run.domain(), nu, {{1e6, 1e6}}), 1e-5);
  EXPECT_EQ(potential_match(run.domain(), EmpiricalBoundaryMeasure{}, kExterior), 0.0);
}

TEST(Balayage, PotentialTestPointsValidated) {
  const auto run = sector_run(1, 0.25, 100);
  const auto nu = empirical_balayage(run);
  EXPECT_THROW(potential_match(run.domain(), nu, {{0, 0.5}}), ConfigError);
  EXPECT_THROW(potential_match(run.domain(), nu, {{0, -0.1}}), ConfigError);
}
