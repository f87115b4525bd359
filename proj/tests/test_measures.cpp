#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "balayage/measures.hpp"

using namespace balayage;
using std::numbers::pi;

namespace {

struct Moments {
  double mean = 0, se = 0;
};

Moments weight_moments(const std::vector<MeasureSample>& s) {
  double sum = 0, sum2 = 0;
  for (const auto& x : s) {
    sum += x.weight;
    sum2 += x.weight * x.weight;
  }
  const double n = static_cast<double>(s.size());
  const double mean = sum / n;
  return {mean, std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n)};
}

}  // namespace

TEST(Measures, SectorTotalMass) {
  for (double alpha : {0.25, 0.5, 1.0, 2.0}) {
    for (double b : {0.1, 0.25, 0.5, 1.0, 2.0}) {
      for (double a : {0.5, 1.0, 3.0}) {
        const auto mu = corner_measure(make_sector(alpha, a), b);
        const double exact = pi * alpha * std::pow(a, 2 * b) / (2 * b);
        EXPECT_NEAR(mu.total_mass(), exact, 1e-10 * exact) << alpha << " " << b << " " << a;
        EXPECT_NEAR(mu.mass_within(0.3 * a), exact * std::pow(0.3, 2 * b), 1e-10 * exact);
      }
    }
  }
}

TEST(Measures, DiskAndEquilibriumMass) {
  EXPECT_NEAR(RadialPowerMeasure(make_disk({0, 0}, 1.0), 1.0, {0, 0}).total_mass(), pi, 1e-12);
  for (double b : {1.0 / 3, 0.5, 1.0, 2.0}) {
    const double radius = std::pow(b, -1 / (2 * b));
    const RadialPowerMeasure mu(make_disk({0, 0}, radius), b, {0, 0}, Multiplier::constant(b * b / pi));
    EXPECT_NEAR(mu.total_mass(), 1.0, 1e-10);
  }
}

TEST(Measures, PerturbedWedgeMass) {
  const double alpha = 1, b = 0.25, kappa = 0.1, gamma = 0.4;
  const auto mu = corner_measure(make_perturbed_wedge(alpha, 1.0, 0.0, kappa, gamma), b);
  const double exact = pi * alpha / (2 * b) + kappa / (2 * b + gamma);
  EXPECT_NEAR(mu.total_mass(), exact, 1e-9 * exact);
}

TEST(Measures, ScalingCovariance) {
  const double b = 0.7;
  const double m1 = corner_measure(make_sector(0.5, 1.0), b).total_mass();
  const double m2 = corner_measure(make_sector(0.5, 2.5), b).total_mass();
  EXPECT_NEAR(m2, std::pow(2.5, 2 * b) * m1, 1e-11 * m2);
}

TEST(Measures, RadialCdfKolmogorovSmirnov) {
  const auto mu = corner_measure(make_sector(0.5, 1.0), 1.0);
  auto samples = mu.sample(100000, 42);
  std::vector<double> r;
  for (const auto& s : samples) r.push_back(std::abs(s.point));
  std::sort(r.begin(), r.end());
  double ks = 0;
  const double n = static_cast<double>(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double cdf = r[i] * r[i];
    ks = std::max({ks, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
  }
  EXPECT_LT(ks, 0.01);
}

TEST(Measures, SamplesInsideAndDeterministic) {
  const auto mu = corner_measure(make_perturbed_wedge(1.0, 1.0, 0.1, 0.05, 0.4), 0.5);
  EXPECT_TRUE(mu.sample(0, 1).empty());
  const auto a = mu.sample(5000, 9), b = mu.sample(5000, 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].point, b[i].point);
    EXPECT_EQ(a[i].weight, b[i].weight);
    EXPECT_TRUE(mu.domain().contains(a[i].point));
    EXPECT_GT(a[i].weight, 0.0);
  }
  EXPECT_EQ(mu.sample_one(9, 123).point, a[123].point);
  EXPECT_NE(mu.sample(10, 10)[0].point, a[0].point);
}

TEST(Measures, MassConservationUnderSampling) {
  const std::vector<RadialPowerMeasure> catalog{
      corner_measure(make_sector(0.5, 1.0), 0.25),
      corner_measure(make_sector(1.0, 1.0), 0.5, Multiplier::power(1.0, 0.5)),
      corner_measure(make_perturbed_wedge(1.0, 1.0, 0.0, 0.1, 0.4), 0.25, Multiplier::power(-0.5, 1.0)),
      corner_measure(make_sector(2.0, 1.0), 1.0, Multiplier::constant(2.0)),
      corner_measure(make_sector(0.5, 1.0), 1.0, {}, SamplingPlan{0.5, 0.05}),
      corner_measure(make_sector(0.4, 1.0), 2.0, {}, SamplingPlan{0.5, 0.05}),
      RadialPowerMeasure(make_disk({0, 0}, 1.0), 1.0, {0.2, 0.1}),
  };
  for (const auto& mu : catalog) {
    const auto m = weight_moments(mu.sample(100000, 5));
    const double ratio = mu.total_mass() / mu.reference_mass();
    EXPECT_NEAR(m.mean, ratio, 3 * m.se + 1e-12);
  }
}

TEST(Measures, ImportanceSamplingReproducesWindowMass) {
  // Window mass near the corner through the weighted sampler.
  const auto mu = corner_measure(make_sector(0.5, 1.0), 1.0, {}, SamplingPlan{0.5, 0.05});
  const auto samples = mu.sample(200000, 3);
  const double R = 1e-3;
  double sum = 0, sum2 = 0;
  for (const auto& s : samples) {
    const double v = std::abs(s.point) < R ? s.weight : 0.0;
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(samples.size());
  const double est = mu.reference_mass() * sum / n;
  const double se = mu.reference_mass() * std::sqrt((sum2 / n - (sum / n) * (sum / n)) / n);
  EXPECT_NEAR(est, mu.mass_within(R), 3 * se);
  EXPECT_LT(se, 0.05 * mu.mass_within(R));
}

TEST(Measures, OuterCap) {
  const auto domain = make_multi_wedge_disk({{0.0, 0.5}, {0.75 * pi, 0.25}}, 1.0, 0.5, 0.4);
  const RadialPowerMeasure plain(domain, 0.25, {0, 0});
  const RadialPowerMeasure capped(domain, 0.25, {0, 0}, {}, 0.1);
  const double inner = plain.mass_within(0.4);
  EXPECT_NEAR(capped.mass_within(0.4), inner, 1e-10);
  EXPECT_NEAR(capped.total_mass(), inner + 0.1, 1e-9);
}

TEST(Measures, OnePlusLittleO) {
  const auto sector = make_sector(1.0, 1.0);
  EXPECT_TRUE(corner_measure(sector, 0.5).verify_one_plus_o1(1e-6, 0.5, 5));
  EXPECT_TRUE(corner_measure(sector, 0.5, Multiplier::power(1.0, 0.5)).verify_one_plus_o1(0.1, 1e-4, 6));
  EXPECT_FALSE(corner_measure(sector, 0.5, Multiplier::power(1.0, 0.5)).verify_one_plus_o1(0.1, 0.5, 2));
  EXPECT_FALSE(corner_measure(sector, 0.5, Multiplier::constant(2.0)).verify_one_plus_o1(0.5, 0.1, 4));
  EXPECT_NEAR(Multiplier::power(1.0, 0.5).deviation(1e-4), 0.01, 1e-15);
}

TEST(Measures, Errors) {
  EXPECT_THROW(corner_measure(make_sector(1.0, 1.0), 0.0), ConfigError);
  EXPECT_THROW(corner_measure(make_sector(1.0, 1.0), -1.0), ConfigError);
  const RadialPowerMeasure far(make_disk({0.5, 0}, 1e-3), 1.0, {0, 0});
  EXPECT_THROW(far.sample(10, 1), NumericalError);
}
