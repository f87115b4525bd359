#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "balayage/geometry.hpp"
#include "balayage/rng.hpp"

using namespace balayage;
using std::numbers::pi;

namespace {

double dense_distance(const Domain& d, Point z, int n = 200000) {
  double best = 1e300;
  for (const auto& arc : d.arcs()) {
    for (int k = 0; k <= n; ++k) best = std::min(best, std::abs(z - Domain::sample_arc(arc, double(k) / n)));
  }
  return best;
}

}  // namespace

TEST(Geometry, ContainsBasics) {
  const auto disk = make_disk({0, 0}, 1.0);
  EXPECT_TRUE(disk.contains({0, 0}));
  EXPECT_FALSE(disk.contains({1.5, 0}));

  const auto quarter = make_sector(0.5, 1.0);
  EXPECT_TRUE(quarter.contains(std::polar(0.5, pi / 4)));
  EXPECT_FALSE(quarter.contains(std::polar(0.5, -pi / 4)));
  EXPECT_FALSE(quarter.contains({0.9, 0.9}));
}

TEST(Geometry, DistanceExamples) {
  EXPECT_DOUBLE_EQ(make_disk({0, 0}, 1.0).distance_to_boundary({0, 0}), 1.0);
  const auto quarter = make_sector(0.5, 1.0);
  // 0.3+0.3i sits 0.3 from both axes; the point at radius 0.3 on the bisector sits 0.3 sin(pi/4) away.
  EXPECT_NEAR(quarter.distance_to_boundary({0.3, 0.3}), 0.3, 1e-15);
  EXPECT_NEAR(quarter.distance_to_boundary(std::polar(0.3, pi / 4)), 0.21213203435596426, 1e-15);
  EXPECT_NEAR(make_sector(1.0, 1.0).distance_to_boundary({0, 0.5}), 0.5, 1e-15);
}

TEST(Geometry, PerturbedDistanceIsTightLowerBound) {
  const auto wedge = make_perturbed_wedge(1.0, 1.0, 0.1, 0.1, 0.4);
  StreamRng rng(7, 0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const Point z = std::polar(std::pow(10.0, -3.0 * rng.uniform()), pi * rng.uniform());
    if (!wedge.contains(z)) continue;
    const double lb = wedge.distance_to_boundary(z);
    const double ref = dense_distance(wedge, z, 20000);
    // Dense sampling overestimates by at most half the sample spacing.
    EXPECT_LE(lb, ref + 1e-12);
    EXPECT_GE(lb, 0.9 * ref - 1e-4 * 1.1);
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(Geometry, PerturbedDistanceNearCurve) {
  PerturbedArc arc{{0, 0}, 0.0, 0.1, 0.4, 1.0, true};
  for (double r : {1e-6, 1e-3, 0.3, 0.9}) {
    for (double h : {1e-2, 1e-5, 1e-9}) {
      // Offset along the normal of the curve at parameter r.
      const Point w = arc.at(r);
      const double dr = 1e-7 * r;
      const Point tangent = (arc.at(r + dr) - arc.at(r - dr)) / std::abs(arc.at(r + dr) - arc.at(r - dr));
      const Point z = w + h * r * Point(0, 1) * tangent;
      const auto res = detail::distance(arc, z);
      EXPECT_LE(res.lower, h * r * (1 + 1e-6));
      EXPECT_GE(res.lower, 0.85 * h * r);
    }
  }
}

TEST(Geometry, DistanceNeverExceedsDistanceToSides) {
  const auto wedge = make_perturbed_wedge(0.5, 1.0, 0.05, 0.1, 0.4);
  StreamRng rng(11, 0);
  for (int i = 0; i < 500; ++i) {
    const Point z = std::polar(rng.uniform(), 0.5 * pi * rng.uniform());
    if (!wedge.contains(z)) continue;
    const double d = wedge.distance_to_boundary(z);
    for (double r = 1e-4; r <= 1.0; r *= 1.2) {
      EXPECT_LE(d, std::abs(z - wedge.corner_parametrization(Side::plus, r)) + 1e-15);
      EXPECT_LE(d, std::abs(z - wedge.corner_parametrization(Side::minus, r)) + 1e-15);
    }
  }
}

TEST(Geometry, ThetaProfile) {
  for (double alpha : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    const auto sector = make_sector(alpha, 1.0);
    for (double r : {1e-5, 0.01, 0.5, 0.99}) EXPECT_NEAR(sector.theta_profile(r), pi * alpha, 1e-12);
  }
  const double kappa = 0.1, gamma = 0.4, alpha = 1.0;
  const auto widened = make_perturbed_wedge(alpha, 1.0, 0.0, kappa, gamma);
  const double c1 = widened.wedges()[0].c1;
  EXPECT_NEAR(c1, kappa / (pi * alpha), 1e-15);
  for (double r = 1e-4; r < 1.0; r *= 2) {
    const double theta = widened.theta_profile(r);
    EXPECT_NEAR(theta, pi * alpha + kappa * std::pow(r, gamma), 1e-12);
    EXPECT_LE(theta, pi * alpha * (1 + c1 * std::pow(r, gamma)) + 1e-12);
  }
  const auto narrowed = make_perturbed_wedge(alpha, 1.0, kappa, 0.0, gamma);
  EXPECT_NEAR(narrowed.theta_profile(0.3), pi - kappa * std::pow(0.3, gamma), 1e-12);

  const auto two = make_multi_wedge_disk({{0.0, 0.5}, {0.75 * pi, 0.25}}, 1.0, 0.5, 0.45);
  const auto thetas = two.theta_profiles(0.2);
  ASSERT_EQ(thetas.size(), 2u);
  EXPECT_NEAR(thetas[0], pi / 2, 1e-12);
  EXPECT_NEAR(thetas[1], pi / 4, 1e-12);
}

TEST(Geometry, SingleIntervalByAngularScan) {
  const auto wedge = make_perturbed_wedge(1.5, 1.0, 0.1, 0.05, 0.4);
  for (double r : {1e-3, 0.1, 0.7}) {
    int runs = 0;
    bool prev = wedge.contains(std::polar(r, 0.0));
    const bool first = prev;
    const int n = static_cast<int>(2 * pi / 1e-4);
    for (int k = 1; k <= n; ++k) {
      const bool cur = wedge.contains(std::polar(r, k * 1e-4));
      if (cur && !prev) ++runs;
      prev = cur;
    }
    if (first && runs == 0) runs = 1;
    EXPECT_EQ(runs, 1) << "r=" << r;
    EXPECT_NEAR(wedge.theta_profile(r), 1.5 * pi + (0.05 - 0.1) * std::pow(r, 0.4), 1e-12);
  }
}

TEST(Geometry, CornerParametrization) {
  const auto sector = make_sector(0.5, 1.0);
  EXPECT_NEAR(std::abs(sector.corner_parametrization(Side::plus, 0.5) - Point(0.5, 0)), 0, 1e-15);
  EXPECT_NEAR(std::abs(sector.corner_parametrization(Side::minus, 0.5) - Point(0, 0.5)), 0, 1e-15);
  const auto wedge = make_perturbed_wedge(1.0, 1.0, 0.1, 0.0, 0.4);
  const Point w = wedge.corner_parametrization(Side::plus, 0.1);
  EXPECT_NEAR(std::abs(w), 0.1, 1e-15);
  EXPECT_NEAR(std::arg(w), 0.039810717055349725, 1e-14);
  EXPECT_THROW(sector.corner_parametrization(Side::plus, 1.5), ConfigError);
  // Arg tends to phi and phi + pi alpha at the corner.
  EXPECT_NEAR(std::arg(wedge.corner_parametrization(Side::plus, 1e-12)), 0.0, 1e-4);
}

TEST(Geometry, SlitDisk) {
  const auto slit = make_sector(2.0, 1.0);
  EXPECT_TRUE(slit.contains({0.5, 1e-6}));
  EXPECT_TRUE(slit.contains({0.5, -1e-6}));
  EXPECT_TRUE(slit.contains({-0.5, 0}));
  EXPECT_NEAR(slit.distance_to_boundary({0.5, 0.01}), 0.01, 1e-15);
  EXPECT_NEAR(slit.theta_profile(0.5), 2 * pi, 1e-12);
}

TEST(Geometry, ValidationErrors) {
  EXPECT_THROW(make_sector(3.0, 1.0), ConfigError);
  EXPECT_THROW(make_sector(0.0, 1.0), ConfigError);
  EXPECT_THROW(Domain({Segment{{0, 0}, {1, 0}}}, {0, 0}, {}, 0.0), ConfigError);
  // Separators must contain the rho0-ball structure.
  EXPECT_THROW(make_multi_wedge_disk({{0.0, 0.5}, {0.75 * pi, 0.25}}, 1.0, 0.5, 0.6), ConfigError);
  // Overlapping wedges.
  EXPECT_THROW(make_multi_wedge_disk({{0.0, 1.0}, {0.5 * pi, 0.5}}, 1.0, 0.5, 0.4), ConfigError);
  // Perturbations that close the slit.
  EXPECT_THROW(make_perturbed_wedge(2.0, 1.0, 0.0, 0.1, 0.4), ConfigError);
  // rho0 beyond the sector's arc: the circle misses the domain.
  std::vector<BoundaryArc> arcs{Segment{{0, 0}, {1, 0}}, CircularArc{{0, 0}, 1.0, 0.0, pi / 2},
                                Segment{{0, 1}, {0, 0}}};
  EXPECT_THROW(Domain(arcs, {0, 0}, {Wedge{0.0, 0.5, 0.0, 1.0, 0, 2}}, 2.0), ConfigError);
  EXPECT_NO_THROW(Domain(arcs, {0, 0}, {Wedge{0.0, 0.5, 0.0, 1.0, 0, 2}}, 1.0));
}

TEST(Geometry, WedgeComponent) {
  const auto two = make_multi_wedge_disk({{0.0, 0.5}, {0.75 * pi, 0.25}}, 1.0, 0.5, 0.45);
  const auto u1 = two.wedge_component(1);
  EXPECT_NEAR(u1.theta_profile(0.1), pi / 4, 1e-12);
  EXPECT_TRUE(u1.contains(std::polar(0.3, 0.875 * pi)));
  EXPECT_FALSE(u1.contains(std::polar(0.46, 0.875 * pi)));
  EXPECT_TRUE(two.contains(std::polar(0.46, 0.875 * pi)));
  EXPECT_FALSE(two.contains(std::polar(0.3, 0.6 * pi)));
  EXPECT_TRUE(two.contains(std::polar(0.6, 0.6 * pi)));
  EXPECT_NEAR(two.distance_to_boundary(std::polar(0.3, 0.625 * pi)), 0.3 * std::sin(0.125 * pi), 1e-14);
}

TEST(Geometry, MembershipStableUnderSmallMoves) {
  const auto wedge = make_perturbed_wedge(0.5, 1.0, 0.1, 0.1, 0.4);
  StreamRng rng(3, 1);
  for (int i = 0; i < 2000; ++i) {
    const Point z = std::polar(1.2 * rng.uniform(), 2 * pi * rng.uniform());
    const bool in = wedge.contains(z);
    const double d = in ? wedge.distance_to_boundary(z) : dense_distance(wedge, z, 2000) - 1e-3;
    if (d <= 0) continue;
    const Point moved = z + 0.5 * d * std::polar(1.0, rng.angle());
    EXPECT_EQ(wedge.contains(moved), in);
  }
}
