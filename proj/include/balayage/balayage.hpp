#pragma once

// Balayage nu = Bal(mu, dOmega) as a cloud of weighted exit points: each
// mu-sample starts one Brownian path and deposits its weight where the path
// leaves the domain, so nu(E) = int omega(z, E, Omega) dmu(z).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "harmonic_mc.hpp"
#include "measures.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace balayage {

inline constexpr std::uint64_t kSampleStreamTag = 3;
inline constexpr std::uint64_t kWalkStreamTag = 4;

/// cfg.n_walks is the number of mu-samples; every sample starts one walk.
struct BalayageRun {
  RadialPowerMeasure measure;
  McConfig cfg;
  std::vector<double> radii;

  BalayageRun(RadialPowerMeasure mu, McConfig config, std::vector<double> window_radii = {})
      : measure(std::move(mu)), cfg(config), radii(std::move(window_radii)) {
    cfg.validate();
    for (std::size_t i = 0; i < radii.size(); ++i) {
      require(radii[i] > 0.0 && std::isfinite(radii[i]), "window radii must be positive");
      require(i == 0 || radii[i] > radii[i - 1], "window radii must be strictly increasing");
    }
  }

  const Domain& domain() const { return measure.domain(); }
};

struct BoundaryAtom {
  Point point;          // exit point on the boundary
  Point source;         // the mu-sample the walk started from
  double weight = 0.0;  // share of nu carried by this atom
  std::size_t arc = kNoArc;
};

/// Weighted exit points; weights sum to `total` = mu(Omega) exactly.
struct EmpiricalBoundaryMeasure {
  std::vector<BoundaryAtom> atoms;
  double total = 0.0;
  std::size_t aborted = 0;

  double n_effective() const {
    double s2 = 0.0;
    for (const auto& a : atoms) s2 += a.weight * a.weight;
    return s2 > 0.0 ? total * total / s2 : 0.0;
  }
};

/// One walk per mu-sample. Sample i uses stream i of the sample seed and
/// walk i uses stream i of the walk seed, so the cloud does not depend on
/// the thread count. Aborted walks are dropped and the remaining weights
/// renormalised (self-normalised estimator).
inline EmpiricalBoundaryMeasure empirical_balayage(const BalayageRun& run) {
  const auto& mu = run.measure;
  const auto& domain = run.domain();
  const std::size_t n = run.cfg.n_walks;
  EmpiricalBoundaryMeasure out;
  out.total = mu.total_mass();
  if (out.total == 0.0) return out;
  if (mu.acceptance_rate() < 1e-3) {
    throw NumericalError("sampler rejection efficiency below 1e-3: the polar box around the centre is mostly "
                         "outside the domain");
  }
  const std::uint64_t sample_seed = derive_seed(run.cfg.seed, kSampleStreamTag);
  const std::uint64_t walk_seed = derive_seed(run.cfg.seed, kWalkStreamTag);
  std::vector<BoundaryAtom> atoms(n);
  std::vector<char> aborted(n, 0);
  for_each_block(n, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      const MeasureSample s = mu.sample_one(sample_seed, i);
      StreamRng rng(walk_seed, i);
      const ExitRecord e = walk_on_spheres(domain, s.point, rng, run.cfg.eps_shell, run.cfg.max_steps);
      atoms[i] = {e.point, s.point, s.weight, e.arc};
      aborted[i] = e.aborted;
    }
  });
  out.atoms.reserve(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (aborted[i]) {
      ++out.aborted;
      continue;
    }
    sum += atoms[i].weight;
    out.atoms.push_back(atoms[i]);
  }
  warn_aborted(out.aborted, n);
  if (n > 0 && out.atoms.empty()) throw NumericalError("every walk exceeded max_steps");
  if (sum > 0.0) {
    const double scale = out.total / sum;
    for (auto& a : out.atoms) a.weight *= scale;
  }
  return out;
}

/// nu(dOmega ∩ B_r(center)) for every r in `radii` from one cloud. The
/// standard error is the delta-method error of the self-normalised ratio.
inline std::vector<McEstimate> window_masses(const EmpiricalBoundaryMeasure& nu, const std::vector<double>& radii,
                                             Point center) {
  std::vector<std::pair<double, double>> by_distance;
  by_distance.reserve(nu.atoms.size());
  double total_sq = 0.0;
  for (const auto& a : nu.atoms) {
    by_distance.emplace_back(std::abs(a.point - center), a.weight);
    total_sq += a.weight * a.weight;
  }
  std::sort(by_distance.begin(), by_distance.end());
  std::size_t k = 0;
  double inside = 0.0, inside_sq = 0.0;
  std::vector<std::size_t> order(radii.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return radii[i] < radii[j]; });
  std::vector<McEstimate> out(radii.size());
  for (std::size_t idx : order) {
    const double r = radii[idx];
    while (k < by_distance.size() && by_distance[k].first < r) {
      inside += by_distance[k].second;
      inside_sq += by_distance[k].second * by_distance[k].second;
      ++k;
    }
    McEstimate e;
    e.n = nu.atoms.size();
    e.aborted = nu.aborted;
    if (nu.total > 0.0) {
      const double p = inside / nu.total;
      e.mean = inside;
      e.std_error = std::sqrt(inside_sq * (1.0 - p) * (1.0 - p) + (total_sq - inside_sq) * p * p);
      e.n_effective = inside_sq > 0.0 ? inside * inside / inside_sq : 0.0;
    }
    out[idx] = e;
  }
  return out;
}

/// Window masses about the run's corner for all of run.radii, from one
/// simulation.
inline std::vector<McEstimate> window_mass_curve(const BalayageRun& run) {
  return window_masses(empirical_balayage(run), run.radii, run.domain().corner());
}

/// nu(dOmega ∩ B_r(z0)) at the corner z0.
inline McEstimate window_mass(const BalayageRun& run, double r) {
  require(r > 0.0, "window radius must be positive");
  return window_masses(empirical_balayage(run), {r}, run.domain().corner()).front();
}

/// U^nu(z) - U^mu(z) with U^sigma(z) = int log(1/|z - w|) dsigma(w), both
/// sides evaluated on the same samples (atom weights), for each test point.
inline std::vector<McEstimate> potential_differences(const Domain& domain, const EmpiricalBoundaryMeasure& nu,
                                                     const std::vector<Point>& test_points) {
  const double diam = domain.diameter();
  for (const Point z : test_points) {
    require(!domain.contains(z), "potential test points must lie outside the closed domain");
    require(domain.distance_to_boundary(z) >= 0.1 * diam,
            "potential test points must be at distance >= 0.1 * diameter from the boundary");
  }
  std::vector<McEstimate> out;
  for (const Point z : test_points) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& a : nu.atoms) {
      const double d = std::log(std::abs(z - a.source) / std::abs(z - a.point));
      sum += a.weight * d;
      sum_sq += a.weight * a.weight * d * d;
    }
    McEstimate e;
    e.n = nu.atoms.size();
    e.aborted = nu.aborted;
    e.mean = sum;
    // Each term has mean (weight / total) * (true difference), which is 0.
    e.std_error = std::sqrt(sum_sq);
    e.n_effective = nu.n_effective();
    out.push_back(e);
  }
  return out;
}

/// sup over the test points of |U^nu - U^mu|.
inline double potential_match(const Domain& domain, const EmpiricalBoundaryMeasure& nu,
                              const std::vector<Point>& test_points) {
  double sup = 0.0;
  for (const auto& e : potential_differences(domain, nu, test_points)) sup = std::max(sup, std::abs(e.mean));
  return sup;
}

inline double potential_match(const BalayageRun& run, const std::vector<Point>& test_points) {
  return potential_match(run.domain(), empirical_balayage(run), test_points);
}

}  // namespace balayage
