#pragma once

// Equilibrium measures for Q(z) = |z|^{2b}, their hard-wall modification by
// balayage onto the wall, wall density profiles, the edge rate at a wall
// corner, and a Metropolis sampler for the Coulomb gas.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "balayage.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "measures.hpp"
#include "rng.hpp"

namespace balayage {

/// Radius b^{-1/(2b)} of the support S of the equilibrium measure.
inline double equilibrium_radius(double b) {
  require(b > 0.0 && std::isfinite(b), "b must be positive");
  return std::pow(b, -1.0 / (2.0 * b));
}

/// (b^2/pi) |z|^{2b-2} on |z| <= b^{-1/(2b)}, 0 outside; +inf at z = 0 when b < 1.
inline double equilibrium_density(double b, Point z) {
  const double s0 = equilibrium_radius(b);
  const double r = std::abs(z);
  if (r > s0) return 0.0;
  if (r == 0.0) {
    if (b < 1.0) return std::numeric_limits<double>::infinity();
    return b == 1.0 ? 1.0 / kPi : 0.0;
  }
  return b * b / kPi * std::pow(r, 2.0 * b - 2.0);
}

struct HardWallProblem {
  double b = 1.0;
  Domain wall;
  double s0_radius = 1.0;

  HardWallProblem(double b_, Domain wall_) : b(b_), wall(std::move(wall_)), s0_radius(equilibrium_radius(b_)) {
    require(wall.max_radius_about({0.0, 0.0}) < s0_radius, "the wall must lie strictly inside the support S0");
  }

  /// mu0 restricted to the wall domain.
  RadialPowerMeasure inner_measure(SamplingPlan plan = {}) const {
    return RadialPowerMeasure(wall, b, {0.0, 0.0}, Multiplier::constant(b * b / kPi), std::nullopt,
                              std::numeric_limits<double>::infinity(), plan);
  }
};

/// The sector wall {r e^{it} : 0 < r < a, 0 < t < pi alpha} with
/// a = a_factor * b^{-1/(2b)}.
inline HardWallProblem sector_wall(double b, double alpha, double a_factor = 0.8) {
  require(a_factor > 0.0 && a_factor < 1.0, "a_factor must lie in (0, 1)");
  return HardWallProblem(b, make_sector(alpha, a_factor * equilibrium_radius(b)));
}

namespace detail {

/// Arclength of a perturbed arc from its origin to radius r.
inline double perturbed_arclength(const PerturbedArc& arc, double r) {
  if (arc.kappa == 0.0) return r;
  const double kg = arc.kappa * arc.gamma;
  return integrate([&](double t) { return std::hypot(1.0, kg * std::pow(t, arc.gamma)); }, 0.0, r, 1e-12, 20);
}

inline double arc_length(const BoundaryArc& arc) {
  if (const auto* s = std::get_if<Segment>(&arc)) return std::abs(s->to - s->from);
  if (const auto* c = std::get_if<CircularArc>(&arc)) return c->radius * std::abs(c->sweep);
  const auto& p = std::get<PerturbedArc>(arc);
  return perturbed_arclength(p, p.length);
}

/// Arclength from the start of the arc to the point p on it.
inline double arclength_along(const BoundaryArc& arc, Point p, double length) {
  if (const auto* s = std::get_if<Segment>(&arc)) return std::clamp(std::abs(p - s->from), 0.0, length);
  if (const auto* c = std::get_if<CircularArc>(&arc)) {
    double off = std::arg(p - c->center) - c->start;
    if (c->sweep >= 0) {
      off = std::fmod(off, kTwoPi);
      if (off < 0) off += kTwoPi;
    } else {
      off = std::fmod(-off, kTwoPi);
      if (off < 0) off += kTwoPi;
    }
    return std::clamp(c->radius * off, 0.0, length);
  }
  const auto& a = std::get<PerturbedArc>(arc);
  const double s = perturbed_arclength(a, std::min(std::abs(p - a.origin), a.length));
  return std::clamp(a.outward ? s : length - s, 0.0, length);
}

}  // namespace detail

/// d nu / |dz| on equal-arclength bins along the boundary (arcs in order,
/// starting at the first arc's start), with nu = Bal(mu0|Omega, dOmega).
struct WallProfile {
  std::vector<double> s;  // bin centres
  double bin_width = 0.0;
  std::vector<double> density;
  std::vector<double> std_error;
  std::vector<double> normalized;  // density / nu(dOmega)
  double total = 0.0;
  double perimeter = 0.0;
};

inline WallProfile profile_from_cloud(const Domain& wall, const EmpiricalBoundaryMeasure& nu, std::size_t bins) {
  require(bins >= 1, "need at least one bin");
  std::vector<double> offsets{0.0};
  std::vector<double> lengths;
  for (const auto& arc : wall.arcs()) {
    lengths.push_back(detail::arc_length(arc));
    offsets.push_back(offsets.back() + lengths.back());
  }
  WallProfile prof;
  prof.perimeter = offsets.back();
  prof.total = nu.total;
  prof.bin_width = prof.perimeter / static_cast<double>(bins);
  std::vector<double> mass(bins, 0.0), mass_sq(bins, 0.0);
  double all_sq = 0.0;
  for (const auto& a : nu.atoms) {
    const double s = offsets[a.arc] + detail::arclength_along(wall.arcs()[a.arc], a.point, lengths[a.arc]);
    const auto k = std::min(bins - 1, static_cast<std::size_t>(s / prof.bin_width));
    mass[k] += a.weight;
    mass_sq[k] += a.weight * a.weight;
    all_sq += a.weight * a.weight;
  }
  for (std::size_t k = 0; k < bins; ++k) {
    const double p = nu.total > 0.0 ? mass[k] / nu.total : 0.0;
    const double se = std::sqrt(mass_sq[k] * (1 - p) * (1 - p) + (all_sq - mass_sq[k]) * p * p);
    prof.s.push_back((static_cast<double>(k) + 0.5) * prof.bin_width);
    prof.density.push_back(mass[k] / prof.bin_width);
    prof.std_error.push_back(se / prof.bin_width);
    prof.normalized.push_back(nu.total > 0.0 ? mass[k] / prof.bin_width / nu.total : 0.0);
  }
  return prof;
}

inline WallProfile wall_profile(const HardWallProblem& problem, const McConfig& cfg, std::size_t bins = 64) {
  const BalayageRun run(problem.inner_measure(), cfg);
  return profile_from_cloud(problem.wall, empirical_balayage(run), bins);
}

struct EdgeBin {
  double r_lo = 0.0, r_hi = 0.0;
  double density = 0.0, std_error = 0.0, n_effective = 0.0;
};

struct EdgeRateReport {
  RateFit fit;
  double expected = 0.0;
  bool log_regime = false;
  std::vector<EdgeBin> bins;
  bool sufficient = true;
  bool pass = false;
  std::string warning;
};

/// Fit window [r_hi / 10^decades, r_hi] for the edge density: r_hi keeps the
/// relative size of the next-order term, (r/rho0)^{|1/alpha - 2b|}, below
/// bias_tol (capped at 0.2 rho0; 0.05 rho0 in the log regime).
inline double edge_fit_upper(double alpha, double b, double rho0, double bias_tol) {
  const double delta = std::abs(1.0 / alpha - 2.0 * b);
  if (rate_regime(alpha, b) == RateRegime::log) return 0.05 * rho0;
  return rho0 * std::min(0.2, std::pow(bias_tol, 1.0 / delta));
}

struct EdgeRateOptions {
  double bias_tol = 0.03;
  double decades = 1.0;
  std::size_t bins = 8;
  double min_n_effective = 20.0;
  double tolerance = 0.07;
  /// Defensive importance sampling toward the corner, used in the sub and
  /// log regimes where nu near the corner is fed by nearby mass: a fraction
  /// of the samples follows r^{2 b' - 1} with b' = proposal_b_ratio * b.
  /// Keeping b' proportional to b bounds the spread of the weights ~ r^{2(b - b')}.
  double proposal_fraction = 0.5;
  double proposal_b_ratio = 0.25;
};

/// Log-binned d nu/|dz| on the two sides of the wall corner (averaged over
/// the sides) against distance to the corner, fitted on one decade; the
/// exponent is compared with min(2b, 1/alpha) - 1.
inline EdgeRateReport edge_rate_check(const HardWallProblem& problem, const McConfig& cfg,
                                      const EdgeRateOptions& opt = {}) {
  const Domain& wall = problem.wall;
  require(wall.wedges().size() == 1, "edge rate check needs a wall with exactly one corner");
  const Wedge& w = wall.wedges().front();
  const double alpha = w.alpha, b = problem.b;
  const RateRegime regime = rate_regime(alpha, b);
  EdgeRateReport report;
  report.expected = rate_exponent(alpha, b) - 1.0;
  report.log_regime = regime == RateRegime::log;
  SamplingPlan plan;
  if (regime != RateRegime::super) {
    plan = {opt.proposal_fraction, opt.proposal_b_ratio * b};
  }
  const BalayageRun run(problem.inner_measure(plan), cfg);
  const auto nu = empirical_balayage(run);

  const double r_hi = edge_fit_upper(alpha, b, wall.rho0(), opt.bias_tol);
  const double r_lo = r_hi * std::pow(10.0, -opt.decades);
  const double ratio = std::pow(r_hi / r_lo, 1.0 / static_cast<double>(opt.bins));
  std::vector<double> mass(opt.bins, 0.0), mass_sq(opt.bins, 0.0);
  double all_sq = 0.0;
  for (const auto& a : nu.atoms) {
    all_sq += a.weight * a.weight;
    if (a.arc != w.plus_arc && a.arc != w.minus_arc) continue;
    const double r = std::abs(a.point - wall.corner());
    if (r < r_lo || r >= r_hi) continue;
    const auto k = std::min(opt.bins - 1, static_cast<std::size_t>(std::log(r / r_lo) / std::log(ratio)));
    mass[k] += a.weight;
    mass_sq[k] += a.weight * a.weight;
  }
  std::vector<CurvePoint> curve;
  for (std::size_t k = 0; k < opt.bins; ++k) {
    EdgeBin bin;
    bin.r_lo = r_lo * std::pow(ratio, static_cast<double>(k));
    bin.r_hi = bin.r_lo * ratio;
    // Both sides: arclength 2 (r_hi - r_lo) for straight sides; curved sides
    // only change this by a factor 1 + O(r^{2 gamma}).
    const double width = 2.0 * (bin.r_hi - bin.r_lo);
    const double p = nu.total > 0.0 ? mass[k] / nu.total : 0.0;
    bin.density = mass[k] / width;
    bin.std_error = std::sqrt(mass_sq[k] * (1 - p) * (1 - p) + (all_sq - mass_sq[k]) * p * p) / width;
    bin.n_effective = mass_sq[k] > 0.0 ? mass[k] * mass[k] / mass_sq[k] : 0.0;
    if (bin.n_effective < opt.min_n_effective) report.sufficient = false;
    report.bins.push_back(bin);
    if (bin.density > 0.0) curve.push_back({std::sqrt(bin.r_lo * bin.r_hi), bin.density, bin.std_error});
  }
  if (!report.sufficient) {
    report.warning = "insufficient near-corner statistics: some bin has n_effective < " +
                     std::to_string(opt.min_n_effective) + "; increase the number of samples";
  }
  if (curve.size() < 5) {
    report.sufficient = false;
    return report;
  }
  report.fit = fit_rate(curve, report.log_regime, opt.decades * (1.0 - 1.0 / static_cast<double>(opt.bins)));
  report.pass = report.sufficient && std::abs(report.fit.exponent - report.expected) <= opt.tolerance &&
                report.fit.log_correction == report.log_regime;
  return report;
}

// ---------------------------------------------------------------------------
// Coulomb gas.

struct GasConfig {
  std::size_t n = 128;
  double beta = 2.0;
  double b = 1.0;
  std::size_t sweeps = 2000;  // each sweep proposes a move for every point
  std::uint64_t seed = 1;
  std::optional<Domain> wall;
};

struct GasResult {
  std::vector<Point> points;
  double acceptance_rate = 0.0;
  double step_scale = 0.0;
  /// Mean of |z|^2 over the configuration after each post-burn-in sweep.
  std::vector<double> mean_sq_radius;
};

/// Metropolis chain for prod |z_j - z_k|^beta prod exp(-n beta Q(z_j) / 2),
/// Q = |z|^{2b} off the wall and +inf on it. Single-point Gaussian proposals;
/// the scale is tuned toward acceptance 0.3 during the first quarter of the
/// sweeps (burn-in) and fixed afterwards.
inline GasResult gas_sampler(const GasConfig& cfg) {
  require(cfg.n >= 1 && cfg.n <= 512, "n must lie in [1, 512]");
  require(cfg.beta > 0.0 && std::isfinite(cfg.beta), "beta must be positive");
  require(cfg.b > 0.0 && std::isfinite(cfg.b), "b must be positive");
  require(cfg.sweeps >= 4, "need at least 4 sweeps");
  const double n = static_cast<double>(cfg.n);
  auto q = [&](Point z) { return std::pow(std::norm(z), cfg.b); };
  auto blocked = [&](Point z) { return cfg.wall && cfg.wall->contains(z); };
  StreamRng rng(cfg.seed, 0);
  const double s0 = equilibrium_radius(cfg.b);
  std::vector<Point> z(cfg.n);
  for (auto& p : z) {
    do {
      p = std::polar(s0 * std::sqrt(rng.uniform()), rng.angle());
    } while (blocked(p));
  }
  GasResult out;
  double scale = 0.5 * s0 / std::sqrt(n);
  const std::size_t burn_in = cfg.sweeps / 4;
  std::size_t accepted = 0, proposed = 0;
  for (std::size_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
    std::size_t sweep_accepted = 0;
    for (std::size_t j = 0; j < cfg.n; ++j) {
      const Point cand = z[j] + scale * Point(rng.normal(), rng.normal());
      if (blocked(cand)) continue;
      double delta = 0.5 * n * cfg.beta * (q(cand) - q(z[j]));
      for (std::size_t k = 0; k < cfg.n; ++k) {
        if (k == j) continue;
        delta -= cfg.beta * (std::log(std::abs(cand - z[k])) - std::log(std::abs(z[j] - z[k])));
      }
      if (delta <= 0.0 || rng.uniform() < std::exp(-delta)) {
        z[j] = cand;
        ++sweep_accepted;
      }
    }
    const double rate = static_cast<double>(sweep_accepted) / n;
    if (sweep < burn_in) {
      scale *= std::exp(0.5 * (rate - 0.3));
    } else {
      accepted += sweep_accepted;
      proposed += cfg.n;
      double m = 0.0;
      for (const auto& p : z) m += std::norm(p);
      out.mean_sq_radius.push_back(m / n);
    }
  }
  out.points = z;
  out.step_scale = scale;
  out.acceptance_rate = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  if (out.acceptance_rate < 0.05) {
    std::cerr << "warning: Metropolis acceptance rate " << out.acceptance_rate
              << " is below 0.05; the proposal scale is mistuned\n";
  }
  return out;
}

}  // namespace balayage
