#pragma once

// Harmonic measure by walk-on-spheres, closed-form references for the disk
// and the half-disk, and the extremal-length upper bounds near a corner.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "measures.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace balayage {

struct McConfig {
  std::size_t n_walks = 100000;
  double eps_shell = 1e-9;
  std::size_t max_steps = 100000;
  std::uint64_t seed = 1;

  void validate() const {
    require(n_walks >= 1, "n_walks must be >= 1");
    require(eps_shell > 0.0 && std::isfinite(eps_shell), "eps_shell must be positive");
    require(max_steps >= 1, "max_steps must be >= 1");
  }
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  std::size_t aborted = 0;
  double n_effective = 0.0;
};

inline constexpr std::size_t kNoArc = std::numeric_limits<std::size_t>::max();

struct ExitRecord {
  Point point;
  std::size_t arc = kNoArc;
  std::uint32_t steps = 0;
  bool aborted = false;
};

/// Boundary set {w in dOmega : |w - center| < radius}, optionally limited to
/// the two sides of one wedge.
struct BoundaryWindow {
  Point center;
  double radius = 0.0;
  std::optional<std::size_t> component;

  BoundaryWindow() = default;
  BoundaryWindow(Point c, double r, std::optional<std::size_t> comp = std::nullopt)
      : center(c), radius(r), component(comp) {}

  bool contains(const Domain& domain, const ExitRecord& exit) const {
    if (exit.aborted || std::abs(exit.point - center) >= radius) return false;
    if (!component) return true;
    const auto& w = domain.wedges().at(*component);
    return exit.arc == w.plus_arc || exit.arc == w.minus_arc;
  }
};

/// One Brownian path from z, absorbed in the eps-shell and projected onto
/// the nearest arc.
inline ExitRecord walk_on_spheres(const Domain& domain, Point z, StreamRng& rng, double eps,
                                  std::size_t max_steps) {
  for (std::size_t step = 0; step < max_steps; ++step) {
    const auto near = domain.nearest(z);
    if (near.distance < eps) {
      return {domain.project(z, near.arc), near.arc, static_cast<std::uint32_t>(step), false};
    }
    z += std::polar(near.distance, rng.angle());
  }
  return {z, kNoArc, static_cast<std::uint32_t>(max_steps), true};
}

inline void warn_aborted(std::size_t aborted, std::size_t n) {
  if (n > 0 && static_cast<double>(aborted) > 1e-4 * static_cast<double>(n)) {
    std::cerr << "warning: " << aborted << " of " << n << " walks hit max_steps and were excluded\n";
  }
}

/// All exits of cfg.n_walks walks from z (walk i uses stream i).
inline std::vector<ExitRecord> exit_sample(const Domain& domain, Point z, const McConfig& cfg) {
  cfg.validate();
  require(domain.contains(z), "starting point must lie inside the domain");
  std::vector<ExitRecord> exits(cfg.n_walks);
  const std::uint64_t seed = derive_seed(cfg.seed, 1);
  for_each_block(cfg.n_walks, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      StreamRng rng(seed, i);
      exits[i] = walk_on_spheres(domain, z, rng, cfg.eps_shell, cfg.max_steps);
    }
  });
  return exits;
}

/// Bernoulli estimate of P(exit satisfies pred) over non-aborted walks.
template <class Pred>
McEstimate bernoulli_estimate(const std::vector<ExitRecord>& exits, Pred&& pred) {
  std::size_t hits = 0, aborted = 0;
  for (const auto& e : exits) {
    if (e.aborted) {
      ++aborted;
    } else if (pred(e)) {
      ++hits;
    }
  }
  const std::size_t n = exits.size() - aborted;
  warn_aborted(aborted, exits.size());
  if (n == 0) throw NumericalError("every walk exceeded max_steps");
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n, aborted, static_cast<double>(n)};
}

/// omega(z, window, domain).
inline McEstimate wos_harmonic_measure(const Domain& domain, Point z, const BoundaryWindow& window,
                                       const McConfig& cfg) {
  require(window.radius > 0.0, "window radius must be positive");
  const auto exits = exit_sample(domain, z, cfg);
  return bernoulli_estimate(exits, [&](const ExitRecord& e) { return window.contains(domain, e); });
}

/// Halves eps_shell until the window estimate moves by less than one
/// combined standard error (same walks, common random numbers).
struct ShellChoice {
  double eps_shell = 0.0;
  std::vector<std::pair<double, McEstimate>> history;
};

inline ShellChoice choose_eps_shell(const Domain& domain, Point z, const BoundaryWindow& window, McConfig cfg,
                                    int max_halvings = 20) {
  ShellChoice out;
  McEstimate prev = wos_harmonic_measure(domain, z, window, cfg);
  out.history.emplace_back(cfg.eps_shell, prev);
  for (int k = 0; k < max_halvings; ++k) {
    cfg.eps_shell *= 0.5;
    const McEstimate cur = wos_harmonic_measure(domain, z, window, cfg);
    out.history.emplace_back(cfg.eps_shell, cur);
    const double sigma = std::hypot(prev.std_error, cur.std_error);
    if (std::abs(cur.mean - prev.mean) < std::max(sigma, 1e-300)) {
      out.eps_shell = 2.0 * cfg.eps_shell;
      return out;
    }
    prev = cur;
  }
  throw NumericalError("eps_shell did not stabilise the window estimate");
}

// ---------------------------------------------------------------------------
// Closed forms.

/// Harmonic measure of the arc {c + R e^{it}: t1 < t < t2} (t2 - t1 <= 2 pi)
/// in the disk |w - c| < R, seen from z, via the Moebius map sending z to 0.
inline double disk_arc_measure(Point c, double R, Point z, double t1, double t2) {
  require(R > 0.0 && t2 > t1 && t2 - t1 <= kTwoPi, "arc must have 0 < t2 - t1 <= 2 pi");
  if (t2 - t1 == kTwoPi) return 1.0;
  const Point u = (z - c) / R;
  require(std::abs(u) < 1.0, "point must lie inside the disk");
  auto mobius = [&](double t) {
    const Point w = std::polar(1.0, t);
    return (w - u) / (1.0 - std::conj(u) * w);
  };
  double span = std::arg(mobius(t2)) - std::arg(mobius(t1));
  span = std::fmod(span, kTwoPi);
  if (span < 0) span += kTwoPi;
  return span / kTwoPi;
}

/// Arc of the circle |w - c| = R cut out by the disk window |w - w0| < rho,
/// where w0 = c + R e^{i theta0}.
inline std::pair<double, double> disk_window_arc(double R, double theta0, double rho) {
  require(rho > 0.0, "window radius must be positive");
  if (rho >= 2.0 * R) return {theta0 - kPi, theta0 + kPi};
  const double half = 2.0 * std::asin(rho / (2.0 * R));
  return {theta0 - half, theta0 + half};
}

/// Harmonic measure of [a, b] (on the real diameter) in the upper half-disk
/// {|z| < R, Im z > 0}: the map ((R + z)/(R - z))^2 sends it onto the upper
/// half-plane and the diameter onto the positive axis.
inline double half_disk_diameter_measure(double R, Point z, double a, double b) {
  require(R > 0.0 && -R <= a && a < b && b <= R, "need -R <= a < b <= R");
  require(z.imag() > 0.0 && std::abs(z) < R, "point must lie in the upper half-disk");
  auto zeta = [&](Point w) {
    const Point phi = (R + w) / (R - w);
    return phi * phi;
  };
  auto edge = [&](double x) {
    if (x >= R) return std::numeric_limits<double>::infinity();
    const double phi = (R + x) / (R - x);
    return phi * phi;
  };
  const Point zz = zeta(z);
  const double za = edge(a), zb = edge(b);
  const double arg_b = std::isinf(zb) ? kPi : std::arg(zz - zb);
  return (arg_b - std::arg(zz - za)) / kPi;
}

/// Half-plane Poisson kernel mass of [a, b] seen from z (Im z > 0).
inline double half_plane_interval_measure(Point z, double a, double b) {
  require(z.imag() > 0.0 && a < b, "need Im z > 0 and a < b");
  return (std::arg(z - b) - std::arg(z - a)) / kPi;
}

// ---------------------------------------------------------------------------
// Extremal-length bounds.

/// (8/pi) exp(-pi int_{r0}^{R0} dr / (r Theta(r))).
inline double extremal_length_bound(const std::function<double(double)>& theta, double r0, double R0) {
  require(r0 > 0.0 && r0 < R0, "need 0 < r0 < R0");
  auto integrand = [&](double t) {
    const double th = theta(std::exp(t));
    if (!(th > 0.0) || !std::isfinite(th)) throw NumericalError("theta profile must be positive and finite");
    return 1.0 / th;
  };
  const double integral = integrate(integrand, std::log(r0), std::log(R0), 1e-12, 20);
  if (!std::isfinite(integral)) throw NumericalError("extremal-length quadrature failed");
  return 8.0 / kPi * std::exp(-kPi * integral);
}

/// Upper bound for omega(z, dU_j ∩ B_r(0), Omega) with |z| = z_abs:
/// (8/pi) (r/m)^{1/alpha} (1 + C1 m^gamma)^{1/(alpha gamma)}, m = min(|z|, rho0).
inline double corner_bound(double alpha, double gamma, double C1, double r, double z_abs, double rho0) {
  require(alpha > 0.0 && alpha <= 2.0, "alpha must lie in (0, 2]");
  require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  require(C1 >= 0.0, "C1 must be >= 0");
  require(rho0 > 0.0 && z_abs > 0.0, "rho0 and |z| must be positive");
  const double m = std::min(z_abs, rho0);
  require(r > 0.0 && r < m, "need 0 < r < min(|z|, rho0)");
  return 8.0 / kPi * std::pow(r / m, 1.0 / alpha) * std::pow(1.0 + C1 * std::pow(m, gamma), 1.0 / (alpha * gamma));
}

/// omega(w, E, S) in the sector S of opening pi alpha and radius 1 against
/// omega(w^{1/alpha}, h^{-1}(E), half-disk) with h(z) = z^alpha, E given as a
/// window on the sector boundary.
inline std::pair<McEstimate, McEstimate> power_map_invariance(double alpha, Point w, const BoundaryWindow& window,
                                                              const McConfig& cfg) {
  require(alpha > 0.0 && alpha <= 2.0, "alpha must lie in (0, 2]");
  const Domain sector = make_sector(alpha, 1.0);
  const Domain half = make_sector(1.0, 1.0);
  require(sector.contains(w), "w must lie in the sector");
  double t = std::arg(w);
  if (t < 0) t += kTwoPi;
  const Point preimage = std::polar(std::pow(std::abs(w), 1.0 / alpha), t / alpha);
  const auto direct = wos_harmonic_measure(sector, w, window, cfg);
  McConfig mapped_cfg = cfg;
  mapped_cfg.seed = derive_seed(cfg.seed, 2);
  const auto exits = exit_sample(half, preimage, mapped_cfg);
  auto h = [&](Point x) {
    double a = std::arg(x);
    if (a < 0) a = (a < -0.5 * kPi) ? kPi : 0.0;  // points on the diameter
    return std::polar(std::pow(std::abs(x), alpha), alpha * a);
  };
  const auto mapped = bernoulli_estimate(exits, [&](const ExitRecord& e) {
    return std::abs(h(e.point) - window.center) < window.radius;
  });
  return {direct, mapped};
}

}  // namespace balayage
