#pragma once

// Planar domains with a distinguished corner, as consumed by the
// walk-on-spheres estimator and the measure samplers.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"

namespace balayage {

using Point = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Straight piece from `from` to `to`.
struct Segment {
  Point from;
  Point to;
};

/// Piece of the circle |z - center| = radius, starting at angle `start`
/// and turning by `sweep` radians (negative sweep runs clockwise).
struct CircularArc {
  Point center;
  double radius = 1.0;
  double start = 0.0;
  double sweep = kTwoPi;
};

/// The curve r -> origin + r exp(i (phi + kappa r^gamma)), 0 <= r <= length.
/// It is C^{1,gamma}, leaves `origin` tangentially to the ray at angle phi
/// and is parametrized by the distance to `origin`. `outward` selects the
/// traversal direction used for orientation.
struct PerturbedArc {
  Point origin;
  double phi = 0.0;
  double kappa = 0.0;
  double gamma = 1.0;
  double length = 1.0;
  bool outward = true;

  double angle_at(double r) const { return phi + kappa * std::pow(r, gamma); }
  Point at(double r) const { return origin + std::polar(r, angle_at(r)); }
};

using BoundaryArc = std::variant<Segment, CircularArc, PerturbedArc>;

enum class Side { plus, minus };

/// Corner structure of one component touching the corner point: the side
/// C+ leaves at angle phi, C- at phi + pi alpha, and the angular width of
/// the component at distance r obeys Theta(r) <= pi alpha (1 + c1 r^gamma).
struct Wedge {
  double phi = 0.0;
  double alpha = 1.0;
  double c1 = 0.0;
  double gamma = 1.0;
  std::size_t plus_arc = 0;
  std::size_t minus_arc = 0;

  double bisector() const { return phi + 0.5 * kPi * alpha; }
};

/// Angular interval [start, end) with end > start; start in [0, 2 pi).
struct AngularInterval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool contains(double angle) const {
    double offset = std::fmod(angle - start, kTwoPi);
    if (offset < 0) offset += kTwoPi;
    return offset < end - start;
  }
};

inline Point arc_start(const BoundaryArc& arc) {
  struct Visitor {
    Point operator()(const Segment& s) const { return s.from; }
    Point operator()(const CircularArc& c) const { return c.center + std::polar(c.radius, c.start); }
    Point operator()(const PerturbedArc& p) const { return p.outward ? p.origin : p.at(p.length); }
  };
  return std::visit(Visitor{}, arc);
}

inline Point arc_end(const BoundaryArc& arc) {
  struct Visitor {
    Point operator()(const Segment& s) const { return s.to; }
    Point operator()(const CircularArc& c) const {
      return c.center + std::polar(c.radius, c.start + c.sweep);
    }
    Point operator()(const PerturbedArc& p) const { return p.outward ? p.at(p.length) : p.origin; }
  };
  return std::visit(Visitor{}, arc);
}

namespace detail {

inline double dot(Point a, Point b) { return a.real() * b.real() + a.imag() * b.imag(); }
inline double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }

inline Point closest_on_segment(Point p, Point a, Point b) {
  const Point u = b - a;
  const double len2 = std::norm(u);
  if (len2 == 0.0) return a;
  const double t = std::clamp(dot(p - a, u) / len2, 0.0, 1.0);
  return a + t * u;
}

/// Offset of `angle` from `start` measured in the direction of `sweep`,
/// reduced to [0, 2 pi).
inline double sweep_offset(double angle, double start, double sweep) {
  double offset = (sweep >= 0 ? angle - start : start - angle);
  offset = std::fmod(offset, kTwoPi);
  if (offset < 0) offset += kTwoPi;
  return offset;
}

inline bool on_arc_angle(const CircularArc& c, double angle) {
  if (std::abs(c.sweep) >= kTwoPi) return true;
  return sweep_offset(angle, c.start, c.sweep) <= std::abs(c.sweep);
}

/// Branch of arg(z) closest to `reference`.
inline double arg_near(Point z, double reference) {
  double a = std::arg(z);
  a += kTwoPi * std::round((reference - a) / kTwoPi);
  return a;
}

// Change of arg(w - p) as w runs along the arc. Each is the chord angle plus
// 2 pi times the winding of (arc + reversed chord) around p.

inline double winding_angle(const Segment& s, Point p) { return std::arg((s.to - p) / (s.from - p)); }

inline double winding_angle(const CircularArc& c, Point p) {
  const bool inside_disk = std::norm(p - c.center) < c.radius * c.radius;
  if (std::abs(c.sweep) >= kTwoPi) return inside_disk ? std::copysign(kTwoPi, c.sweep) : 0.0;
  const Point a = c.center + std::polar(c.radius, c.start);
  const Point b = c.center + std::polar(c.radius, c.start + c.sweep);
  const Point mid = c.center + std::polar(c.radius, c.start + 0.5 * c.sweep);
  double angle = std::arg((b - p) / (a - p));
  if (inside_disk) {
    const double side_p = cross(b - a, p - a);
    const double side_mid = cross(b - a, mid - a);
    if ((side_p > 0) == (side_mid > 0)) angle += std::copysign(kTwoPi, c.sweep);
  }
  return angle;
}

inline double winding_angle(const PerturbedArc& arc, Point p) {
  const Point end = arc.at(arc.length);
  double angle = std::arg((end - p) / (arc.origin - p));
  const Point rel = p - arc.origin;
  const double rho = std::abs(rel);
  if (arc.kappa > 0 && rho < arc.length) {
    const double psi = arg_near(rel, arc.phi + kPi);
    const double psi0 = psi - kTwoPi * std::floor((psi - arc.phi + kPi) / kTwoPi);
    if (psi0 > arc.angle_at(rho) && psi0 < arc.angle_at(arc.length)) angle += kTwoPi;
  }
  return arc.outward ? angle : -angle;
}

inline double distance(const Segment& s, Point p) { return std::abs(p - closest_on_segment(p, s.from, s.to)); }

inline Point project(const CircularArc& c, Point p) {
  const Point rel = p - c.center;
  if (std::norm(rel) > 0.0) {
    const double angle = std::arg(rel);
    if (on_arc_angle(c, angle)) return c.center + std::polar(c.radius, angle);
  }
  const Point a = c.center + std::polar(c.radius, c.start);
  const Point b = c.center + std::polar(c.radius, c.start + c.sweep);
  return std::abs(p - a) <= std::abs(p - b) ? a : b;
}

inline double distance(const CircularArc& c, Point p) { return std::abs(p - project(c, p)); }

/// Lower bound for the distance from p to an annular box
/// {origin + r e^{i t} : r in [r1, r2], t in [t1, t2]}.
inline double annular_box_distance(Point rel, double rho, double psi, double r1, double r2, double t1,
                                   double t2) {
  double offset = std::fmod(psi - t1, kTwoPi);
  if (offset < 0) offset += kTwoPi;
  if (offset <= t2 - t1) return std::max({0.0, r1 - rho, rho - r2});
  const Point e1 = std::polar(1.0, t1);
  const Point e2 = std::polar(1.0, t2);
  return std::min(std::abs(rel - closest_on_segment(rel, r1 * e1, r2 * e1)),
                  std::abs(rel - closest_on_segment(rel, r1 * e2, r2 * e2)));
}

struct PerturbedDistance {
  double lower = 0.0;  // certified lower bound
  double foot_r = 0.0; // parameter of the closest point found
};

/// Upper bound for |c''(r)| on [r1, r2] (r1 > 0) for c(r) = r e^{i(phi + kappa r^gamma)},
/// given g1 = kappa r1^gamma and g2 = kappa r2^gamma.
inline double perturbed_curvature_bound(const PerturbedArc& arc, double r1, double r2, double g1, double g2) {
  const double k1 = arc.gamma * g1 / r1;  // theta'(r1)
  const double first = (1.0 + arc.gamma) * k1;
  const double second = arc.gamma * arc.gamma * std::max(g1 * g1 / r1, g2 * g2 / r2);
  return first + second;
}

/// Branch and bound over pieces of the curve, each bounded both by its
/// enclosing annular box and by its chord minus the sagitta bound.
/// Returns a lower bound within a factor 0.9 of the best distance found,
/// or any lower bound >= `cutoff` as soon as the curve is known to be
/// farther than `cutoff`.
inline PerturbedDistance distance(const PerturbedArc& arc, Point p,
                                  double cutoff = std::numeric_limits<double>::infinity()) {
  const Point rel = p - arc.origin;
  const double rho = std::abs(rel);
  if (arc.kappa == 0.0) {
    const Point dir = std::polar(1.0, arc.phi);
    const double t = std::clamp(detail::dot(rel, dir), 0.0, arc.length);
    return {std::abs(rel - t * dir), t};
  }
  const double psi = std::arg(rel);
  auto point_at = [&](double r, double t) { return std::polar(r, t); };

  double best = rho;
  double best_r = 0.0;
  auto probe = [&](double r, double t) {
    const double d = std::abs(rel - point_at(r, t));
    if (d < best) {
      best = d;
      best_r = r;
    }
  };
  probe(arc.length, arc.angle_at(arc.length));
  // A few Newton steps on |c(r) - p|^2 from the radial guess.
  double r = std::clamp(rho, 0.0, arc.length);
  for (int k = 0; k < 4 && r > 0.0; ++k) {
    const double t = arc.angle_at(r);
    probe(r, t);
    const double dt = arc.kappa * arc.gamma * std::pow(r, arc.gamma - 1.0);
    const Point c = point_at(r, t);
    const Point c1 = std::polar(1.0, t) * Point(1.0, r * dt);
    const Point c2 = std::polar(1.0, t) * Point(-r * dt * dt, 2.0 * dt + (arc.gamma - 1.0) * dt);
    const double g = detail::dot(c - rel, c1);
    const double h = std::norm(c1) + detail::dot(c - rel, c2);
    if (!(h > 0.0)) break;
    r = std::clamp(r - g / h, 0.0, arc.length);
  }
  if (r > 0.0) probe(r, arc.angle_at(r));

  struct Box {
    double lower, r1, r2, t1, t2;
    bool operator<(const Box& other) const { return lower > other.lower; }
  };
  std::priority_queue<Box> boxes;
  auto push = [&](double r1, double r2, double t1, double t2) {
    double lb = annular_box_distance(rel, rho, psi, r1, r2, t1, t2);
    if (r1 > 0.0 && lb < best && lb < cutoff) {
      const double sag =
          0.125 * (r2 - r1) * (r2 - r1) * perturbed_curvature_bound(arc, r1, r2, t1 - arc.phi, t2 - arc.phi);
      const Point a = point_at(r1, t1), b = point_at(r2, t2);
      lb = std::max(lb, std::abs(rel - closest_on_segment(rel, a, b)) - sag);
    }
    if (lb < best && lb < cutoff) boxes.push({lb, r1, r2, t1, t2});
  };
  // Dyadic shells around rho; shells beyond |rho - r| > min(best, cutoff)
  // cannot matter.
  const double reach = std::min(best, cutoff);
  const double lo = std::max(0.0, rho - reach);
  const double hi = std::min(arc.length, rho + reach);
  double r2 = arc.length;
  double t2 = arc.angle_at(r2);
  for (int k = 0; k < 64 && r2 > 0.0; ++k) {
    const double r1 = (k == 63) ? 0.0 : 0.5 * r2;
    const double t1 = arc.angle_at(r1);
    if (r1 <= hi && r2 >= lo) push(r1, r2, t1, t2);
    if (r1 < lo) break;
    r2 = r1;
    t2 = t1;
  }
  if (lo == 0.0 && r2 > 0.0) push(0.0, r2, arc.phi, t2);

  for (int iter = 0; iter < 400 && !boxes.empty(); ++iter) {
    const Box box = boxes.top();
    if (box.lower >= 0.9 * best || box.lower >= cutoff) return {box.lower, best_r};
    boxes.pop();
    const double mid = (box.r1 > 0.0) ? std::sqrt(box.r1 * box.r2) : 0.5 * box.r2;
    const double tm = arc.angle_at(mid);
    probe(mid, tm);
    push(box.r1, mid, box.t1, tm);
    push(mid, box.r2, tm, box.t2);
  }
  if (boxes.empty()) return {0.9 * best, best_r};
  return {std::min(boxes.top().lower, 0.9 * best), best_r};
}

inline Point project(const PerturbedArc& arc, Point p) { return arc.at(distance(arc, p).foot_r); }

}  // namespace detail

/// A bounded open set described by oriented boundary arcs (domain on the
/// left), with an optional corner point where one or more wedges meet.
/// Immutable after construction; all queries are const and thread-safe.
class Domain {
 public:
  struct Nearest {
    double distance = 0.0;
    std::size_t arc = 0;
  };

  Domain(std::vector<BoundaryArc> arcs, Point corner, std::vector<Wedge> wedges, double rho0,
         std::optional<AngularInterval> sampling_sector = std::nullopt)
      : arcs_(std::move(arcs)),
        corner_(corner),
        wedges_(std::move(wedges)),
        rho0_(rho0),
        sampling_sector_(sampling_sector) {
    validate();
  }

  const std::vector<BoundaryArc>& arcs() const { return arcs_; }
  Point corner() const { return corner_; }
  const std::vector<Wedge>& wedges() const { return wedges_; }
  double rho0() const { return rho0_; }
  const std::optional<AngularInterval>& sampling_sector() const { return sampling_sector_; }

  /// Largest opening among the wedges (alpha of the dominant corner).
  double alpha() const {
    double a = 0.0;
    for (const auto& w : wedges_) a = std::max(a, w.alpha);
    return a;
  }

  double winding_number(Point p) const {
    double total = 0.0;
    for (const auto& arc : arcs_) {
      total += std::visit([&](const auto& a) { return detail::winding_angle(a, p); }, arc);
    }
    return total / kTwoPi;
  }

  bool contains(Point p) const { return std::abs(winding_number(p)) > 0.5; }

  /// Nearest arc and a lower bound on the distance to it (exact for
  /// segments and circular arcs).
  Nearest nearest(Point p) const {
    Nearest best{std::numeric_limits<double>::infinity(), 0};
    std::array<std::pair<double, std::size_t>, 8> pending;
    std::size_t n_pending = 0;
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
      const auto& arc = arcs_[i];
      double d;
      if (const auto* s = std::get_if<Segment>(&arc)) {
        d = detail::distance(*s, p);
      } else if (const auto* c = std::get_if<CircularArc>(&arc)) {
        d = detail::distance(*c, p);
      } else {
        const auto& a = std::get<PerturbedArc>(arc);
        const double rho = std::abs(p - a.origin);
        const double guess = std::abs(p - a.at(std::min(rho, a.length)));
        if (n_pending < pending.size()) {
          pending[n_pending++] = {guess, i};
          continue;
        }
        d = detail::distance(a, p, best.distance).lower;
      }
      if (d < best.distance) best = {d, i};
    }
    std::sort(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(n_pending));
    for (std::size_t k = 0; k < n_pending; ++k) {
      const std::size_t i = pending[k].second;
      const double d = detail::distance(std::get<PerturbedArc>(arcs_[i]), p, best.distance).lower;
      if (d < best.distance) best = {d, i};
    }
    return best;
  }

  double distance_to_boundary(Point p) const { return nearest(p).distance; }

  /// Closest point on the given arc.
  Point project(Point p, std::size_t arc) const {
    struct Visitor {
      Point p;
      Point operator()(const Segment& s) const { return detail::closest_on_segment(p, s.from, s.to); }
      Point operator()(const CircularArc& c) const { return detail::project(c, p); }
      Point operator()(const PerturbedArc& a) const { return detail::project(a, p); }
    };
    return std::visit(Visitor{p}, arcs_.at(arc));
  }

  /// Angular intervals of {t : corner + r e^{it} in the domain}.
  std::vector<AngularInterval> angular_intervals(double r) const { return angular_intervals_about(corner_, r); }

  /// Angular intervals of {t : about + r e^{it} in the domain}.
  std::vector<AngularInterval> angular_intervals_about(Point about, double r) const {
    require(r > 0.0 && std::isfinite(r), "radius must be positive");
    std::vector<double> angles;
    const double tol = 1e-13 * std::max(1.0, r);
    auto add_point = [&](Point z) {
      double a = std::arg(z - about);
      if (a < 0) a += kTwoPi;
      angles.push_back(a);
    };
    for (const auto& arc : arcs_) {
      if (const auto* s = std::get_if<Segment>(&arc)) {
        // Foot of the perpendicular, then half-chord: no cancellation at small r.
        const Point d = s->to - s->from;
        const double len2 = std::norm(d);
        if (len2 == 0.0) continue;
        // Segments emanating from the centre: exact ray angle.
        if (s->from == about || s->to == about) {
          const Point other = s->from == about ? s->to : s->from;
          if (r <= std::abs(other - about)) add_point(about + (other - about) * (r / std::abs(other - about)));
          continue;
        }
        const double t0 = detail::dot(about - s->from, d) / len2;
        const double h = std::abs(detail::cross(d, about - s->from)) / std::sqrt(len2);
        if (h > r) continue;
        const double half = std::sqrt((r - h) * (r + h) / len2);
        for (double t : {t0 - half, t0 + half}) {
          if (t >= -1e-15 && t <= 1.0 + 1e-15) add_point(s->from + std::clamp(t, 0.0, 1.0) * d);
        }
      } else if (const auto* c = std::get_if<CircularArc>(&arc)) {
        const Point dc = c->center - about;
        const double dist = std::abs(dc);
        if (dist < tol && std::abs(c->radius - r) < tol) continue;  // coincident circles
        if (dist < tol || dist > r + c->radius || dist < std::abs(r - c->radius)) continue;
        // Intersection of |z - corner| = r with |z - center| = radius.
        const double along = (r * r - c->radius * c->radius + dist * dist) / (2.0 * dist);
        const double h = std::sqrt(std::max(0.0, r * r - along * along));
        const Point u = dc / dist;
        for (double sgn : {-1.0, 1.0}) {
          const Point z = about + along * u + sgn * h * Point(-u.imag(), u.real());
          if (detail::on_arc_angle(*c, std::arg(z - c->center))) add_point(z);
        }
      } else {
        const auto& pa = std::get<PerturbedArc>(arc);
        if (std::abs(pa.origin - about) > tol) {
          throw ConfigError("perturbed arcs must start at the polar centre");
        }
        if (r <= pa.length) add_point(pa.at(r));
      }
    }
    std::sort(angles.begin(), angles.end());
    std::vector<double> unique;
    for (double a : angles) {
      if (unique.empty() || a - unique.back() > 1e-13) unique.push_back(a);
    }
    if (unique.size() > 1 && unique.front() + kTwoPi - unique.back() <= 1e-13) unique.pop_back();

    std::vector<AngularInterval> out;
    if (unique.empty()) {
      if (contains(about + Point(r, 0.0))) out.push_back({0.0, kTwoPi});
      return out;
    }
    const std::size_t n = unique.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double a = unique[i];
      const double b = (i + 1 < n) ? unique[i + 1] : unique[0] + kTwoPi;
      if (contains(about + std::polar(r, 0.5 * (a + b)))) {
        if (!out.empty() && std::abs(out.back().end - a) < 1e-13) {
          out.back().end = b;
        } else {
          out.push_back({a, b});
        }
      }
    }
    if (out.size() > 1 && std::abs(out.back().end - (out.front().start + kTwoPi)) < 1e-13) {
      out.front().start = out.back().start;
      out.front().end += kTwoPi;
      if (out.front().start >= kTwoPi) {
        out.front().start -= kTwoPi;
        out.front().end -= kTwoPi;
      }
      out.pop_back();
    }
    return out;
  }

  /// Total angular measure of the domain on the circle of radius r.
  double angular_measure(double r) const { return angular_measure_about(corner_, r); }

  double angular_measure_about(Point about, double r) const {
    double total = 0.0;
    for (const auto& iv : angular_intervals_about(about, r)) total += iv.length();
    return total;
  }

  /// Theta_j(r) for every wedge: the angular width of the component of the
  /// domain on |z - corner| = r that contains the wedge bisector.
  std::vector<double> theta_profiles(double r) const {
    require(!wedges_.empty(), "domain has no corner");
    require(r > 0.0 && r <= rho0_, "theta profile radius must lie in (0, rho0]");
    const auto intervals = angular_intervals(r);
    std::vector<double> out;
    out.reserve(wedges_.size());
    for (const auto& w : wedges_) {
      const auto it = std::find_if(intervals.begin(), intervals.end(),
                                   [&](const AngularInterval& iv) { return iv.contains(w.bisector()); });
      if (it == intervals.end()) throw NumericalError("wedge bisector outside the domain");
      out.push_back(it->length());
    }
    return out;
  }

  double theta_profile(double r) const { return theta_profiles(r).front(); }

  /// Point of C+ or C- at distance r from the corner.
  Point corner_parametrization(Side side, double r, std::size_t wedge = 0) const {
    require(wedge < wedges_.size(), "wedge index out of range");
    require(r >= 0.0 && r <= rho0_, "parametrization radius must lie in [0, rho0]");
    if (r == 0.0) return corner_;
    const auto& w = wedges_[wedge];
    const auto& arc = arcs_[side == Side::plus ? w.plus_arc : w.minus_arc];
    if (const auto* s = std::get_if<Segment>(&arc)) {
      const bool from_corner = std::abs(s->from - corner_) <= std::abs(s->to - corner_);
      const Point far = from_corner ? s->to : s->from;
      const double len = std::abs(far - corner_);
      if (r > len) throw ConfigError("side arc shorter than requested radius");
      return corner_ + r * (far - corner_) / len;
    }
    if (const auto* p = std::get_if<PerturbedArc>(&arc)) {
      if (r > p->length) throw ConfigError("side arc shorter than requested radius");
      return p->at(r);
    }
    // Circular side through the corner: bisect on the arc parameter.
    const auto& c = std::get<CircularArc>(arc);
    const Point a = c.center + std::polar(c.radius, c.start);
    const double dir = std::abs(a - corner_) < 1e-12 ? 1.0 : -1.0;
    const double s0 = dir > 0 ? 0.0 : 1.0;
    auto at = [&](double s) { return c.center + std::polar(c.radius, c.start + s * c.sweep); };
    double lo = s0, hi = 1.0 - s0;
    if (std::abs(at(hi) - corner_) < r) throw ConfigError("side arc shorter than requested radius");
    for (int i = 0; i < 200 && std::abs(hi - lo) > 1e-16; ++i) {
      const double mid = 0.5 * (lo + hi);
      (std::abs(at(mid) - corner_) < r ? lo : hi) = mid;
    }
    return at(0.5 * (lo + hi));
  }

  /// Upper bound on |z - corner| over the boundary.
  double max_radius() const { return max_radius_about(corner_); }

  double max_radius_about(Point about) const {
    double best = 0.0;
    for (const auto& arc : arcs_) {
      best = std::max({best, std::abs(arc_start(arc) - about), std::abs(arc_end(arc) - about)});
      if (const auto* c = std::get_if<CircularArc>(&arc)) {
        const Point dc = c->center - about;
        const double far_angle = std::norm(dc) > 0 ? std::arg(dc) : c->start;
        if (detail::on_arc_angle(*c, far_angle)) best = std::max(best, std::abs(dc) + c->radius);
      } else if (const auto* p = std::get_if<PerturbedArc>(&arc)) {
        best = std::max(best, std::abs(p->origin - about) + p->length);
      }
    }
    return best;
  }

  /// Radii at which the angular profile about `about` may fail to be smooth:
  /// distances to arc endpoints and to extremal points of each arc.
  std::vector<double> critical_radii(Point about) const {
    std::vector<double> out{rho0_};
    for (const auto& arc : arcs_) {
      out.push_back(std::abs(arc_start(arc) - about));
      out.push_back(std::abs(arc_end(arc) - about));
      if (const auto* s = std::get_if<Segment>(&arc)) {
        out.push_back(std::abs(about - detail::closest_on_segment(about, s->from, s->to)));
      } else if (const auto* c = std::get_if<CircularArc>(&arc)) {
        const double dc = std::abs(c->center - about);
        out.push_back(std::abs(dc - c->radius));
        out.push_back(dc + c->radius);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::remove_if(out.begin(), out.end(), [](double r) { return !(r > 0.0); }), out.end());
    return out;
  }

  /// Diameter of a bounding box of the boundary.
  double diameter() const {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& arc : arcs_) {
      for (int k = 0; k <= 64; ++k) {
        const Point z = sample_arc(arc, k / 64.0);
        xmin = std::min(xmin, z.real());
        xmax = std::max(xmax, z.real());
        ymin = std::min(ymin, z.imag());
        ymax = std::max(ymax, z.imag());
      }
    }
    return std::hypot(xmax - xmin, ymax - ymin);
  }

  /// Which wedge (if any) owns this arc as one of its sides.
  std::optional<std::size_t> wedge_of_arc(std::size_t arc) const {
    for (std::size_t j = 0; j < wedges_.size(); ++j) {
      if (wedges_[j].plus_arc == arc || wedges_[j].minus_arc == arc) return j;
    }
    return std::nullopt;
  }

  /// The component U_j of the domain inside B_{rho0}(corner), as a
  /// standalone single-corner domain: clipped sides plus the arc |z| = rho0.
  Domain wedge_component(std::size_t j) const {
    require(j < wedges_.size(), "wedge index out of range");
    const auto& w = wedges_[j];
    auto clipped = [&](std::size_t idx, bool outward) -> BoundaryArc {
      const auto& arc = arcs_[idx];
      if (const auto* p = std::get_if<PerturbedArc>(&arc)) {
        PerturbedArc q = *p;
        q.length = rho0_;
        q.outward = outward;
        return q;
      }
      if (!std::holds_alternative<Segment>(arc)) {
        throw ConfigError("wedge sides must be segments or perturbed arcs to split off a component");
      }
      const Point tip = corner_parametrization(outward ? Side::plus : Side::minus, rho0_, j);
      return outward ? Segment{corner_, tip} : Segment{tip, corner_};
    };
    const Point plus_tip = corner_parametrization(Side::plus, rho0_, j);
    const Point minus_tip = corner_parametrization(Side::minus, rho0_, j);
    const double t_plus = detail::arg_near(plus_tip - corner_, w.phi);
    double t_minus = detail::arg_near(minus_tip - corner_, w.phi + kPi * w.alpha);
    if (t_minus <= t_plus) t_minus += kTwoPi;
    std::vector<BoundaryArc> arcs{clipped(w.plus_arc, true),
                                  CircularArc{corner_, rho0_, t_plus, t_minus - t_plus},
                                  clipped(w.minus_arc, false)};
    Wedge local = w;
    local.plus_arc = 0;
    local.minus_arc = 2;
    return Domain(std::move(arcs), corner_, {local}, rho0_,
                  AngularInterval{std::fmod(t_plus + kTwoPi, kTwoPi),
                                  std::fmod(t_plus + kTwoPi, kTwoPi) + (t_minus - t_plus)});
  }

  static Point sample_arc(const BoundaryArc& arc, double s) {
    struct Visitor {
      double s;
      Point operator()(const Segment& seg) const { return seg.from + s * (seg.to - seg.from); }
      Point operator()(const CircularArc& c) const { return c.center + std::polar(c.radius, c.start + s * c.sweep); }
      Point operator()(const PerturbedArc& p) const { return p.at((p.outward ? s : 1.0 - s) * p.length); }
    };
    return std::visit(Visitor{s}, arc);
  }

 private:
  void validate() const {
    require(!arcs_.empty(), "domain needs at least one boundary arc");
    require(std::isfinite(corner_.real()) && std::isfinite(corner_.imag()), "corner must be finite");
    double scale = 0.0;
    for (const auto& arc : arcs_) {
      const Point a = arc_start(arc), b = arc_end(arc);
      require(std::isfinite(a.real()) && std::isfinite(a.imag()) && std::isfinite(b.real()) &&
                  std::isfinite(b.imag()),
              "arc endpoints must be finite");
      scale = std::max({scale, std::abs(a - corner_), std::abs(b - corner_)});
      if (const auto* c = std::get_if<CircularArc>(&arc)) {
        require(c->radius > 0.0, "circular arc radius must be positive");
        require(c->sweep != 0.0 && std::abs(c->sweep) <= kTwoPi + 1e-12, "circular arc sweep out of range");
      } else if (const auto* p = std::get_if<PerturbedArc>(&arc)) {
        require(p->kappa >= 0.0, "perturbation amplitude kappa must be >= 0");
        require(p->gamma > 0.0 && p->gamma <= 1.0, "Hoelder exponent gamma must lie in (0, 1]");
        require(p->length > 0.0, "perturbed arc length must be positive");
        require(p->kappa * std::pow(p->length, p->gamma) < kPi, "perturbed arc turns too far");
      }
    }
    // Closure: every arc end must be the start of another arc.
    const double tol = 1e-9 * std::max(1.0, scale);
    std::vector<bool> used(arcs_.size(), false);
    for (const auto& arc : arcs_) {
      const Point e = arc_end(arc);
      bool found = false;
      for (std::size_t i = 0; i < arcs_.size() && !found; ++i) {
        if (!used[i] && std::abs(arc_start(arcs_[i]) - e) <= tol) {
          used[i] = true;
          found = true;
        }
      }
      if (!found) throw ConfigError("boundary does not close up");
    }
    if (sampling_sector_) {
      require(sampling_sector_->length() > 0.0 && sampling_sector_->length() <= kTwoPi + 1e-12,
              "sampling sector must have positive width at most 2 pi");
    }
    if (wedges_.empty()) return;

    require(rho0_ > 0.0, "rho0 must be positive");
    double total_alpha = 0.0;
    for (const auto& w : wedges_) {
      require(w.alpha > 0.0 && w.alpha <= 2.0, "opening alpha must lie in (0, 2]");
      require(w.plus_arc < arcs_.size() && w.minus_arc < arcs_.size(), "wedge side index out of range");
      require(w.c1 >= 0.0 && w.gamma > 0.0 && w.gamma <= 1.0, "wedge constants out of range");
      for (std::size_t idx : {w.plus_arc, w.minus_arc}) {
        const Point a = arc_start(arcs_[idx]), b = arc_end(arcs_[idx]);
        require(std::min(std::abs(a - corner_), std::abs(b - corner_)) <= tol,
                "wedge sides must end at the corner");
      }
      total_alpha += w.alpha;
    }
    if (wedges_.size() > 1) require(total_alpha < 2.0, "wedges need positive gaps: sum of alpha_j must be < 2");

    // Bisector rays inside, and one interval per wedge on every small circle.
    for (double frac : {1e-6, 1e-3, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
      const double r = frac * rho0_;
      for (const auto& w : wedges_) {
        if (!contains(corner_ + std::polar(r, w.bisector()))) {
          throw ConfigError("wedge bisector must lie inside the domain for rho < rho0");
        }
      }
      const auto intervals = angular_intervals(r);
      if (intervals.size() != wedges_.size()) {
        throw ConfigError("rho0 too large: the domain meets a small circle around the corner in " +
                          std::to_string(intervals.size()) + " arcs, expected " +
                          std::to_string(wedges_.size()));
      }
    }
  }

  std::vector<BoundaryArc> arcs_;
  Point corner_;
  std::vector<Wedge> wedges_;
  double rho0_;
  std::optional<AngularInterval> sampling_sector_;
};

// ---------------------------------------------------------------------------
// Factories for the domains used throughout the toolkit.

inline Domain make_disk(Point center, double radius) {
  require(radius > 0.0, "disk radius must be positive");
  return Domain({CircularArc{center, radius, 0.0, kTwoPi}}, center, {}, 0.0);
}

/// Circular sector {apex + r e^{it}: 0 < r < radius, phi < t < phi + pi alpha}.
inline Domain make_sector(double alpha, double radius, double phi = 0.0, Point apex = {}) {
  require(alpha > 0.0 && alpha <= 2.0, "opening alpha must lie in (0, 2]");
  require(radius > 0.0, "sector radius must be positive");
  const Point tip_plus = apex + std::polar(radius, phi);
  const Point tip_minus = apex + std::polar(radius, phi + kPi * alpha);
  std::vector<BoundaryArc> arcs{Segment{apex, tip_plus}, CircularArc{apex, radius, phi, kPi * alpha},
                                Segment{tip_minus, apex}};
  double start = std::fmod(phi, kTwoPi);
  if (start < 0) start += kTwoPi;
  return Domain(std::move(arcs), apex, {Wedge{phi, alpha, 0.0, 1.0, 0, 2}}, radius,
                AngularInterval{start, start + kPi * alpha});
}

/// Wedge of opening pi alpha whose sides are perturbed arcs:
/// C+ : r e^{i(phi + kappa_plus r^gamma)}, C- : r e^{i(phi + pi alpha + kappa_minus r^gamma)},
/// closed by the arc |z - apex| = radius. Theta(r) = pi alpha + (kappa_minus - kappa_plus) r^gamma.
inline Domain make_perturbed_wedge(double alpha, double radius, double kappa_plus, double kappa_minus,
                                   double gamma, double phi = 0.0, Point apex = {}) {
  require(alpha > 0.0 && alpha <= 2.0, "opening alpha must lie in (0, 2]");
  require(radius > 0.0, "wedge radius must be positive");
  require(kappa_plus >= 0.0 && kappa_minus >= 0.0, "perturbation amplitudes must be >= 0");
  const double turn = (kappa_minus - kappa_plus) * std::pow(radius, gamma);
  require(kPi * alpha + std::max(0.0, turn) <= kTwoPi, "perturbed sides overlap (no gap left at the cusp)");
  BoundaryArc plus = kappa_plus > 0 ? BoundaryArc{PerturbedArc{apex, phi, kappa_plus, gamma, radius, true}}
                                    : BoundaryArc{Segment{apex, apex + std::polar(radius, phi)}};
  BoundaryArc minus =
      kappa_minus > 0 ? BoundaryArc{PerturbedArc{apex, phi + kPi * alpha, kappa_minus, gamma, radius, false}}
                      : BoundaryArc{Segment{apex + std::polar(radius, phi + kPi * alpha), apex}};
  const double t_plus = phi + kappa_plus * std::pow(radius, gamma);
  const double t_minus = phi + kPi * alpha + kappa_minus * std::pow(radius, gamma);
  std::vector<BoundaryArc> arcs{plus, CircularArc{apex, radius, t_plus, t_minus - t_plus}, minus};
  const double c1 = std::max(0.0, kappa_minus - kappa_plus) / (kPi * alpha);
  double start = std::fmod(phi, kTwoPi);
  if (start < 0) start += kTwoPi;
  const double width = std::min(kTwoPi, kPi * alpha + kappa_minus * std::pow(radius, gamma));
  return Domain(std::move(arcs), apex, {Wedge{phi, alpha, c1, gamma, 0, 2}}, radius,
                AngularInterval{start, start + width});
}

struct WedgeSpec {
  double phi = 0.0;
  double alpha = 0.5;
};

/// Disk of radius `outer` around the corner with closed separating sectors
/// of radius `separator_radius` removed between consecutive wedges, so that
/// the domain inside B_{rho0} splits into the given wedges while the wedges
/// stay connected through the outer annulus. Wedges are listed by
/// increasing phi.
inline Domain make_multi_wedge_disk(const std::vector<WedgeSpec>& specs, double outer,
                                    double separator_radius, double rho0, Point apex = {}) {
  require(!specs.empty(), "need at least one wedge");
  require(separator_radius > 0.0 && separator_radius < outer, "separator radius must lie in (0, outer)");
  require(rho0 > 0.0 && rho0 <= separator_radius, "rho0 must lie in (0, separator radius]");
  double total = 0.0;
  for (std::size_t j = 0; j < specs.size(); ++j) {
    require(specs[j].alpha > 0.0, "opening alpha must be positive");
    total += specs[j].alpha;
    if (j + 1 < specs.size()) {
      require(specs[j].phi + kPi * specs[j].alpha < specs[j + 1].phi, "wedges must be disjoint and ordered");
    }
  }
  require(specs.back().phi + kPi * specs.back().alpha < specs.front().phi + kTwoPi,
          "wedges must leave a gap before wrapping around");
  require(total < 2.0, "sum of alpha_j must be < 2");

  std::vector<BoundaryArc> arcs{CircularArc{apex, outer, 0.0, kTwoPi}};
  const std::size_t m = specs.size();
  std::vector<Wedge> wedges(m);
  // Separator k spans from the end of wedge k to the start of wedge k+1;
  // holes are traversed clockwise.
  for (std::size_t k = 0; k < m; ++k) {
    const double gap_start = specs[k].phi + kPi * specs[k].alpha;
    const double gap_end = (k + 1 < m) ? specs[k + 1].phi : specs[0].phi + kTwoPi;
    const std::size_t out_idx = arcs.size();
    arcs.push_back(Segment{apex, apex + std::polar(separator_radius, gap_end)});
    arcs.push_back(CircularArc{apex, separator_radius, gap_end, gap_start - gap_end});
    arcs.push_back(Segment{apex + std::polar(separator_radius, gap_start), apex});
    wedges[k].minus_arc = out_idx + 2;
    wedges[(k + 1) % m].plus_arc = out_idx;
  }
  for (std::size_t j = 0; j < m; ++j) {
    wedges[j].phi = specs[j].phi;
    wedges[j].alpha = specs[j].alpha;
  }
  return Domain(std::move(arcs), apex, std::move(wedges), rho0);
}

}  // namespace balayage
