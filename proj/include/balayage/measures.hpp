#pragma once

// Source measures d mu = m(|z - z0|) |z - z0|^{2b-2} d^2z restricted to a
// domain, their masses, and deterministic samplers.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace balayage {

/// Adaptive Gauss-Kronrod on [a, b] after rescaling to [0, 1]; boost's
/// termination test compares errors of the unit-interval rule against the
/// scaled estimate, which never terminates early on short intervals.
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-12, unsigned depth = 15) {
  if (!(b > a)) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  const double w = b - a;
  return w * gauss_kronrod<double, 31>::integrate([&](double t) { return f(a + w * t); }, 0.0, 1.0, depth, tol);
}

/// Radial multiplier m(r) with m -> 1 (or a constant) at the centre.
struct Multiplier {
  enum class Kind { none, power, constant };
  Kind kind = Kind::none;
  double c = 0.0;      // power: m = 1 + c r^p
  double p = 1.0;
  double value = 1.0;  // constant: m = value

  static Multiplier none() { return {}; }
  static Multiplier power(double c, double p) { return {Kind::power, c, p, 1.0}; }
  static Multiplier constant(double v) { return {Kind::constant, 0.0, 1.0, v}; }

  double operator()(double r) const {
    switch (kind) {
      case Kind::none: return 1.0;
      case Kind::power: return 1.0 + c * std::pow(r, p);
      case Kind::constant: return value;
    }
    return 1.0;
  }

  /// sup_{0 < r <= rho} |m(r) - 1|.
  double deviation(double rho) const {
    switch (kind) {
      case Kind::none: return 0.0;
      case Kind::power: return std::abs(c) * std::pow(rho, p);
      case Kind::constant: return std::abs(value - 1.0);
    }
    return 0.0;
  }
};

inline std::string to_string(Multiplier::Kind k) {
  switch (k) {
    case Multiplier::Kind::none: return "none";
    case Multiplier::Kind::power: return "power";
    case Multiplier::Kind::constant: return "constant";
  }
  return "none";
}

struct MeasureSample {
  Point point;
  double weight = 1.0;
};

/// Optional radial importance sampling: a defensive mixture of the natural
/// radial law (prob 1 - fraction) and the heavier-at-the-centre law with
/// exponent `b` (prob fraction). fraction = 0 is plain inverse-CDF sampling.
struct SamplingPlan {
  double fraction = 0.0;
  double b = 0.05;
};

class RadialPowerMeasure {
 public:
  RadialPowerMeasure(Domain domain, double b, Point center, Multiplier multiplier = {},
                     std::optional<double> outer_cap = std::nullopt,
                     double support_radius = std::numeric_limits<double>::infinity(), SamplingPlan plan = {})
      : domain_(std::move(domain)),
        b_(b),
        center_(center),
        multiplier_(multiplier),
        outer_cap_(outer_cap),
        plan_(plan) {
    require(b > 0.0 && std::isfinite(b), "b must be positive (the measure diverges at the centre otherwise)");
    require(std::isfinite(center.real()) && std::isfinite(center.imag()), "centre must be finite");
    require(support_radius > 0.0, "support radius must be positive");
    require(plan.fraction >= 0.0 && plan.fraction < 1.0, "importance fraction must lie in [0, 1)");
    require(plan.fraction == 0.0 || (plan.b > 0.0 && plan.b < b), "importance exponent must lie in (0, b)");
    if (multiplier.kind == Multiplier::Kind::constant) require(multiplier.value > 0.0, "multiplier must be positive");
    if (outer_cap) require(*outer_cap >= 0.0, "outer cap must be >= 0");
    r_max_ = std::min(domain_.max_radius_about(center_), support_radius);
    require(r_max_ > 0.0, "measure support is empty");
    if (domain_.sampling_sector() && std::abs(center_ - domain_.corner()) == 0.0) {
      sector_ = *domain_.sampling_sector();
    } else {
      sector_ = {0.0, kTwoPi};
    }
    breaks_ = domain_.critical_radii(center_);
    if (!domain_.wedges().empty()) breaks_.push_back(domain_.rho0());
    std::erase_if(breaks_, [&](double r) { return r >= r_max_; });
    breaks_.push_back(r_max_);
    std::sort(breaks_.begin(), breaks_.end());
    breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
    if (multiplier.kind == Multiplier::Kind::power) {
      require(multiplier.p > 0.0, "power multiplier exponent must be positive");
      require(multiplier(r_max_) > 0.0, "power multiplier must stay positive on the support");
    }
    cap_scale_ = 1.0;
    if (outer_cap_ && !domain_.wedges().empty()) {
      const double outside = radial_integral(b_, [&](double r) { return r > domain_.rho0() ? weight_of(r) : 0.0; });
      if (outside > *outer_cap_) cap_scale_ = *outer_cap_ / outside;
    }
    reference_mass_ = radial_integral(b_, [](double) { return 1.0; });
    total_mass_ = radial_integral(b_, [&](double r) { return weight_of(r); });
    if (plan_.fraction > 0.0) {
      // Acceptance probabilities of the two radial laws on the polar box.
      const double accept_natural = reference_mass_ / box_mass(b_);
      const double accept_heavy = radial_integral(plan_.b, [](double) { return 1.0; }) / box_mass(plan_.b);
      accept_ratio_ = ((1.0 - plan_.fraction) * accept_natural + plan_.fraction * accept_heavy) / accept_natural;
    }
  }

  const Domain& domain() const { return domain_; }
  double b() const { return b_; }
  Point center() const { return center_; }
  const Multiplier& multiplier() const { return multiplier_; }
  const std::optional<double>& outer_cap() const { return outer_cap_; }
  const SamplingPlan& plan() const { return plan_; }
  double support_radius() const { return r_max_; }

  /// Radial weight m(r) times the outer-cap factor.
  double weight_of(double r) const {
    double w = multiplier_(r);
    if (!domain_.wedges().empty() && r > domain_.rho0()) w *= cap_scale_;
    return w;
  }

  double density(Point z) const {
    const double r = std::abs(z - center_);
    if (r == 0.0 || r > r_max_ || !domain_.contains(z)) return 0.0;
    return weight_of(r) * std::pow(r, 2.0 * b_ - 2.0);
  }

  /// mu(domain).
  double total_mass() const { return total_mass_; }

  /// Mass of the plain power density r^{2b-2} on the support; sample weights
  /// satisfy E[weight] = total_mass / reference_mass.
  double reference_mass() const { return reference_mass_; }

  /// mu(B_R(center)).
  double mass_within(double R) const {
    return radial_integral(b_, [&](double r) { return r <= R ? weight_of(r) : 0.0; }, R);
  }

  /// Integral over the support of g(r) r^{2b'-1} Theta(r) dr, with
  /// Theta(r) the angular measure of the domain at radius r.
  template <class G>
  double radial_integral(double b_exp, G&& g, double upper = std::numeric_limits<double>::infinity()) const {
    const double s = 2.0 * b_exp;
    const double top = std::min(upper, r_max_);
    double total = 0.0, lo = 0.0;
    std::vector<double> cuts;
    for (double r : breaks_) if (r < top) cuts.push_back(r);
    cuts.push_back(top);
    for (double hi : cuts) {
      if (hi <= lo) continue;
      // u = r^{2b'}: r^{2b'-1} dr = du / (2b').
      auto f = [&](double u) {
        const double r = std::pow(u, 1.0 / s);
        if (!(r > 0.0)) return 0.0;
        return g(r) * domain_.angular_measure_about(center_, r) / s;
      };
      total += integrate(f, std::pow(lo, s), std::pow(hi, s));
      lo = hi;
    }
    return total;
  }

  /// The i-th draw of the stream with the given seed.
  MeasureSample sample_one(std::uint64_t seed, std::uint64_t index) const {
    StreamRng rng(seed, index);
    const double width = sector_.length();
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      const double u = rng.uniform();
      double r;
      if (plan_.fraction > 0.0 && rng.uniform() < plan_.fraction) {
        r = r_max_ * std::pow(u, 1.0 / (2.0 * plan_.b));
      } else {
        r = r_max_ * std::pow(u, 1.0 / (2.0 * b_));
      }
      const Point z = center_ + std::polar(r, sector_.start + width * rng.uniform());
      if (!domain_.contains(z)) continue;
      double w = weight_of(r);
      if (plan_.fraction > 0.0) {
        // f/g for the radial laws on [0, r_max], both normalised.
        const double x = r / r_max_;
        const double f = 2.0 * b_ * std::pow(x, 2.0 * b_ - 1.0);
        const double h = 2.0 * plan_.b * std::pow(x, 2.0 * plan_.b - 1.0);
        w *= f / ((1.0 - plan_.fraction) * f + plan_.fraction * h) * accept_ratio_;
      }
      return {z, w};
    }
    throw NumericalError("sampler rejection efficiency below 1e-3 (no acceptance in " +
                         std::to_string(kMaxAttempts) + " attempts)");
  }

  /// Fraction of polar-box proposals that land in the domain.
  double acceptance_rate() const { return reference_mass_ / box_mass(b_); }

  std::vector<MeasureSample> sample(std::size_t n, std::uint64_t seed) const {
    if (n > 0 && acceptance_rate() < 1e-3) {
      throw NumericalError("sampler rejection efficiency " + std::to_string(acceptance_rate()) +
                           " below 1e-3: the polar box around the centre is mostly outside the domain");
    }
    std::vector<MeasureSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(seed, i));
    return out;
  }

  /// Checks |mu(A) - int_A r^{2b-2}| <= eps int_A r^{2b-2} on annular
  /// sectors A = {rho 2^{-k-1} < r < rho 2^{-k}} x (quarters of the angular
  /// range), k < trials. Radial multipliers make the ratio a weighted
  /// average of m over the annulus.
  bool verify_one_plus_o1(double eps, double rho, int trials) const {
    require(eps > 0.0, "epsilon must be positive");
    require(rho > 0.0, "rho must be positive");
    require(trials >= 1, "need at least one scale");
    if (!domain_.wedges().empty()) require(rho <= domain_.rho0(), "rho must not exceed rho0");
    for (int k = 0; k < trials; ++k) {
      const double r2 = rho * std::ldexp(1.0, -k), r1 = 0.5 * r2;
      for (int q = 0; q < 4; ++q) {
        const double a1 = sector_.start + 0.25 * q * sector_.length();
        const double a2 = a1 + 0.25 * sector_.length();
        auto window = [&](double r) {
          double total = 0.0;
          for (const auto& iv : domain_.angular_intervals_about(center_, r)) {
            for (double shift : {-kTwoPi, 0.0, kTwoPi}) {
              total += std::max(0.0, std::min(iv.end + shift, a2) - std::max(iv.start + shift, a1));
            }
          }
          return total;
        };
        const double s = 2.0 * b_;
        auto integrand = [&](double u, bool weighted) {
          const double r = std::pow(u, 1.0 / s);
          return (weighted ? weight_of(r) : 1.0) * window(r) / s;
        };
        const double lo = std::pow(r1, s), hi = std::pow(r2, s);
        const double plain = integrate([&](double u) { return integrand(u, false); }, lo, hi);
        const double mass = integrate([&](double u) { return integrand(u, true); }, lo, hi);
        if (std::abs(mass - plain) > eps * plain) return false;
      }
    }
    return true;
  }

 private:
  static constexpr int kMaxAttempts = 1'000'000;

  double box_mass(double b_exp) const { return sector_.length() * std::pow(r_max_, 2.0 * b_exp) / (2.0 * b_exp); }

  Domain domain_;
  double b_;
  Point center_;
  Multiplier multiplier_;
  std::optional<double> outer_cap_;
  SamplingPlan plan_;
  double r_max_ = 0.0;
  AngularInterval sector_;
  std::vector<double> breaks_;
  double cap_scale_ = 1.0;
  double reference_mass_ = 0.0;
  double total_mass_ = 0.0;
  double accept_ratio_ = 1.0;
};

/// The measure of a corner domain centred at its corner.
inline RadialPowerMeasure corner_measure(const Domain& domain, double b, Multiplier m = {}, SamplingPlan plan = {}) {
  return RadialPowerMeasure(domain, b, domain.corner(), m, std::nullopt, std::numeric_limits<double>::infinity(),
                            plan);
}

}  // namespace balayage
