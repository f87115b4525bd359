#pragma once

// Exact balayage of |z|^{2b-2} d^2z from the sector
// S = {0 < |z| < A, 0 < arg z < pi alpha} onto its boundary, restricted to
// the two radial sides. With x = R/A, s = 2b and q_j = (2j+1)/alpha,
//
//   nu(dS ∩ B_R) = (8 A^s / (alpha pi)) sum_j [x^s/s - x^{q_j}/q_j] / (q_j^2 - s^2),
//
// and each side carries density (4 A^s/(alpha pi r)) sum_j (x^s - x^{q_j})/(q_j^2 - s^2).
// Terms with q_j close to s are evaluated as divided differences, which
// reproduces the logarithmic branches (2b = (2k+1)/alpha) continuously.

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "error.hpp"

namespace balayage {

enum class Regime { generic, log, resonant };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::generic: return "generic";
    case Regime::log: return "log";
    case Regime::resonant: return "resonant";
  }
  return "unknown";
}

struct SectorSpec {
  double alpha = 1.0;
  double a_alpha = 1.0;  // sector radius
  double b = 0.25;
};

struct SeriesEval {
  double value = 0.0;
  double truncation_bound = 0.0;
  std::size_t terms = 0;
  Regime regime = Regime::generic;
};

struct TanSum {
  double partial = 0.0;
  double target = 0.0;
  double tail_bound = 0.0;
};

namespace detail {

inline void check_spec(const SectorSpec& spec) {
  require(spec.alpha > 0.0 && spec.alpha <= 2.0, "alpha must lie in (0, 2]");
  require(spec.a_alpha > 0.0 && std::isfinite(spec.a_alpha), "sector radius a_alpha must be positive");
  require(spec.b > 0.0 && std::isfinite(spec.b), "b must be positive");
}

/// expm1(d L) / d, continuous through d = 0.
inline double expm1_ratio(double d, double L) {
  const double dl = d * L;
  if (std::abs(dl) < 1e-8) return L * (1.0 + 0.5 * dl);
  return std::expm1(dl) / d;
}

/// Sum over j >= J of 1/(q_j^2 - s^2), for q_J > s.
inline double reciprocal_tail(double alpha, double s, std::size_t J) {
  const double X = alpha * s;
  const double a2 = alpha * alpha;
  const double m = static_cast<double>(J) + 0.5;
  if (X < 1e-3) {
    return 0.25 * a2 * (boost::math::trigamma(m) + X * X * boost::math::polygamma(3, m) / 24.0);
  }
  return a2 / (4.0 * X) *
         (boost::math::digamma(static_cast<double>(J) + 0.5 * (1.0 + X)) -
          boost::math::digamma(static_cast<double>(J) + 0.5 * (1.0 - X)));
}

inline constexpr std::size_t kMaxTerms = 50'000'000;

}  // namespace detail

inline Regime classify(const SectorSpec& spec) {
  detail::check_spec(spec);
  const double k = std::round((2.0 * spec.b * spec.alpha - 1.0) / 2.0);
  if (k >= 0.0 && std::abs(2.0 * spec.b - (1.0 + 2.0 * k) / spec.alpha) < 1e-9) {
    return k == 0.0 ? Regime::log : Regime::resonant;
  }
  return Regime::generic;
}

/// mu_b(S) = pi alpha A^{2b} / (2b).
inline double sector_measure_mass(const SectorSpec& spec) {
  detail::check_spec(spec);
  return std::numbers::pi * spec.alpha * std::pow(spec.a_alpha, 2.0 * spec.b) / (2.0 * spec.b);
}

/// nu_b(dS ∩ B_R(0)), both radial sides, with a certified absolute
/// truncation bound <= tol.
inline SeriesEval sector_mass(const SectorSpec& spec, double R, double tol = 1e-14) {
  detail::check_spec(spec);
  require(R > 0.0, "R must be positive");
  require(R <= 0.99 * spec.a_alpha, "R must not exceed 0.99 a_alpha (series evaluation refused near the arc)");
  require(tol > 0.0, "tolerance must be positive");
  const double alpha = spec.alpha, A = spec.a_alpha, s = 2.0 * spec.b;
  const double x = R / A, L = std::log(x);
  const double xs = std::pow(x, s);
  const double scale = 8.0 * std::pow(A, s) / (alpha * std::numbers::pi);
  const std::size_t J1 = static_cast<std::size_t>(std::ceil(0.5 * alpha * s));

  double head = 0.0;
  for (std::size_t j = 0; j < J1; ++j) {
    const double q = (2.0 * j + 1.0) / alpha;
    const double d = q - s;
    head += xs / (s * q * (q + s)) * (1.0 - s * detail::expm1_ratio(d, L));
  }
  const double u = detail::reciprocal_tail(alpha, s, J1);

  // v = sum_{j >= J1} x^q / (q (q^2 - s^2)): geometric with ratio <= x^{2/alpha}.
  const double ratio = std::pow(x, 2.0 / alpha);
  double v = 0.0, tail = 0.0;
  std::size_t j = J1;
  for (; j < detail::kMaxTerms; ++j) {
    const double q = (2.0 * j + 1.0) / alpha;
    const double term = std::exp(q * L) / (q * (q - s) * (q + s));
    tail = scale * term / (1.0 - ratio);
    if (tail <= tol) break;
    v += term;
  }
  if (j == detail::kMaxTerms) throw NumericalError("sector series did not reach the requested tolerance");
  return {scale * (head + xs / s * u - v), tail, j, classify(spec)};
}

/// dnu_b/|dz| at distance r along either radial side.
inline SeriesEval sector_density(const SectorSpec& spec, double r, double tol = 1e-14) {
  detail::check_spec(spec);
  require(r > 0.0, "r must be positive");
  require(r < spec.a_alpha, "density series diverges for r >= a_alpha");
  require(tol > 0.0, "tolerance must be positive");
  const double alpha = spec.alpha, A = spec.a_alpha, s = 2.0 * spec.b;
  const double x = r / A, L = std::log(x);
  const double xs = std::pow(x, s);
  const double scale = 4.0 * std::pow(A, s) / (alpha * std::numbers::pi * r);
  const std::size_t J1 = static_cast<std::size_t>(std::ceil(0.5 * alpha * s));

  double head = 0.0;
  for (std::size_t j = 0; j < J1; ++j) {
    const double q = (2.0 * j + 1.0) / alpha;
    const double d = q - s;
    head -= xs * detail::expm1_ratio(d, L) / (q + s);
  }
  const double u = detail::reciprocal_tail(alpha, s, J1);
  const double ratio = std::pow(x, 2.0 / alpha);
  double v = 0.0, tail = 0.0;
  std::size_t j = J1;
  for (; j < detail::kMaxTerms; ++j) {
    const double q = (2.0 * j + 1.0) / alpha;
    const double term = std::exp(q * L) / ((q - s) * (q + s));
    tail = scale * term / (1.0 - ratio);
    if (tail <= tol) break;
    v += term;
  }
  if (j == detail::kMaxTerms) throw NumericalError("density series did not reach the requested tolerance");
  return {scale * (head + xs * u - v), tail, j, classify(spec)};
}

/// Partial sum of sum_{j<J} 1/(((2j+1)/alpha)^2 - (2b)^2) against its closed
/// form alpha pi tan(pi alpha b) / (8b), with an integral-test tail bound.
inline TanSum tan_sum_identity(double alpha, double b, std::size_t J) {
  require(alpha > 0.0 && alpha <= 2.0, "alpha must lie in (0, 2]");
  require(b > 0.0, "b must be positive");
  require(J >= 1, "need at least one term");
  const double X = 2.0 * b * alpha;
  require(X < 1.0, "tan identity needs 2b < 1/alpha (resonance at 2b = 1/alpha)");
  const double a2 = alpha * alpha;
  // Smallest terms first, with compensation.
  double sum = 0.0, carry = 0.0;
  for (std::size_t k = J; k-- > 0;) {
    const double o = 2.0 * static_cast<double>(k) + 1.0;
    const double term = a2 / ((o - X) * (o + X)) - carry;
    const double next = sum + term;
    carry = (next - sum) - term;
    sum = next;
  }
  const double u = 2.0 * static_cast<double>(J) - 1.0;
  const double tail = X < 1e-8 ? a2 / (2.0 * u) : a2 / (4.0 * X) * std::log1p(2.0 * X / (u - X));
  const double target = alpha * std::numbers::pi * std::tan(std::numbers::pi * alpha * b) / (8.0 * b);
  return {sum, target, tail};
}

/// Number of terms for which tan_sum_identity's tail bound is <= tol.
inline std::size_t tan_sum_terms_for(double alpha, double b, double tol) {
  require(tol > 0.0, "tolerance must be positive");
  const double X = 2.0 * b * alpha;
  const double a2 = alpha * alpha;
  // tail <= a2/(2(u - X)) with u = 2J - 1.
  const double u = X + a2 / (2.0 * tol);
  return static_cast<std::size_t>(std::ceil(0.5 * (u + 1.0))) + 1;
}

}  // namespace balayage
