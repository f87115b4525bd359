#pragma once

// Bound envelopes for nu(B_r), power-law rate fits of window-mass curves,
// and the coupled two-scale simulation behind the decoupling estimate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "balayage.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "harmonic_mc.hpp"
#include "measures.hpp"
#include "parallel.hpp"

namespace balayage {

enum class RateRegime { sub, log, super };

inline std::string to_string(RateRegime r) {
  switch (r) {
    case RateRegime::sub:
      return "sub";
    case RateRegime::log:
      return "log";
    case RateRegime::super:
      return "super";
  }
  return "?";
}

/// sub: 2b < 1/alpha, log: 2b = 1/alpha (relative tolerance 1e-9), super: 2b > 1/alpha.
inline RateRegime rate_regime(double alpha, double b) {
  const double x = 2.0 * b * alpha;
  if (std::abs(x - 1.0) <= 1e-9) return RateRegime::log;
  return x < 1.0 ? RateRegime::sub : RateRegime::super;
}

/// Exponent of nu(B_r): min(2b, 1/alpha).
inline double rate_exponent(double alpha, double b) { return std::min(2.0 * b, 1.0 / alpha); }

/// lower_coeff g(r) <= nu(B_r) <= upper_coeff g(r) with g(r) = r^{2b} (sub)
/// or r^{2b} log(1/r) (log). In the super regime only the exponent 1/alpha is
/// known; the coefficients are 0 and +inf.
struct BoundEnvelope {
  RateRegime regime = RateRegime::sub;
  double lower_coeff = 0.0;
  double upper_coeff = 0.0;
  double epsilon = 0.0;
  double alpha = 1.0;
  double b = 0.0;

  double gauge(double r) const {
    const double p = std::pow(r, 2.0 * b);
    return regime == RateRegime::log ? p * std::log(1.0 / r) : p;
  }
  double lower(double r) const { return lower_coeff * gauge(r); }
  double upper(double r) const { return upper_coeff * gauge(r); }
};

inline double sub_lower_coeff(double alpha, double b) { return std::tan(kPi * alpha * b) / (2.0 * b * b); }

inline double sub_upper_coeff(double alpha, double b) {
  return kPi * alpha / (2.0 * b) * (1.0 + 16.0 * b / (kPi * (1.0 / alpha - 2.0 * b)));
}

inline BoundEnvelope envelope(double alpha, double b, double epsilon) {
  require(alpha > 0.0 && alpha <= 2.0, "alpha must lie in (0, 2]");
  require(b > 0.0 && std::isfinite(b), "b must be positive");
  require(epsilon >= 0.0 && epsilon < 1.0, "epsilon must lie in [0, 1)");
  BoundEnvelope env;
  env.regime = rate_regime(alpha, b);
  env.epsilon = epsilon;
  env.alpha = alpha;
  env.b = b;
  switch (env.regime) {
    case RateRegime::sub:
      env.lower_coeff = (1.0 - epsilon) * sub_lower_coeff(alpha, b);
      env.upper_coeff = (1.0 + epsilon) * sub_upper_coeff(alpha, b);
      break;
    case RateRegime::log:
      env.lower_coeff = (1.0 - epsilon) * 2.0 / (kPi * b);
      env.upper_coeff = (1.0 + epsilon) * 4.0 / b;
      break;
    case RateRegime::super:
      env.lower_coeff = 0.0;
      env.upper_coeff = std::numeric_limits<double>::infinity();
      break;
  }
  return env;
}

/// Several corners at one point: the envelope of the sum, with m_alpha the
/// number of corners of maximal opening.
struct MultiCornerEnvelope {
  std::vector<BoundEnvelope> per_corner;
  std::size_t m_alpha = 0;
  BoundEnvelope total;
};

inline MultiCornerEnvelope multi_corner_envelope(const std::vector<double>& alphas, double b, double epsilon) {
  require(!alphas.empty(), "need at least one corner");
  MultiCornerEnvelope out;
  const double alpha = *std::max_element(alphas.begin(), alphas.end());
  for (double a : alphas) {
    out.per_corner.push_back(envelope(a, b, epsilon));
    if (std::abs(a - alpha) <= 1e-12 * alpha) ++out.m_alpha;
  }
  out.total = envelope(alpha, b, epsilon);
  if (out.total.regime == RateRegime::sub) {
    out.total.lower_coeff = 0.0;
    out.total.upper_coeff = 0.0;
    for (const auto& e : out.per_corner) {
      out.total.lower_coeff += e.lower_coeff;
      out.total.upper_coeff += e.upper_coeff;
    }
  } else if (out.total.regime == RateRegime::log) {
    out.total.lower_coeff *= static_cast<double>(out.m_alpha);
    out.total.upper_coeff *= static_cast<double>(out.m_alpha);
  }
  return out;
}

struct CurvePoint {
  double r = 0.0;
  double mass = 0.0;
  double std_error = 0.0;
};

/// mass = exp(intercept) r^exponent, times log(1/r) when log_correction.
struct RateFit {
  double exponent = 0.0;
  bool log_correction = false;
  double intercept = 0.0;
  double stderr = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double rss = 0.0;
};

namespace detail {

struct LineFit {
  double slope = 0.0, intercept = 0.0, slope_se = 0.0, rss = 0.0;
};

inline LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& w, bool known_variance) {
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    f.rss += w[i] * e * e;
  }
  const double dof = static_cast<double>(x.size()) - 2.0;
  const double scale = known_variance ? std::max(1.0, f.rss / dof) : f.rss / dof;
  f.slope_se = std::sqrt(scale / sxx);
  return f;
}

}  // namespace detail

/// Weighted least squares of log(mass) on log(r) (weights 1/(se/mass)^2 when
/// every point carries a standard error, uniform otherwise). With allow_log
/// the model log(mass) - log log(1/r) = c + e log r is also fitted and the
/// smaller weighted residual wins.
inline RateFit fit_rate(const std::vector<CurvePoint>& curve, bool allow_log, double min_decades = 1.5) {
  require(curve.size() >= 5, "rate fit needs at least 5 radii");
  double r_min = std::numeric_limits<double>::infinity(), r_max = 0.0;
  bool all_se = true;
  for (const auto& p : curve) {
    require(p.r > 0.0 && std::isfinite(p.r), "radii must be positive");
    require(p.mass > 0.0 && std::isfinite(p.mass), "masses must be positive for a rate fit");
    require(p.std_error >= 0.0, "standard errors must be >= 0");
    r_min = std::min(r_min, p.r);
    r_max = std::max(r_max, p.r);
    all_se = all_se && p.std_error > 0.0;
  }
  require(std::log10(r_max / r_min) >= min_decades - 1e-12,
          "rate fit radii must span at least " + std::to_string(min_decades) + " decades");
  std::vector<double> x, y, w;
  for (const auto& p : curve) {
    x.push_back(std::log(p.r));
    y.push_back(std::log(p.mass));
    w.push_back(all_se ? std::pow(p.mass / p.std_error, 2) : 1.0);
  }
  const auto plain = detail::weighted_line(x, y, w, all_se);
  RateFit out{plain.slope, false, plain.intercept, plain.slope_se, r_min, r_max, plain.rss};
  if (allow_log && r_max < 1.0) {
    std::vector<double> y_log(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y_log[i] = y[i] - std::log(std::log(1.0 / curve[i].r));
    const auto with_log = detail::weighted_line(x, y_log, w, all_se);
    if (with_log.rss < plain.rss) out = {with_log.slope, true, with_log.intercept, with_log.slope_se, r_min, r_max,
                                         with_log.rss};
  }
  return out;
}

struct EnvelopeRow {
  double r = 0.0;
  double mass = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = true;
};

struct EnvelopeReport {
  std::vector<EnvelopeRow> rows;
  bool pass = true;
  /// Smallest radius at which the envelope fails (scanning outward), if any.
  std::optional<double> first_failure;
  std::optional<RateFit> fit;  // super regime: exponent check only
  std::string warning;
};

/// Per-radius check of lower(r) <= mass <= upper(r) with 3 sigma slack, for
/// radii <= r_max. In the super regime the coefficients are unknown and only
/// the fitted exponent is compared with 1/alpha (tolerance 0.05).
inline EnvelopeReport check_envelope(const std::vector<CurvePoint>& curve, const BoundEnvelope& env,
                                     double r_max = std::numeric_limits<double>::infinity()) {
  EnvelopeReport report;
  std::vector<CurvePoint> used;
  for (const auto& p : curve) {
    if (p.r <= r_max) used.push_back(p);
  }
  std::sort(used.begin(), used.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.r < b.r; });
  if (used.empty()) {
    report.warning = "empty curve: envelope check is vacuous";
    return report;
  }
  if (env.regime == RateRegime::super) {
    if (used.size() < 5) {
      report.warning = "super regime needs >= 5 radii for the exponent check; vacuous pass";
      return report;
    }
    report.fit = fit_rate(used, false, 0.0);
    report.pass = std::abs(report.fit->exponent - 1.0 / env.alpha) <= 0.05;
    for (const auto& p : used) report.rows.push_back({p.r, p.mass, p.std_error, 0.0, env.upper_coeff, report.pass});
    return report;
  }
  for (const auto& p : used) {
    EnvelopeRow row{p.r, p.mass, p.std_error, env.lower(p.r), env.upper(p.r), true};
    row.pass = p.mass + 3.0 * p.std_error >= row.lower && p.mass - 3.0 * p.std_error <= row.upper;
    if (!row.pass && !report.first_failure) report.first_failure = p.r;
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

inline std::vector<CurvePoint> to_curve(const std::vector<double>& radii, const std::vector<McEstimate>& est) {
  require(radii.size() == est.size(), "radii and estimates differ in length");
  std::vector<CurvePoint> out;
  for (std::size_t i = 0; i < radii.size(); ++i) out.push_back({radii[i], est[i].mean, est[i].std_error});
  return out;
}

// ---------------------------------------------------------------------------
// Decoupling.

struct DecouplingRow {
  double r = 0.0;
  McEstimate nu;        // nu(dOmega ∩ B_r)
  McEstimate local;     // sum_j nu_j(dU_j ∩ B_r)
  McEstimate residual;  // nu - sum_j nu_j
  double residual_bound = 0.0;
  bool upper_ok = true;  // sum_j nu_j <= nu (exact under coupling)
  bool lower_ok = true;  // residual <= residual_bound + 3 sigma
};

struct DecouplingReport {
  std::vector<DecouplingRow> rows;
  std::optional<RateFit> residual_fit;
  bool residual_exponent_ok = true;
  double alpha = 0.0;
  bool pass = true;
};

/// Coupled exit cloud: each mu-sample in a component U_j first walks in U_j;
/// a path that leaves U_j through the arc |z - z0| = rho0 continues in Omega.
/// Every path therefore yields its Omega exit and whether it left U_j through
/// dOmega first, giving nu and sum_j nu_j on shared samples and paths.
struct CoupledAtom {
  Point point;
  double weight = 0.0;
  bool local = false;
};

inline std::vector<CoupledAtom> coupled_exit_cloud(const RadialPowerMeasure& mu, const McConfig& cfg,
                                                   std::size_t* aborted_out = nullptr) {
  cfg.validate();
  const Domain& domain = mu.domain();
  require(!domain.wedges().empty(), "decoupling needs a domain with corner wedges");
  std::vector<Domain> parts;
  for (std::size_t j = 0; j < domain.wedges().size(); ++j) parts.push_back(domain.wedge_component(j));
  const std::size_t n = cfg.n_walks;
  const std::uint64_t sample_seed = derive_seed(cfg.seed, kSampleStreamTag);
  const std::uint64_t walk_seed = derive_seed(cfg.seed, kWalkStreamTag);
  std::vector<CoupledAtom> atoms(n);
  std::vector<char> aborted(n, 0);
  for_each_block(n, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      const MeasureSample s = mu.sample_one(sample_seed, i);
      StreamRng rng(walk_seed, i);
      Point z = s.point;
      std::size_t budget = cfg.max_steps;
      if (std::abs(z - domain.corner()) < domain.rho0()) {
        for (const auto& part : parts) {
          if (!part.contains(z)) continue;
          const ExitRecord e = walk_on_spheres(part, z, rng, cfg.eps_shell, budget);
          if (e.aborted) {
            aborted[i] = 1;
            break;
          }
          budget -= e.steps;
          if (e.arc != 1) {  // left through a side, which lies on dOmega
            atoms[i] = {e.point, s.weight, true};
            break;
          }
          z = e.point;  // on the artificial arc, inside Omega
          break;
        }
      }
      if (aborted[i] || atoms[i].local) continue;
      const ExitRecord e = walk_on_spheres(domain, z, rng, cfg.eps_shell, std::max<std::size_t>(budget, 1));
      aborted[i] = e.aborted;
      atoms[i] = {e.point, s.weight, false};
    }
  });
  std::vector<CoupledAtom> out;
  out.reserve(n);
  std::size_t n_aborted = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (aborted[i]) {
      ++n_aborted;
      continue;
    }
    sum += atoms[i].weight;
    out.push_back(atoms[i]);
  }
  warn_aborted(n_aborted, n);
  if (n > 0 && out.empty()) throw NumericalError("every walk exceeded max_steps");
  const double scale = sum > 0.0 ? mu.total_mass() / sum : 0.0;
  for (auto& a : out) a.weight *= scale;
  if (aborted_out) *aborted_out = n_aborted;
  return out;
}

/// nu - C r^{1/alpha} <= sum_j nu_j <= nu on radii in (0, rho0), with the
/// explicit constant sum_k (8/pi) (r/rho0)^{1/alpha_k} (1 + C_k rho0^gamma_k)^{1/(alpha_k gamma_k)} mu(Omega)
/// and a power-law fit of the residual nu - sum_j nu_j (exponent >= 1/alpha - 0.05).
inline DecouplingReport decoupling_check(const RadialPowerMeasure& mu, const McConfig& cfg,
                                         const std::vector<double>& radii) {
  const Domain& domain = mu.domain();
  for (double r : radii) require(r > 0.0 && r < domain.rho0(), "decoupling radii must lie in (0, rho0)");
  std::size_t aborted = 0;
  const auto atoms = coupled_exit_cloud(mu, cfg, &aborted);
  const double total = mu.total_mass();
  double all2 = 0;
  for (const auto& a : atoms) all2 += a.weight * a.weight;
  DecouplingReport report;
  report.alpha = domain.alpha();
  for (double r : radii) {
    double s_nu = 0, s_nu2 = 0, s_loc = 0, s_loc2 = 0, s_res = 0, s_res2 = 0;
    for (const auto& a : atoms) {
      if (std::abs(a.point - domain.corner()) >= r) continue;
      const double w2 = a.weight * a.weight;
      s_nu += a.weight;
      s_nu2 += w2;
      if (a.local) {
        s_loc += a.weight;
        s_loc2 += w2;
      } else {
        s_res += a.weight;
        s_res2 += w2;
      }
    }
    auto estimate = [&](double in, double in2) {
      McEstimate e;
      e.n = atoms.size();
      e.aborted = aborted;
      e.mean = in;
      const double p = total > 0.0 ? in / total : 0.0;
      e.std_error = std::sqrt(in2 * (1 - p) * (1 - p) + (all2 - in2) * p * p);
      e.n_effective = in2 > 0.0 ? in * in / in2 : 0.0;
      return e;
    };
    DecouplingRow row;
    row.r = r;
    row.nu = estimate(s_nu, s_nu2);
    row.local = estimate(s_loc, s_loc2);
    row.residual = estimate(s_res, s_res2);
    for (const auto& w : domain.wedges()) {
      row.residual_bound += 8.0 / kPi * std::pow(r / domain.rho0(), 1.0 / w.alpha) *
                            std::pow(1.0 + w.c1 * std::pow(domain.rho0(), w.gamma), 1.0 / (w.alpha * w.gamma));
    }
    row.residual_bound *= total;
    row.upper_ok = row.local.mean <= row.nu.mean;
    row.lower_ok = row.residual.mean <= row.residual_bound + 3.0 * row.residual.std_error;
    report.pass = report.pass && row.upper_ok && row.lower_ok;
    report.rows.push_back(row);
  }
  std::vector<CurvePoint> residual_curve;
  for (const auto& row : report.rows) {
    if (row.residual.mean > 0.0) residual_curve.push_back({row.r, row.residual.mean, row.residual.std_error});
  }
  if (residual_curve.size() >= 5) {
    report.residual_fit = fit_rate(residual_curve, false, 1.0);
    report.residual_exponent_ok = report.residual_fit->exponent >= 1.0 / report.alpha - 0.05;
    report.pass = report.pass && report.residual_exponent_ok;
  }
  return report;
}

}  // namespace balayage
