#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "balayage/analysis.hpp"
#include "balayage/balayage.hpp"
#include "balayage/coulomb.hpp"
#include "balayage/harmonic_mc.hpp"
#include "balayage/io.hpp"
#include "balayage/parallel.hpp"
#include "balayage/sector_exact.hpp"

namespace {

using namespace balayage;
using nlohmann::json;
namespace bio = balayage::io;

// Every command is a pure function of its resolved config: the config is
// what goes into CSV headers, and `rerun` feeds a header back in here.

struct Result {
  std::string text;
};

McConfig mc_from(const json& c, const std::string& count_key) {
  McConfig cfg;
  cfg.n_walks = bio::get<std::size_t>(c, count_key, "config");
  cfg.seed = bio::get<std::uint64_t>(c, "seed", "config");
  cfg.eps_shell = bio::get<double>(c, "eps_shell", "config");
  cfg.max_steps = bio::get<std::size_t>(c, "max_steps", "config");
  cfg.validate();
  return cfg;
}

json estimate_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}, {"aborted", e.aborted},
          {"n_effective", e.n_effective}};
}

json fit_json(const RateFit& f) {
  return {{"exponent", f.exponent}, {"log_correction", f.log_correction}, {"intercept", f.intercept},
          {"stderr", f.stderr},     {"r_min", f.r_min},                   {"r_max", f.r_max}};
}

std::vector<CurvePoint> curve_from(const json& c) {
  std::vector<CurvePoint> out;
  for (const auto& row : bio::get<std::vector<std::vector<double>>>(c, "curve", "config")) {
    if (row.size() != 3) throw ConfigError("config/curve: rows must be [r, mass, std_error]");
    out.push_back({row[0], row[1], row[2]});
  }
  return out;
}

Result run_sector_exact(const json& c) {
  const SectorSpec spec{bio::get<double>(c, "alpha", "config"), bio::get<double>(c, "a_alpha", "config"),
                        bio::get<double>(c, "b", "config")};
  const double tol = bio::get<double>(c, "tol", "config");
  const bool density = bio::get<bool>(c, "density", "config");
  const double R = bio::get<double>(c, "R", "config");
  const SeriesEval e = density ? sector_density(spec, R, tol) : sector_mass(spec, R, tol);
  const json out{{"config", c},
                 {"value", e.value},
                 {"truncation_bound", e.truncation_bound},
                 {"terms", e.terms},
                 {"regime", to_string(e.regime)}};
  return {out.dump(2) + "\n"};
}

Result run_harmonic(const json& c) {
  const Domain domain = bio::domain_from(c.at("domain"));
  const McConfig cfg = mc_from(c, "walks");
  const json& w = c.at("window");
  BoundaryWindow window(bio::point_from(w.at("center"), "config/window/center"), bio::get<double>(w, "radius", "config/window"));
  if (w.contains("component") && !w.at("component").is_null()) window.component = w.at("component").get<std::size_t>();
  const auto est = wos_harmonic_measure(domain, bio::point_from(c.at("z"), "config/z"), window, cfg);
  return {json{{"config", c}, {"estimate", estimate_json(est)}}.dump(2) + "\n"};
}

Result run_balayage(const json& c) {
  const Domain domain = bio::domain_from(c.at("domain"));
  const BalayageRun run(bio::measure_from(domain, c.at("measure")), mc_from(c, "samples"),
                        bio::get<std::vector<double>>(c, "radii", "config"));
  const auto est = window_mass_curve(run);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < est.size(); ++i) {
    rows.push_back({run.radii[i], est[i].mean, est[i].std_error, est[i].n_effective});
  }
  return {bio::csv_text(c, {"r", "mass", "std_error", "n_effective"}, rows)};
}

Result run_rate_fit(const json& c) {
  const auto fit = fit_rate(curve_from(c), bio::get<bool>(c, "allow_log", "config"),
                            bio::get<double>(c, "min_decades", "config"));
  return {json{{"config", c}, {"fit", fit_json(fit)}}.dump(2) + "\n"};
}

Result run_bounds_check(const json& c) {
  const auto env = envelope(bio::get<double>(c, "alpha", "config"), bio::get<double>(c, "b", "config"),
                            bio::get<double>(c, "eps", "config"));
  const double r_max = c.at("r_max").is_null() ? std::numeric_limits<double>::infinity() : c.at("r_max").get<double>();
  const auto report = check_envelope(curve_from(c), env, r_max);
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"r", r.r}, {"mass", r.mass}, {"std_error", r.std_error}, {"lower", r.lower},
                    {"upper", r.upper}, {"pass", r.pass}});
  }
  json out{{"config", c},
           {"regime", to_string(env.regime)},
           {"lower_coeff", env.lower_coeff},
           {"upper_coeff", std::isfinite(env.upper_coeff) ? json(env.upper_coeff) : json(nullptr)},
           {"pass", report.pass},
           {"rows", rows},
           {"first_failure", report.first_failure ? json(*report.first_failure) : json(nullptr)},
           {"warning", report.warning}};
  if (report.fit) out["fit"] = fit_json(*report.fit);
  return {out.dump(2) + "\n"};
}

Result run_decouple(const json& c) {
  const Domain domain = bio::domain_from(c.at("domain"));
  const auto mu = bio::measure_from(domain, c.at("measure"));
  const auto report = decoupling_check(mu, mc_from(c, "samples"), bio::get<std::vector<double>>(c, "radii", "config"));
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"r", r.r},
                    {"nu", estimate_json(r.nu)},
                    {"sum_nu_j", estimate_json(r.local)},
                    {"residual", estimate_json(r.residual)},
                    {"residual_bound", r.residual_bound},
                    {"upper_ok", r.upper_ok},
                    {"lower_ok", r.lower_ok}});
  }
  std::vector<double> alphas;
  for (const auto& w : domain.wedges()) alphas.push_back(w.alpha);
  const auto env = multi_corner_envelope(alphas, mu.b(), bio::get<double>(c, "eps", "config"));
  json out{{"config", c},
           {"alpha", report.alpha},
           {"m_alpha", env.m_alpha},
           {"regime", to_string(env.total.regime)},
           {"lower_coeff", env.total.lower_coeff},
           {"upper_coeff", std::isfinite(env.total.upper_coeff) ? json(env.total.upper_coeff) : json(nullptr)},
           {"rows", rows},
           {"residual_exponent_ok", report.residual_exponent_ok},
           {"pass", report.pass}};
  if (report.residual_fit) out["residual_fit"] = fit_json(*report.residual_fit);
  return {out.dump(2) + "\n"};
}

Result run_coulomb_profile(const json& c) {
  const double b = bio::get<double>(c, "b", "config");
  const double alpha = bio::get<double>(c, "alpha", "config");
  const double a = bio::get<double>(c, "a", "config");
  const HardWallProblem problem(b, make_sector(alpha, a));
  const auto prof = wall_profile(problem, mc_from(c, "samples"), bio::get<std::size_t>(c, "bins", "config"));
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < prof.s.size(); ++k) {
    rows.push_back({prof.s[k], prof.density[k], prof.std_error[k], prof.normalized[k]});
  }
  return {bio::csv_text(c, {"s", "density", "stderr", "normalized"}, rows)};
}

Result run_gas(const json& c) {
  GasConfig cfg;
  cfg.n = bio::get<std::size_t>(c, "n", "config");
  cfg.beta = bio::get<double>(c, "beta", "config");
  cfg.b = bio::get<double>(c, "b", "config");
  cfg.sweeps = bio::get<std::size_t>(c, "steps", "config");
  cfg.seed = bio::get<std::uint64_t>(c, "seed", "config");
  if (c.contains("wall") && !c.at("wall").is_null()) cfg.wall = bio::domain_from(c.at("wall"), "config/wall");
  const auto res = gas_sampler(cfg);
  std::vector<std::vector<double>> rows;
  for (const auto& p : res.points) rows.push_back({p.real(), p.imag()});
  return {bio::csv_text(c, {"x", "y"}, rows)};
}

Result run_command(const json& c) {
  const auto cmd = bio::get<std::string>(c, "command", "config");
  if (cmd == "sector-exact") return run_sector_exact(c);
  if (cmd == "harmonic") return run_harmonic(c);
  if (cmd == "balayage") return run_balayage(c);
  if (cmd == "rate-fit") return run_rate_fit(c);
  if (cmd == "bounds-check") return run_bounds_check(c);
  if (cmd == "decouple") return run_decouple(c);
  if (cmd == "coulomb-profile") return run_coulomb_profile(c);
  if (cmd == "gas") return run_gas(c);
  throw ConfigError("config/command: unknown command \"" + cmd + "\"");
}

void emit(const Result& r, const std::string& out) {
  if (out.empty()) {
    std::cout << r.text;
  } else {
    bio::write_atomic(out, r.text);
  }
}

json point_arg(const std::vector<double>& v, const std::string& name) {
  if (v.size() != 2) throw ConfigError("--" + name + " expects x,y");
  return json::array({v[0], v[1]});
}

/// Domain file: a domain object (explicit or {"builder": ...}) optionally
/// carrying a "measure" object. The resolved explicit form is returned.
std::pair<json, json> load_domain_file(const std::string& path) {
  const json j = bio::read_json_file(path);
  const Domain d = bio::domain_from(j, path);
  json measure = nullptr;
  if (j.contains("measure")) {
    const auto mu = bio::measure_from(d, j.at("measure"), path + "/measure");
    measure = {{"b", mu.b()},
               {"center", bio::point_json(mu.center())},
               {"multiplier", bio::multiplier_json(mu.multiplier())}};
    if (mu.outer_cap()) measure["outer_cap"] = *mu.outer_cap();
    if (mu.plan().fraction > 0.0) measure["importance"] = {{"fraction", mu.plan().fraction}, {"b", mu.plan().b}};
  }
  return {bio::domain_json(d), measure};
}

json curve_file(const std::string& path) {
  const auto t = bio::read_csv(path);
  const auto ir = t.column("r"), im = t.column("mass");
  std::optional<std::size_t> is;
  for (const char* name : {"std_error", "stderr"}) {
    try {
      is = t.column(name);
      break;
    } catch (const ConfigError&) {
    }
  }
  json rows = json::array();
  for (const auto& row : t.rows) rows.push_back({row[ir], row[im], is ? row[*is] : 0.0});
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balayage of radial-power measures onto boundaries with corners"};
  app.require_subcommand(1);
  std::size_t threads = 1;
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency); output does not depend on it")
      ->capture_default_str();

  std::string out;
  json config;
  std::string domain_path, curve_path;
  std::vector<double> z, center, radii;

  // sector-exact
  auto* se = app.add_subcommand("sector-exact", "exact sector series for nu(B_R) (or its density)");
  double se_alpha = 1, se_b = 0.25, se_a = 1, se_R = 0.01, se_tol = 1e-14;
  bool se_density = false;
  se->add_option("--alpha", se_alpha, "opening pi*alpha, alpha in (0, 2]")->required();
  se->add_option("--b", se_b, "measure exponent b > 0")->required();
  se->add_option("--a-alpha", se_a, "sector radius a^alpha")->capture_default_str();
  se->add_option("--R", se_R, "window radius (or density radius)")->required();
  se->add_option("--tol", se_tol, "truncation tolerance")->capture_default_str();
  se->add_flag("--density", se_density, "evaluate d nu/|dz| at distance R instead");
  se->add_option("--out", out, "JSON output path (stdout if omitted)");

  // shared Monte Carlo options
  std::size_t n_count = 100000, max_steps = 100000;
  std::uint64_t seed = 1;
  double eps_shell = 1e-9;
  auto add_mc = [&](CLI::App* sub, const std::string& count_name) {
    sub->add_option(count_name, n_count, "number of walks / samples")->capture_default_str();
    sub->add_option("--seed", seed, "random seed")->capture_default_str();
    sub->add_option("--eps-shell", eps_shell, "absorption shell width")->capture_default_str();
    sub->add_option("--max-steps", max_steps, "step cap per walk")->capture_default_str();
    sub->add_option("--out", out, "output path (stdout if omitted)");
  };

  auto* hm = app.add_subcommand("harmonic", "walk-on-spheres harmonic measure of a boundary window");
  double window_radius = 0.1;
  int component = -1;
  hm->add_option("--domain", domain_path, "domain JSON file")->required();
  hm->add_option("--z", z, "starting point x,y")->delimiter(',')->required();
  hm->add_option("--window-center", center, "window centre x,y")->delimiter(',')->required();
  hm->add_option("--window-radius", window_radius, "window radius")->required();
  hm->add_option("--component", component, "restrict to the sides of this wedge");
  add_mc(hm, "--walks");

  auto* ba = app.add_subcommand("balayage", "window masses nu(B_r) at the corner (CSV)");
  ba->add_option("--domain", domain_path, "domain JSON file with a \"measure\" object")->required();
  ba->add_option("--radii", radii, "window radii r1,r2,...")->delimiter(',')->required();
  add_mc(ba, "--samples");

  auto* rf = app.add_subcommand("rate-fit", "power-law fit of a mass curve (JSON)");
  bool allow_log = false;
  double min_decades = 1.5;
  rf->add_option("--in", curve_path, "curve CSV with columns r, mass[, std_error]")->required();
  rf->add_flag("--allow-log", allow_log, "also try the r^e log(1/r) model");
  rf->add_option("--min-decades", min_decades, "required span of radii")->capture_default_str();
  rf->add_option("--out", out, "JSON output path");

  auto* bc = app.add_subcommand("bounds-check", "check a mass curve against the corner envelope (JSON)");
  double bc_alpha = 1, bc_b = 0.25, bc_eps = 0.1, bc_rmax = -1;
  bc->add_option("--alpha", bc_alpha, "corner opening alpha")->required();
  bc->add_option("--b", bc_b, "measure exponent b")->required();
  bc->add_option("--eps", bc_eps, "envelope epsilon")->capture_default_str();
  bc->add_option("--r-max", bc_rmax, "largest radius checked");
  bc->add_option("--in", curve_path, "curve CSV")->required();
  bc->add_option("--out", out, "JSON output path");

  auto* dc = app.add_subcommand("decouple", "decoupling check on a multi-wedge domain (JSON)");
  double dc_eps = 0.1;
  dc->add_option("--domain", domain_path, "multi-wedge domain JSON with a \"measure\" object")->required();
  dc->add_option("--radii", radii, "radii in (0, rho0)")->delimiter(',')->required();
  dc->add_option("--eps", dc_eps, "envelope epsilon")->capture_default_str();
  add_mc(dc, "--samples");

  auto* cp = app.add_subcommand("coulomb-profile", "hard-wall balayage density along a sector wall (CSV)");
  double cp_b = 1, cp_alpha = 0.4, cp_a = -1;
  std::size_t bins = 64;
  cp->add_option("--b", cp_b, "Q(z) = |z|^{2b}")->required();
  cp->add_option("--alpha", cp_alpha, "wall opening pi*alpha")->capture_default_str();
  cp->add_option("--a", cp_a, "wall radius (default 0.8 b^{-1/(2b)})");
  cp->add_option("--bins", bins, "equal-arclength bins")->capture_default_str();
  add_mc(cp, "--samples");

  auto* gs = app.add_subcommand("gas", "Metropolis Coulomb gas sample (CSV)");
  std::size_t gas_n = 128, steps = 2000;
  double beta = 2, gas_b = 1;
  std::string wall_path;
  gs->add_option("--n", gas_n, "number of points (<= 512)")->capture_default_str();
  gs->add_option("--beta", beta, "inverse temperature")->capture_default_str();
  gs->add_option("--b", gas_b, "Q(z) = |z|^{2b}")->capture_default_str();
  gs->add_option("--wall", wall_path, "hard-wall domain JSON");
  gs->add_option("--steps", steps, "sweeps")->capture_default_str();
  gs->add_option("--seed", seed, "random seed")->capture_default_str();
  gs->add_option("--out", out, "CSV output path");

  auto* rr = app.add_subcommand("rerun", "re-run the config stored in a CSV header");
  std::string from;
  rr->add_option("--from", from, "CSV file with a config header")->required();
  rr->add_option("--out", out, "output path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_threads(threads);
    auto mc_json = [&](const std::string& count_key) {
      return json{{count_key, n_count}, {"seed", seed}, {"eps_shell", eps_shell}, {"max_steps", max_steps}};
    };
    if (se->parsed()) {
      config = {{"command", "sector-exact"}, {"alpha", se_alpha}, {"b", se_b},         {"a_alpha", se_a},
                {"R", se_R},                 {"tol", se_tol},     {"density", se_density}};
    } else if (hm->parsed()) {
      config = mc_json("walks");
      config["command"] = "harmonic";
      config["domain"] = load_domain_file(domain_path).first;
      config["z"] = point_arg(z, "z");
      config["window"] = {{"center", point_arg(center, "window-center")}, {"radius", window_radius},
                          {"component", component >= 0 ? json(component) : json(nullptr)}};
    } else if (ba->parsed() || dc->parsed()) {
      const auto [domain, measure] = load_domain_file(domain_path);
      if (measure.is_null()) throw ConfigError(domain_path + ": missing \"measure\" object");
      config = mc_json("samples");
      config["command"] = ba->parsed() ? "balayage" : "decouple";
      config["domain"] = domain;
      config["measure"] = measure;
      config["radii"] = radii;
      if (dc->parsed()) config["eps"] = dc_eps;
    } else if (rf->parsed()) {
      config = {{"command", "rate-fit"}, {"curve", curve_file(curve_path)}, {"allow_log", allow_log},
                {"min_decades", min_decades}};
    } else if (bc->parsed()) {
      config = {{"command", "bounds-check"}, {"alpha", bc_alpha}, {"b", bc_b}, {"eps", bc_eps},
                {"r_max", bc_rmax > 0 ? json(bc_rmax) : json(nullptr)}, {"curve", curve_file(curve_path)}};
    } else if (cp->parsed()) {
      config = mc_json("samples");
      config["command"] = "coulomb-profile";
      config["b"] = cp_b;
      config["alpha"] = cp_alpha;
      config["a"] = cp_a > 0 ? cp_a : 0.8 * equilibrium_radius(cp_b);
      config["bins"] = bins;
    } else if (gs->parsed()) {
      config = {{"command", "gas"}, {"n", gas_n}, {"beta", beta}, {"b", gas_b}, {"steps", steps}, {"seed", seed},
                {"wall", wall_path.empty() ? json(nullptr) : load_domain_file(wall_path).first}};
    } else if (rr->parsed()) {
      config = bio::read_csv(from).config;
      if (config.is_null()) throw ConfigError(from + ": no config header");
    }
    emit(run_command(config), out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
