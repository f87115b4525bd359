#pragma once

// JSON descriptions of domains and source measures, and CSV output with a
// JSON config header written atomically (temp file + rename).

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "error.hpp"
#include "geometry.hpp"
#include "measures.hpp"

namespace balayage::io {

using nlohmann::json;

/// Reads key `k` of `j` with a message naming the JSON path on failure.
template <class T>
T get(const json& j, const std::string& k, const std::string& where) {
  if (!j.is_object() || !j.contains(k)) throw ConfigError(where + ": missing key \"" + k + "\"");
  try {
    return j.at(k).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "/" + k + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const std::string& k, T fallback, const std::string& where) {
  return j.contains(k) ? get<T>(j, k, where) : fallback;
}

inline json point_json(Point p) { return json::array({p.real(), p.imag()}); }

inline Point point_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(where + ": expected a point [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json arc_json(const BoundaryArc& arc) {
  struct Visitor {
    json operator()(const Segment& s) const {
      return {{"kind", "segment"}, {"from", point_json(s.from)}, {"to", point_json(s.to)}};
    }
    json operator()(const CircularArc& c) const {
      return {{"kind", "circular"}, {"center", point_json(c.center)}, {"radius", c.radius},
              {"start", c.start},   {"sweep", c.sweep}};
    }
    json operator()(const PerturbedArc& p) const {
      return {{"kind", "perturbed"}, {"origin", point_json(p.origin)}, {"phi", p.phi},       {"kappa", p.kappa},
              {"gamma", p.gamma},    {"length", p.length},             {"outward", p.outward}};
    }
  };
  return std::visit(Visitor{}, arc);
}

inline BoundaryArc arc_from(const json& j, const std::string& where) {
  const auto kind = get<std::string>(j, "kind", where);
  if (kind == "segment") return Segment{point_from(j.value("from", json()), where + "/from"),
                                        point_from(j.value("to", json()), where + "/to")};
  if (kind == "circular") {
    return CircularArc{point_from(j.value("center", json()), where + "/center"), get<double>(j, "radius", where),
                       get<double>(j, "start", where), get<double>(j, "sweep", where)};
  }
  if (kind == "perturbed") {
    return PerturbedArc{point_from(j.value("origin", json()), where + "/origin"),
                        get<double>(j, "phi", where),
                        get<double>(j, "kappa", where),
                        get<double>(j, "gamma", where),
                        get<double>(j, "length", where),
                        get<bool>(j, "outward", where)};
  }
  throw ConfigError(where + "/kind: unknown arc kind \"" + kind + "\" (segment, circular, perturbed)");
}

/// Explicit form: corner, rho0, arcs, wedges and optional sampling_sector.
inline json domain_json(const Domain& d) {
  json arcs = json::array();
  for (const auto& a : d.arcs()) arcs.push_back(arc_json(a));
  json wedges = json::array();
  for (const auto& w : d.wedges()) {
    wedges.push_back({{"phi", w.phi},
                      {"alpha", w.alpha},
                      {"c1", w.c1},
                      {"gamma", w.gamma},
                      {"plus_arc", w.plus_arc},
                      {"minus_arc", w.minus_arc}});
  }
  json out{{"corner", point_json(d.corner())}, {"rho0", d.rho0()}, {"arcs", arcs}, {"wedges", wedges}};
  if (d.sampling_sector()) out["sampling_sector"] = {d.sampling_sector()->start, d.sampling_sector()->end};
  return out;
}

/// Accepts the explicit form or {"builder": {...}} naming a factory:
/// disk {center, radius}; sector {alpha, radius, phi, apex};
/// perturbed_wedge {alpha, radius, kappa_plus, kappa_minus, gamma, phi, apex};
/// multi_wedge_disk {wedges: [{phi, alpha}], outer, separator_radius, rho0, apex}.
inline Domain domain_from(const json& j, const std::string& where = "domain") {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  if (j.contains("builder")) {
    const json& b = j.at("builder");
    const std::string w = where + "/builder";
    const auto type = get<std::string>(b, "type", w);
    const Point apex = b.contains("apex") ? point_from(b.at("apex"), w + "/apex") : Point{};
    if (type == "disk") {
      return make_disk(b.contains("center") ? point_from(b.at("center"), w + "/center") : Point{},
                       get<double>(b, "radius", w));
    }
    if (type == "sector") {
      return make_sector(get<double>(b, "alpha", w), get_or<double>(b, "radius", 1.0, w), get_or<double>(b, "phi", 0.0, w),
                         apex);
    }
    if (type == "perturbed_wedge") {
      return make_perturbed_wedge(get<double>(b, "alpha", w), get_or<double>(b, "radius", 1.0, w),
                                  get_or<double>(b, "kappa_plus", 0.0, w), get_or<double>(b, "kappa_minus", 0.0, w),
                                  get_or<double>(b, "gamma", 1.0, w), get_or<double>(b, "phi", 0.0, w), apex);
    }
    if (type == "multi_wedge_disk") {
      std::vector<WedgeSpec> specs;
      const auto& list = b.value("wedges", json::array());
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string wi = w + "/wedges/" + std::to_string(i);
        specs.push_back({get<double>(list[i], "phi", wi), get<double>(list[i], "alpha", wi)});
      }
      return make_multi_wedge_disk(specs, get_or<double>(b, "outer", 1.0, w), get<double>(b, "separator_radius", w),
                                   get<double>(b, "rho0", w), apex);
    }
    throw ConfigError(w + "/type: unknown builder \"" + type +
                      "\" (disk, sector, perturbed_wedge, multi_wedge_disk)");
  }
  std::vector<BoundaryArc> arcs;
  const auto& list = j.value("arcs", json::array());
  if (list.empty()) throw ConfigError(where + ": missing or empty \"arcs\"");
  for (std::size_t i = 0; i < list.size(); ++i) arcs.push_back(arc_from(list[i], where + "/arcs/" + std::to_string(i)));
  std::vector<Wedge> wedges;
  const auto& wl = j.value("wedges", json::array());
  for (std::size_t i = 0; i < wl.size(); ++i) {
    const std::string wi = where + "/wedges/" + std::to_string(i);
    wedges.push_back({get<double>(wl[i], "phi", wi), get<double>(wl[i], "alpha", wi), get_or<double>(wl[i], "c1", 0.0, wi),
                      get_or<double>(wl[i], "gamma", 1.0, wi), get<std::size_t>(wl[i], "plus_arc", wi),
                      get<std::size_t>(wl[i], "minus_arc", wi)});
  }
  std::optional<AngularInterval> sector;
  if (j.contains("sampling_sector")) {
    const Point s = point_from(j.at("sampling_sector"), where + "/sampling_sector");
    sector = AngularInterval{s.real(), s.imag()};
  }
  const Point corner = j.contains("corner") ? point_from(j.at("corner"), where + "/corner") : Point{};
  return Domain(std::move(arcs), corner, std::move(wedges), get_or<double>(j, "rho0", 0.0, where), sector);
}

inline json multiplier_json(const Multiplier& m) {
  switch (m.kind) {
    case Multiplier::Kind::none:
      return {{"kind", "none"}};
    case Multiplier::Kind::power:
      return {{"kind", "power"}, {"c", m.c}, {"p", m.p}};
    case Multiplier::Kind::constant:
      return {{"kind", "constant"}, {"value", m.value}};
  }
  return {};
}

inline Multiplier multiplier_from(const json& j, const std::string& where) {
  const auto kind = get_or<std::string>(j, "kind", "none", where);
  if (kind == "none") return Multiplier::none();
  if (kind == "power") return Multiplier::power(get<double>(j, "c", where), get<double>(j, "p", where));
  if (kind == "constant") return Multiplier::constant(get<double>(j, "value", where));
  throw ConfigError(where + "/kind: unknown multiplier \"" + kind + "\" (none, power, constant)");
}

/// {"b", "center" (default: corner), "multiplier", "outer_cap", "importance": {fraction, b}}.
inline RadialPowerMeasure measure_from(const Domain& domain, const json& j, const std::string& where = "measure") {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const Point center = j.contains("center") ? point_from(j.at("center"), where + "/center") : domain.corner();
  const Multiplier m = j.contains("multiplier") ? multiplier_from(j.at("multiplier"), where + "/multiplier") : Multiplier{};
  std::optional<double> cap;
  if (j.contains("outer_cap")) cap = get<double>(j, "outer_cap", where);
  SamplingPlan plan;
  if (j.contains("importance")) {
    plan.fraction = get<double>(j.at("importance"), "fraction", where + "/importance");
    plan.b = get<double>(j.at("importance"), "b", where + "/importance");
  }
  return RadialPowerMeasure(domain, get<double>(j, "b", where), center, m, cap,
                            std::numeric_limits<double>::infinity(), plan);
}

inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json_file(const std::string& path) { return parse_json_text(read_file(path), path); }

/// Writes `content` to a temporary file next to `path`, then renames it.
inline void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw NumericalError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("cannot rename onto " + path + ": " + ec.message());
  }
}

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// "# <config json>" line, a column header, then rows.
inline std::string csv_text(const json& config, const std::vector<std::string>& columns,
                            const std::vector<std::vector<double>>& rows) {
  std::string out = "# " + config.dump() + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
    out += "\n";
  }
  return out;
}

struct CsvTable {
  json config;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw ConfigError("CSV has no column \"" + name + "\"");
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (t.config.is_null() && t.columns.empty()) {
        t.config = parse_json_text(line.substr(1), path + " line " + std::to_string(line_no));
      }
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split(line);
      continue;
    }
    const auto parts = split(line);
    if (parts.size() != t.columns.size()) {
      throw ConfigError(path + " line " + std::to_string(line_no) + ": expected " + std::to_string(t.columns.size()) +
                        " fields, found " + std::to_string(parts.size()));
    }
    std::vector<double> row;
    for (const auto& p : parts) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(p, &used));
        if (used != p.size()) throw std::invalid_argument(p);
      } catch (const std::exception&) {
        throw ConfigError(path + " line " + std::to_string(line_no) + ": not a number: \"" + p + "\"");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw ConfigError(path + ": no header row");
  return t;
}

}  // namespace balayage::io
