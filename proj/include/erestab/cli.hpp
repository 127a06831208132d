#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "central_config.hpp"
#include "errors.hpp"
#include "linearization.hpp"
#include "maslov_index.hpp"
#include "monodromy.hpp"
#include "polygon_config.hpp"
#include "report.hpp"
#include "scan.hpp"

namespace erestab::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* version = "1.0.0";

// Raised for anything the user can fix: bad flags, bad config, out-of-range values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { Double, Int, String, Bool, DoubleList, IntList, StringList };

struct Param {
  Kind kind;
  std::string help;
  json fallback;  // null means required-if-used
};

using Schema = std::map<std::string, Param>;

inline std::vector<double> parse_range(const std::string& text) {
  std::vector<double> out;
  auto num = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw ConfigError("");
      return v;
    } catch (...) {
      throw ConfigError("cannot parse number '" + s + "'");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("range must be start:stop:step, got '" + text + "'");
    double a = num(parts[0]), b = num(parts[1]), h = num(parts[2]);
    if (!(h > 0) || b < a) throw ConfigError("range needs step > 0 and stop >= start: '" + text + "'");
    long n = static_cast<long>(std::floor((b - a) / h + 0.5));
    if (n > 10000000) throw ConfigError("range too long: '" + text + "'");
    for (long i = 0; i <= n; ++i) out.push_back(std::min(a + i * h, b));
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(num(item));
  }
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

inline json coerce(const std::string& key, const Param& p, const json& v) {
  auto bad = [&]() -> json { throw ConfigError("parameter '" + key + "' has the wrong type"); };
  switch (p.kind) {
    case Kind::Double:
      if (v.is_number()) return v.get<double>();
      if (v.is_string()) {
        auto r = parse_range(v.get<std::string>());
        if (r.size() != 1) return bad();
        return r[0];
      }
      return bad();
    case Kind::Int:
      if (v.is_number_integer()) return v.get<long>();
      if (v.is_string()) {
        try {
          std::size_t pos = 0;
          long x = std::stol(v.get<std::string>(), &pos);
          if (pos == v.get<std::string>().size()) return x;
        } catch (...) {
        }
      }
      return bad();
    case Kind::Bool:
      if (v.is_boolean()) return v;
      if (v.is_string()) {
        auto s = v.get<std::string>();
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
      }
      return bad();
    case Kind::String:
      if (v.is_string()) return v;
      return bad();
    case Kind::DoubleList: {
      if (v.is_number()) return json::array({v.get<double>()});
      if (v.is_string()) return parse_range(v.get<std::string>());
      if (v.is_array()) {
        json out = json::array();
        for (const auto& x : v) {
          if (!x.is_number()) return bad();
          out.push_back(x.get<double>());
        }
        return out;
      }
      return bad();
    }
    case Kind::IntList: {
      json out = json::array();
      if (v.is_number_integer()) return json::array({v.get<long>()});
      if (v.is_string()) {
        for (double d : parse_range(v.get<std::string>())) {
          if (d != std::floor(d)) return bad();
          out.push_back(static_cast<long>(d));
        }
        return out;
      }
      if (v.is_array()) {
        for (const auto& x : v) {
          if (!x.is_number_integer()) return bad();
          out.push_back(x.get<long>());
        }
        return out;
      }
      return bad();
    }
    case Kind::StringList: {
      json out = json::array();
      if (v.is_string()) {
        std::stringstream ss(v.get<std::string>());
        std::string item;
        while (std::getline(ss, item, ','))
          if (!item.empty()) out.push_back(item);
        return out;
      }
      if (v.is_array()) {
        for (const auto& x : v) {
          if (!x.is_string()) return bad();
          out.push_back(x);
        }
        return out;
      }
      return bad();
    }
  }
  return bad();
}

inline const std::map<std::string, Schema>& schemas() {
  static const Param family{Kind::String, "collinear | polygon | hls | eigen | ab", "hls"};
  static const Schema point{
      {"family", family},
      {"m", {Kind::DoubleList, "collinear primary masses (normalised)", nullptr}},
      {"guess", {Kind::DoubleList, "Newton guess for the massless body (default: multi-start)", json::array()}},
      {"n", {Kind::Int, "polygon vertex count", 8}},
      {"ratio", {Kind::Double, "central to ring mass ratio m0/M", 1000.0}},
      {"site", {Kind::String, "S1 | S2 | S3", "S3"}},
      {"beta", {Kind::Double, "beta (hls: 9-(l3-l4)^2; ab: (l3-l4)/2)", nullptr}},
      {"lambda3", {Kind::Double, "eigenvalue of D", nullptr}},
      {"lambda4", {Kind::Double, "eigenvalue of D", nullptr}},
      {"alpha", {Kind::Double, "(l3+l4)/2 - 1", nullptr}},
      {"e", {Kind::Double, "eccentricity", 0.0}},
  };
  static const std::map<std::string, Schema> all = [] {
    std::map<std::string, Schema> s;
    s["cc"] = {
        {"masses", {Kind::DoubleList, "primary masses, left to right", nullptr}},
        {"ordering", {Kind::IntList, "left-to-right permutation of the masses", json::array()}},
        {"guess", {Kind::DoubleList, "Newton guess for the massless body (default: multi-start)", json::array()}},
    };
    s["polygon"] = {
        {"n", {Kind::Int, "polygon vertex count", 8}},
        {"ratio", {Kind::DoubleList, "m0/M values", json::array({1e2, 1e3, 1e4, 1e6})}},
        {"site", {Kind::StringList, "sites", json::array({"S1", "S2", "S3"})}},
    };
    s["stability"] = point;
    s["index"] = point;
    s["index"]["rho"] = {Kind::Double, "twist: omega = exp(2 pi i rho)", 0.0};
    s["index"]["omega"] = {Kind::Int, "shortcut for omega = 1 or -1", nullptr};
    s["scan-theta"] = {
        {"beta", {Kind::DoubleList, "beta grid", "0:9:0.05"}},
        {"e", {Kind::DoubleList, "eccentricity grid", "0:0.95:0.02"}},
        {"indices", {Kind::Bool, "also compute the +-1 indices", true}},
        {"curves", {Kind::Bool, "extract the separation curves", false}},
        {"curve_e", {Kind::DoubleList, "eccentricities for curve extraction", "0:0.95:0.05"}},
        {"resolution", {Kind::Double, "curve bisection resolution", 1e-3}},
        {"svg", {Kind::String, "SVG output file", ""}},
    };
    s["scan-mass"] = {
        {"m1", {Kind::DoubleList, "m1 grid", "0.005:0.995:0.01"}},
        {"m3", {Kind::DoubleList, "m3 grid", "0.005:0.995:0.01"}},
        {"e", {Kind::Double, "eccentricity", 0.0}},
        {"svg", {Kind::String, "SVG output file", ""}},
    };
    s["find-mstar"] = {{"tol", {Kind::Double, "bisection tolerance", 1e-6}}};
    s["polygon-verdicts"] = {
        {"n", {Kind::IntList, "vertex counts", json::array({4, 8, 12})}},
        {"ratio", {Kind::DoubleList, "m0/M values", json::array({1e1, 1e2, 1e3, 1e4})}},
        {"e", {Kind::DoubleList, "eccentricities", json::array({0.0, 0.05, 0.1, 0.3})}},
        {"sites", {Kind::StringList, "sites", json::array({"S1", "S2", "S3"})}},
        {"indices", {Kind::Bool, "also compute the +-1 indices", true}},
    };
    return s;
  }();
  return all;
}

inline const Schema& tolerance_schema() {
  static const Schema s{
      {"tol", {Kind::Double, "integrator local tolerance", 1e-12}},
      {"circle_tol", {Kind::Double, "unit-circle tolerance", 1e-6}},
  };
  return s;
}

struct RunConfig {
  std::string command;
  json parameters = json::object();
  json tolerances = json::object();
  std::string out_dir = ".";
};

inline void merge_section(const Schema& schema, const json& src, json& dst, const std::string& where) {
  if (!src.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = src.begin(); it != src.end(); ++it) {
    auto s = schema.find(it.key());
    if (s == schema.end()) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    dst[it.key()] = coerce(it.key(), s->second, it.value());
  }
}

// Config file: {"command"?, "parameters"?, "tolerances"?, "output"?} plus manifest metadata.
inline void apply_config_file(RunConfig& rc, const json& cfg) {
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> meta{"version", "started_at", "duration_s", "settings_hash"};
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const auto& k = it.key();
    if (k == "command") {
      if (!it.value().is_string() || it.value().get<std::string>() != rc.command)
        throw ConfigError("config is for command '" + it.value().dump() + "', not '" + rc.command + "'");
    } else if (k == "parameters") {
      merge_section(schemas().at(rc.command), it.value(), rc.parameters, "parameters");
    } else if (k == "tolerances") {
      merge_section(tolerance_schema(), it.value(), rc.tolerances, "tolerances");
    } else if (k == "output") {
      if (!it.value().is_object()) throw ConfigError("output must be an object");
      for (auto o = it.value().begin(); o != it.value().end(); ++o) {
        if (o.key() != "dir" || !o.value().is_string()) throw ConfigError("unknown output key '" + o.key() + "'");
        rc.out_dir = o.value().get<std::string>();
      }
    } else if (!meta.count(k)) {
      throw ConfigError("unknown top-level config key '" + k + "'");
    }
  }
}

inline void fill_defaults(RunConfig& rc) {
  for (const auto& [k, p] : schemas().at(rc.command))
    if (!rc.parameters.contains(k) && !p.fallback.is_null()) rc.parameters[k] = coerce(k, p, p.fallback);
  for (const auto& [k, p] : tolerance_schema())
    if (!rc.tolerances.contains(k)) rc.tolerances[k] = p.fallback;
  if (!(rc.tolerances["tol"].get<double>() >= 1e-13)) throw ConfigError("tol must be >= 1e-13");
  double ct = rc.tolerances["circle_tol"].get<double>();
  if (!(ct > 0 && ct < 1e-2)) throw ConfigError("circle_tol must lie in (0, 1e-2)");
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline json complex_json(cd z) { return json::array({z.real(), z.imag()}); }

inline json eig_json(const std::array<cd, 4>& ev) {
  json a = json::array();
  for (auto z : ev) a.push_back(complex_json(z));
  return a;
}

inline json params_json(const StabilityParams& p) {
  json j{{"lambda3", p.lambda3}, {"lambda4", p.lambda4}, {"alpha", p.alpha}, {"beta", p.beta}, {"e", p.e}};
  j["beta_hls"] = p.beta_hls ? json(*p.beta_hls) : json(nullptr);
  return j;
}

inline json config_json(const Configuration& c) {
  json j;
  j["masses"] = c.masses;
  json pos = json::array();
  for (const auto& a : c.primary_positions) pos.push_back({a.x(), a.y()});
  j["primary_positions"] = pos;
  j["massless_position"] = c.massless_position ? json::array({c.massless_position->x(), c.massless_position->y()})
                                               : json(nullptr);
  j["mu"] = c.mu;
  j["cc_residual"] = c.cc_residual;
  j["inertia_residual"] = c.inertia_residual;
  j["com_residual"] = c.com_residual;
  return j;
}

inline json bang_json(const BangQuantities& q) {
  return {{"site", to_string(q.site)}, {"rho", q.rho},        {"theta", q.theta},
          {"A", q.A},                  {"B", complex_json(q.B)}, {"l2", q.l2},
          {"l3", q.l3},                {"omega_sq", q.omega_sq}, {"A_over_omega2", q.a_ratio()},
          {"B_over_omega2", q.b_ratio()}, {"lambda3", q.lambda3()}, {"lambda4", q.lambda4()}};
}

inline double req_double(const json& p, const std::string& k) {
  if (!p.contains(k)) throw ConfigError("missing parameter '" + k + "'");
  return p[k].get<double>();
}

// Resolves the point-style parameters of `stability` and `index` to StabilityParams.
inline StabilityParams point_params(const json& p, json& info) {
  const std::string fam = p["family"].get<std::string>();
  const double e = p["e"].get<double>();
  if (fam == "collinear") {
    if (!p.contains("m")) throw ConfigError("family collinear needs --m");
    auto m = p["m"].get<std::vector<double>>();
    auto g = p["guess"].get<std::vector<double>>();
    if (!g.empty() && g.size() != 2) throw ConfigError("guess needs two numbers");
    Configuration cfg;
    auto sys = MassSystem::collinear(m);
    cfg = sys.size() == 3 ? collinear_three_primaries(sys) : moulton_collinear(sys);
    cfg = g.empty() ? restricted_position_multistart(cfg) : restricted_position(cfg, Vec2(g[0], g[1]));
    auto d = compute_D(cfg);
    info["configuration"] = config_json(cfg);
    info["D"] = {{d.entries(0, 0), d.entries(0, 1)}, {d.entries(1, 0), d.entries(1, 1)}};
    return spectral_params(d, e);
  }
  if (fam == "polygon") {
    auto sys = PolygonSystem::make(p["n"].get<int>(), p["ratio"].get<double>());
    auto q = solve_site(sys, parse_site(p["site"].get<std::string>()));
    info["bang"] = bang_json(q);
    return StabilityParams::from_eigenvalues(q.lambda3(), q.lambda4(), e);
  }
  if (fam == "hls") return StabilityParams::from_hls(req_double(p, "beta"), e);
  if (fam == "eigen") return StabilityParams::from_eigenvalues(req_double(p, "lambda3"), req_double(p, "lambda4"), e);
  if (fam == "ab") return StabilityParams::from_alpha_beta(req_double(p, "alpha"), req_double(p, "beta"), e);
  throw ConfigError("unknown family '" + fam + "'");
}

inline ScanSettings scan_settings(const RunConfig& rc, bool indices) {
  ScanSettings s;
  s.tol = rc.tolerances["tol"].get<double>();
  s.circle_tol = rc.tolerances["circle_tol"].get<double>();
  s.indices = indices;
  return s;
}

// Executes a validated config; returns the JSON summary printed on stdout.
inline json execute(const RunConfig& rc) {
  namespace fs = std::filesystem;
  const fs::path out(rc.out_dir);
  const json& p = rc.parameters;
  const double tol = rc.tolerances["tol"].get<double>();
  const double circle_tol = rc.tolerances["circle_tol"].get<double>();
  json res;
  res["command"] = rc.command;

  if (rc.command == "cc") {
    if (!p.contains("masses")) throw ConfigError("cc needs --masses");
    auto sys = MassSystem::collinear(p["masses"].get<std::vector<double>>());
    auto ord = p["ordering"].get<std::vector<int>>();
    auto g = p["guess"].get<std::vector<double>>();
    if (!g.empty() && g.size() != 2) throw ConfigError("guess needs two numbers");
    Configuration c = (sys.size() == 3 && ord.empty()) ? collinear_three_primaries(sys) : moulton_collinear(sys, ord);
    c = g.empty() ? restricted_position_multistart(c) : restricted_position(c, Vec2(g[0], g[1]));
    auto d = compute_D(c);
    auto sp = spectral_params(d, 0.0);
    res["configuration"] = config_json(c);
    res["D"] = {{d.entries(0, 0), d.entries(0, 1)}, {d.entries(1, 0), d.entries(1, 1)}};
    res["beta20"] = d.beta20;
    res["beta220"] = complex_json(d.beta220);
    res["lambda3"] = sp.lambda3;
    res["lambda4"] = sp.lambda4;
    res["beta"] = sp.beta_hls ? json(*sp.beta_hls) : json(nullptr);
    write_atomic(out / "cc.json", res.dump(2) + "\n");
  } else if (rc.command == "polygon") {
    const int n = p["n"].get<int>();
    json rows = json::array();
    std::ostringstream csv;
    csv << "# erestab polygon schema " << csv_schema_version << "\n";
    csv << "n,m0_over_M,site,rho,A_over_omega2,B_over_omega2,l3,lambda3,lambda4,mu_alpha3_minus_omega2\n";
    for (const auto& s : p["site"]) {
      Site site = parse_site(s.get<std::string>());
      for (const auto& row : polygon_limits(n, p["ratio"].get<std::vector<double>>(), site)) {
        auto sys = PolygonSystem::make(n, row.m0_over_M);
        auto cfg = polygon_configuration(sys, row.q);
        double check = cfg.mu * std::pow(sys.alpha, 3) - sys.omega_sq;
        json r = bang_json(row.q);
        r["m0_over_M"] = row.m0_over_M;
        r["mu_alpha3_minus_omega2"] = check;
        rows.push_back(r);
        csv << n << ',' << fmt17(row.m0_over_M) << ',' << to_string(site) << ',' << fmt17(row.q.rho) << ','
            << fmt17(row.a_ratio) << ',' << fmt17(row.b_ratio) << ',' << fmt17(row.l3) << ',' << fmt17(row.lambda3)
            << ',' << fmt17(row.lambda4) << ',' << fmt17(check) << "\n";
      }
    }
    res["rows"] = rows;
    write_atomic(out / "polygon.csv", csv.str());
  } else if (rc.command == "stability") {
    json info = json::object();
    auto sp = point_params(p, info);
    auto m = integrate_fundamental(sp, tol);
    auto v = classify_spectrum(m, circle_tol);
    res.update(info);
    res["params"] = params_json(sp);
    res["beta"] = sp.beta_hls ? json(*sp.beta_hls) : json(nullptr);
    res["lambda3"] = sp.lambda3;
    res["lambda4"] = sp.lambda4;
    res["verdict"] = to_string(v.verdict);
    res["eigenvalues"] = eig_json(m.eigenvalues);
    res["sympl_residual"] = m.symplectic_residual;
    res["steps"] = m.step_metadata.accepted;
    write_atomic(out / "stability.json", res.dump(2) + "\n");
  } else if (rc.command == "index") {
    json info = json::object();
    auto sp = point_params(p, info);
    Twist tw = Twist::from_rho(p["rho"].get<double>());
    if (p.contains("omega")) {
      long w = p["omega"].get<long>();
      if (w != 1 && w != -1) throw ConfigError("omega shortcut must be 1 or -1");
      tw = w == 1 ? Twist::periodic() : Twist::antiperiodic();
    }
    auto r = morse_index(sp, tw);
    res.update(info);
    res["params"] = params_json(sp);
    res["omega"] = complex_json(r.omega);
    res["rho"] = r.rho;
    res["phi"] = r.phi;
    res["nu"] = r.nu;
    res["num_modes"] = r.num_modes;
    res["min_eigenvalue"] = r.min_eigenvalue;
    res["kernel_gap"] = r.kernel_gap;
    res["kernel_tol"] = r.kernel_tol;
    write_atomic(out / "index.json", res.dump(2) + "\n");
  } else if (rc.command == "scan-theta") {
    auto s = scan_settings(rc, p["indices"].get<bool>());
    auto recs = scan_theta(p["beta"].get<std::vector<double>>(), p["e"].get<std::vector<double>>(), s);
    write_atomic(out / "scan_theta.csv", theta_csv(recs));
    std::optional<CurveResult> curves;
    if (p["curves"].get<bool>()) {
      CurveSettings cs;
      cs.beta_resolution = p["resolution"].get<double>();
      cs.scan = s;
      curves = find_curves(p["curve_e"].get<std::vector<double>>(), cs);
      write_atomic(out / "curves.csv", curves_csv(*curves));
      json errs = json::array();
      for (const auto& r : curves->rows)
        if (!r.error.empty()) errs.push_back({{"e", r.e}, {"error", r.error}});
      res["curve_errors"] = errs;
    }
    auto svg = p["svg"].get<std::string>();
    if (!svg.empty()) write_atomic(out / svg, theta_svg(recs, curves ? &*curves : nullptr));
    std::map<std::string, int> counts;
    int failed = 0;
    for (const auto& r : recs) {
      if (r.ok()) ++counts[to_string(r.verdict.verdict)];
      else ++failed;
    }
    res["points"] = recs.size();
    res["verdict_counts"] = counts;
    res["failed_points"] = failed;
    res["settings_hash"] = s.hash();
  } else if (rc.command == "scan-mass") {
    auto s = scan_settings(rc, false);
    auto cells = mass_scan_4body(p["m1"].get<std::vector<double>>(), p["m3"].get<std::vector<double>>(),
                                 p["e"].get<double>(), s);
    write_atomic(out / "scan_mass.csv", mass_csv(cells));
    auto svg = p["svg"].get<std::string>();
    if (!svg.empty()) write_atomic(out / svg, mass_svg(cells));
    int stable = 0, valid = 0;
    for (const auto& c : cells) {
      if (c.error.empty()) ++valid;
      if (c.stable) ++stable;
    }
    res["cells"] = cells.size();
    res["valid_cells"] = valid;
    res["stable_cells"] = stable;
    res["settings_hash"] = s.hash();
  } else if (rc.command == "find-mstar") {
    auto m = find_mstar(p["tol"].get<double>());
    res["m_star"] = m.m_star;
    res["bracket"] = {m.lo, m.hi};
    res["bracket_width"] = m.bracket_width();
    res["monotone"] = m.monotone;
    res["warning"] = m.warning;
    write_atomic(out / "mstar.json", res.dump(2) + "\n");
  } else if (rc.command == "polygon-verdicts") {
    auto s = scan_settings(rc, p["indices"].get<bool>());
    std::vector<Site> sites;
    for (const auto& x : p["sites"]) sites.push_back(parse_site(x.get<std::string>()));
    auto rows = polygon_verdicts(p["n"].get<std::vector<int>>(), p["ratio"].get<std::vector<double>>(),
                                 p["e"].get<std::vector<double>>(), sites, s);
    write_atomic(out / "polygon_verdicts.csv", polygon_csv(rows));
    json e0 = json::array();
    for (const auto& u : uniform_instability(rows))
      e0.push_back({{"n", u.n},
                    {"m0_over_M", u.m0_over_M},
                    {"site", to_string(u.site)},
                    {"largest_uniformly_unstable_e", u.e0 ? json(*u.e0) : json(nullptr)}});
    res["rows"] = rows.size();
    res["uniform_instability"] = e0;
    res["settings_hash"] = s.hash();
  }
  return res;
}

inline std::string iso_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Full command-line entry point; returns the process exit code.
inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Linear stability of elliptic relative equilibria in restricted N-body problems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version);
  RunConfig rc;
  std::string config_path;
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, std::string>> raw_tol;
  std::vector<CLI::App*> subs;
  for (const auto& [name, schema] : schemas()) {
    static const std::map<std::string, std::string> about{
        {"cc", "central configuration and massless-body site"},
        {"polygon", "(1+n)-gon sites and their quantities"},
        {"stability", "monodromy spectrum and verdict at one point"},
        {"index", "omega-Morse index at one point"},
        {"scan-theta", "verdict grid over (beta, e), optional curves"},
        {"scan-mass", "stability over the (m1, m3) plane"},
        {"find-mstar", "symmetric-chain stability threshold"},
        {"polygon-verdicts", "verdict table for polygon sites"}};
    auto* sub = app.add_subcommand(name, about.at(name));
    subs.push_back(sub);
    sub->add_option("--out", rc.out_dir, "output directory");
    sub->add_option("--config", config_path, "JSON config (overrides flags)");
    for (const auto& [key, prm] : schema) {
      std::string flag = "--" + key;
      for (auto& ch : flag)
        if (ch == '_') ch = '-';
      sub->add_option(flag, raw[name][key], prm.help);
    }
    for (const auto& [key, prm] : tolerance_schema()) {
      if (schema.count(key)) continue;  // find-mstar --tol is its bisection tolerance
      std::string flag = "--" + key;
      for (auto& ch : flag)
        if (ch == '_') ch = '-';
      sub->add_option(flag, raw_tol[name][key], prm.help);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  for (auto* s : subs)
    if (s->parsed()) rc.command = s->get_name();

  auto started = std::chrono::steady_clock::now();
  const std::string started_at = iso_now();
  try {
    const auto& schema = schemas().at(rc.command);
    for (const auto& [key, text] : raw[rc.command])
      if (!text.empty()) rc.parameters[key] = coerce(key, schema.at(key), json(text));
    for (const auto& [key, text] : raw_tol[rc.command])
      if (!text.empty()) rc.tolerances[key] = coerce(key, tolerance_schema().at(key), json(text));
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot open config '" + config_path + "'");
      json cfg;
      try {
        cfg = json::parse(f);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      apply_config_file(rc, cfg);
    }
    fill_defaults(rc);
    json res = execute(rc);
    double dur = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json manifest{{"command", rc.command}, {"parameters", rc.parameters}, {"tolerances", rc.tolerances},
                  {"version", version},    {"started_at", started_at},  {"duration_s", dur}};
    write_atomic(std::filesystem::path(rc.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    out << res.dump(2) << "\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "erestab: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "erestab: invalid input: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    err << "erestab: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "erestab: numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "erestab: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace erestab::cli
