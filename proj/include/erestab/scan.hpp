#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "central_config.hpp"
#include "errors.hpp"
#include "linearization.hpp"
#include "maslov_index.hpp"
#include "monodromy.hpp"
#include "polygon_config.hpp"

namespace erestab {

inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ERESTAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

// Evaluates fn(i) for i in [0, n); results land at their index regardless of completion order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
  };
  if (workers <= 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

struct ScanSettings {
  double tol = 1e-12;
  double circle_tol = 1e-6;
  bool indices = true;
  IndexOptions index;

  std::string canonical() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "tol=%.17g;circle_tol=%.17g;indices=%d;levels=", tol, circle_tol,
                  indices ? 1 : 0);
    std::string s = buf;
    for (int k : index.levels) s += std::to_string(k) + ",";
    return s;
  }

  // FNV-1a of the canonical settings string.
  std::string hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

struct ScanRecord {
  StabilityParams params;
  SpectrumVerdict verdict;
  std::array<cd, 4> eigenvalues{};
  double sympl_residual = 0;
  int phi_1 = -1, nu_1 = -1, phi_m1 = -1, nu_m1 = -1;
  std::string source = "grid";
  std::string error;

  bool ok() const { return error.empty(); }
};

inline ScanRecord evaluate_point(const StabilityParams& p, const ScanSettings& s, std::string source = "grid") {
  ScanRecord r;
  r.params = p;
  r.source = std::move(source);
  try {
    Monodromy m = integrate_fundamental(p, s.tol);
    r.verdict = classify_spectrum(m, s.circle_tol);
    r.eigenvalues = m.eigenvalues;
    r.sympl_residual = m.symplectic_residual;
    if (s.indices) {
      auto i1 = morse_index(p, Twist::periodic(), s.index);
      auto im = morse_index(p, Twist::antiperiodic(), s.index);
      r.phi_1 = i1.phi;
      r.nu_1 = i1.nu;
      r.phi_m1 = im.phi;
      r.nu_m1 = im.nu;
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

inline void check_theta_grid(const std::vector<double>& betas, const std::vector<double>& es) {
  for (double b : betas)
    if (!(b >= 0.0 && b <= 9.0)) throw DomainError("beta grid must lie in [0, 9]");
  for (double e : es)
    if (!(e >= 0.0 && e <= 0.99)) throw DomainError("e grid must lie in [0, 0.99]");
}

// Rows ordered by e (outer) then beta (inner).
inline std::vector<ScanRecord> scan_theta(const std::vector<double>& betas, const std::vector<double>& es,
                                          const ScanSettings& s = {}) {
  check_theta_grid(betas, es);
  const std::size_t nb = betas.size();
  return parallel_map<ScanRecord>(nb * es.size(), [&](std::size_t i) {
    double b = betas[i % nb], e = es[i / nb];
    try {
      return evaluate_point(StabilityParams::from_hls(b, e), s);
    } catch (const Error& err) {
      ScanRecord r;
      r.error = err.what();
      return r;
    }
  });
}

enum class Curve { BetaS, BetaM, BetaK };

inline const char* to_string(Curve c) {
  switch (c) {
    case Curve::BetaS: return "beta_s";
    case Curve::BetaM: return "beta_m";
    case Curve::BetaK: return "beta_k";
  }
  return "?";
}

struct CurvePoint {
  double e = 0;
  double beta = 0;
  Curve curve = Curve::BetaS;
  double bracket_width = 0;
};

struct CurveSettings {
  double beta_resolution = 1e-3;
  double coarse_step = 0.05;
  ScanSettings scan;
};

struct JumpPoint {
  double beta = 0;
  double bracket_width = 0;
  int size = 0;  // drop of the -1 index across the bracket
};

struct CurveRow {
  double e = 0;
  std::vector<JumpPoint> jumps;  // one entry per unit drop
  bool monotone = true;
  std::optional<double> beta_s, beta_m, beta_k;
  double width_s = 0, width_m = 0, width_k = 0;
  std::string error;
};

struct CurveResult {
  std::vector<CurvePoint> points;
  std::vector<CurveRow> rows;
};

inline int phi_minus_one(double beta, double e, const ScanSettings& s) {
  return morse_index(StabilityParams::from_hls(beta, e), Twist::antiperiodic(), s.index).phi;
}

inline bool touches_circle(double beta, double e, const ScanSettings& s) {
  Monodromy m = integrate_fundamental(StabilityParams::from_hls(beta, e), s.tol);
  return classify_spectrum(m, s.circle_tol).on_circle_count > 0;
}

namespace detail {

inline void locate_jumps(double lo, int flo, double hi, int fhi, double e, const CurveSettings& cs,
                         std::vector<JumpPoint>& out, bool& monotone) {
  if (flo == fhi) return;
  if (fhi > flo) monotone = false;
  if (hi - lo <= cs.beta_resolution) {
    // lower bracket ends, like beta_k, so curves that share a dyadic cell keep their order
    if (fhi < flo)
      for (int k = 0; k < flo - fhi; ++k) out.push_back({lo, hi - lo, flo - fhi});
    return;
  }
  double mid = 0.5 * (lo + hi);
  int fm = phi_minus_one(mid, e, cs.scan);
  locate_jumps(lo, flo, mid, fm, e, cs, out, monotone);
  locate_jumps(mid, fm, hi, fhi, e, cs, out, monotone);
}

}  // namespace detail

inline CurveRow curve_row(double e, const CurveSettings& cs) {
  CurveRow row;
  row.e = e;
  try {
    const int n = static_cast<int>(std::lround(9.0 / cs.coarse_step));
    std::vector<double> grid(n + 1);
    for (int i = 0; i <= n; ++i) grid[i] = std::min(9.0, i * cs.coarse_step);
    std::vector<int> phi(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) phi[i] = phi_minus_one(grid[i], e, cs.scan);
    for (std::size_t i = 1; i < grid.size(); ++i)
      detail::locate_jumps(grid[i - 1], phi[i - 1], grid[i], phi[i], e, cs, row.jumps, row.monotone);

    // beta_k: largest beta' with circle spectrum at every grid point of [0, beta']
    double lo = 0.0, hi = 0.0;
    bool found_gap = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!touches_circle(grid[i], e, cs.scan)) {
        found_gap = true;
        hi = grid[i];
        lo = i > 0 ? grid[i - 1] : 0.0;
        break;
      }
    }
    if (!found_gap) {
      row.beta_k = 9.0;
      row.width_k = 0.0;
    } else if (hi == 0.0) {
      row.beta_k = 0.0;
      row.width_k = 0.0;
    } else {
      while (hi - lo > cs.beta_resolution) {
        double mid = 0.5 * (lo + hi);
        if (touches_circle(mid, e, cs.scan)) lo = mid;
        else hi = mid;
      }
      row.beta_k = lo;
      row.width_k = hi - lo;
    }

    if (row.jumps.size() != 2) {
      row.error = "expected two unit jumps of the -1 index, found " + std::to_string(row.jumps.size());
      return row;
    }
    row.beta_s = row.jumps[0].beta;
    row.width_s = row.jumps[0].bracket_width;
    row.beta_m = row.jumps[1].beta;
    row.width_m = row.jumps[1].bracket_width;
  } catch (const Error& err) {
    row.error = err.what();
  }
  return row;
}

inline CurveResult find_curves(const std::vector<double>& es, const CurveSettings& cs = {}) {
  if (!(cs.beta_resolution > 0 && cs.beta_resolution <= 0.01))
    throw DomainError("beta resolution must lie in (0, 0.01]");
  if (!(cs.coarse_step >= cs.beta_resolution)) throw DomainError("coarse step must be >= resolution");
  for (double e : es)
    if (!(e >= 0.0 && e <= 0.99)) throw DomainError("e values must lie in [0, 0.99]");
  CurveResult res;
  res.rows = parallel_map<CurveRow>(es.size(), [&](std::size_t i) { return curve_row(es[i], cs); });
  for (const auto& r : res.rows) {
    if (!r.error.empty()) continue;
    res.points.push_back({r.e, *r.beta_s, Curve::BetaS, r.width_s});
    res.points.push_back({r.e, *r.beta_m, Curve::BetaM, r.width_m});
    res.points.push_back({r.e, *r.beta_k, Curve::BetaK, r.width_k});
  }
  return res;
}

// Region label from a curve row: 1 below beta_s, 2 up to beta_m, 3 up to beta_k, 4 beyond.
inline int region_of(double beta, const CurveRow& row) {
  if (beta < *row.beta_s) return 1;
  if (beta < *row.beta_m) return 2;
  if (beta < *row.beta_k) return 3;
  return 4;
}

struct MassCell {
  double m1 = 0, m2 = 0, m3 = 0;
  double beta_hls = std::numeric_limits<double>::quiet_NaN();
  double lambda3 = 0, lambda4 = 0;
  Verdict verdict = Verdict::Unstable;
  bool stable = false;
  std::string error;
};

inline MassCell mass_cell(double m1, double m3, double e, const ScanSettings& s) {
  MassCell c;
  c.m1 = m1;
  c.m3 = m3;
  c.m2 = 1.0 - m1 - m3;
  try {
    if (!(m1 > 0 && m3 > 0 && c.m2 > 0)) throw DomainError("need m1, m3 > 0 and m1 + m3 < 1");
    auto cfg = restricted_position_multistart(collinear_three_primaries(MassSystem::collinear({m1, c.m2, m3})));
    auto p = spectral_params(compute_D(cfg), e);
    c.lambda3 = p.lambda3;
    c.lambda4 = p.lambda4;
    if (p.beta_hls) c.beta_hls = *p.beta_hls;
    c.verdict = classify_spectrum(integrate_fundamental(p, s.tol), s.circle_tol).verdict;
    c.stable = c.verdict == Verdict::StronglyLinearlyStable || c.verdict == Verdict::LinearlyStable;
  } catch (const Error& err) {
    c.error = err.what();
  }
  return c;
}

// Cells ordered by m1 (outer) then m3; pairs with m1 + m3 >= 1 carry an error.
inline std::vector<MassCell> mass_scan_4body(const std::vector<double>& m1s, const std::vector<double>& m3s,
                                             double e, const ScanSettings& s = {}) {
  if (!(e >= 0.0 && e <= 0.99)) throw DomainError("eccentricity must lie in [0, 0.99]");
  const std::size_t n3 = m3s.size();
  return parallel_map<MassCell>(m1s.size() * n3,
                                [&](std::size_t i) { return mass_cell(m1s[i / n3], m3s[i % n3], e, s); });
}

struct MstarResult {
  double m_star = 0;
  double lo = 0, hi = 0;
  bool monotone = true;
  std::string warning;
  double bracket_width() const { return hi - lo; }
};

inline MstarResult find_mstar(double tolerance = 1e-6) {
  if (!(tolerance >= 1e-8)) throw DomainError("tolerance must be >= 1e-8");
  MstarResult r;
  const int n = 999;
  std::vector<double> grid(n + 1);
  std::vector<bool> stable(n + 1);
  double y_prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    grid[i] = i * 1e-3;
    auto c = symmetric_chain(grid[i]);
    // beta itself rises near m2 = 0; what bisection needs is a single switch of the predicate
    if (!(c.y < y_prev)) r.monotone = false;
    y_prev = c.y;
    stable[i] = c.beta_hls < 1.0;
  }
  int first = -1, switches = 0;
  for (int i = 1; i <= n; ++i)
    if (stable[i] != stable[i - 1]) {
      ++switches;
      if (first < 0) first = i;
    }
  if (first < 0) throw ExistenceError("stability threshold not bracketed on [0, 0.999]");
  if (switches != 1) r.monotone = false;
  r.lo = grid[first - 1];
  r.hi = grid[first];
  if (!r.monotone) {
    r.warning = "chain not monotone on the grid; reporting the finest-grid boundary";
    r.m_star = 0.5 * (r.lo + r.hi);
    return r;
  }
  while (r.hi - r.lo >= 0.5 * tolerance) {
    double mid = 0.5 * (r.lo + r.hi);
    if (symmetric_chain(mid).beta_hls < 1.0) r.hi = mid;
    else r.lo = mid;
  }
  r.m_star = 0.5 * (r.lo + r.hi);
  return r;
}

struct PolygonVerdictRow {
  int n = 0;
  double m0_over_M = 0;
  double e = 0;
  Site site = Site::S1;
  BangQuantities q;
  StabilityParams params;
  SpectrumVerdict verdict;
  std::array<cd, 4> eigenvalues{};
  double sympl_residual = 0;
  int phi_1 = -1, nu_1 = -1, phi_m1 = -1, nu_m1 = -1;
  std::string error;
};

// Rows ordered by n, m0/M, site, e.
inline std::vector<PolygonVerdictRow> polygon_verdicts(const std::vector<int>& ns, const std::vector<double>& ratios,
                                                       const std::vector<double>& es, const std::vector<Site>& sites,
                                                       const ScanSettings& s = {}) {
  if (ns.empty() || ratios.empty() || es.empty() || sites.empty()) throw DomainError("polygon lists must be nonempty");
  struct Cell { int n; double r; Site site; double e; };
  std::vector<Cell> cells;
  for (int n : ns)
    for (double r : ratios)
      for (Site site : sites)
        for (double e : es) cells.push_back({n, r, site, e});
  return parallel_map<PolygonVerdictRow>(cells.size(), [&](std::size_t i) {
    const auto& c = cells[i];
    PolygonVerdictRow row;
    row.n = c.n;
    row.m0_over_M = c.r;
    row.e = c.e;
    row.site = c.site;
    try {
      auto sys = PolygonSystem::make(c.n, c.r);
      row.q = solve_site(sys, c.site);
      row.params = StabilityParams::from_eigenvalues(row.q.lambda3(), row.q.lambda4(), c.e);
      auto rec = evaluate_point(row.params, s);
      if (!rec.ok()) throw ConvergenceError(rec.error);
      row.verdict = rec.verdict;
      row.eigenvalues = rec.eigenvalues;
      row.sympl_residual = rec.sympl_residual;
      row.phi_1 = rec.phi_1;
      row.nu_1 = rec.nu_1;
      row.phi_m1 = rec.phi_m1;
      row.nu_m1 = rec.nu_m1;
    } catch (const Error& err) {
      row.error = err.what();
    }
    return row;
  });
}

// Largest grid e such that every e' <= e in the table is unstable, per (n, m0/M, site).
struct UniformInstability {
  int n = 0;
  double m0_over_M = 0;
  Site site = Site::S1;
  std::optional<double> e0;
};

inline std::vector<UniformInstability> uniform_instability(const std::vector<PolygonVerdictRow>& rows) {
  std::map<std::tuple<int, double, int>, std::vector<const PolygonVerdictRow*>> groups;
  for (const auto& r : rows) groups[{r.n, r.m0_over_M, static_cast<int>(r.site)}].push_back(&r);
  std::vector<UniformInstability> out;
  for (auto& [key, g] : groups) {
    std::sort(g.begin(), g.end(), [](auto a, auto b) { return a->e < b->e; });
    UniformInstability u{std::get<0>(key), std::get<1>(key), static_cast<Site>(std::get<2>(key)), std::nullopt};
    for (auto* r : g) {
      if (!r->error.empty() || is_spectrally_stable(r->verdict.verdict)) break;
      u.e0 = r->e;
    }
    out.push_back(u);
  }
  return out;
}

}  // namespace erestab
