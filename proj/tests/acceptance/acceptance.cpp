// Runs the acceptance criteria and prints one PASS/FAIL line each.
#include <erestab/linearization.hpp>
#include <erestab/maslov_index.hpp>
#include <erestab/monodromy.hpp>
#include <erestab/polygon_config.hpp>
#include <erestab/scan.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace erestab;

namespace {

std::mt19937_64 gen(20240611);
double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }

struct Outcome {
  bool pass = true;
  std::ostringstream note;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [failed: " << what << "]";
    }
  }
};

using Check = std::function<void(Outcome&)>;

bool run(int id, const char* title, double budget_s, const Check& check) {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  try {
    check(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.note << " [exception: " << e.what() << "]";
  }
  double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (dt >= budget_s) {
    o.pass = false;
    o.note << " [runtime over budget]";
  }
  std::printf("%s %2d %s (%.1fs / %.0fs)%s\n", o.pass ? "PASS" : "FAIL", id, title, dt, budget_s,
              o.note.str().c_str());
  std::fflush(stdout);
  return o.pass;
}

void trace_law(Outcome& o) {
  double worst_trace = 0, min_l4 = 1e300;
  auto record = [&](const Configuration& c) {
    auto p = spectral_params(compute_D(c), 0.0);
    worst_trace = std::max(worst_trace, std::fabs(p.lambda3 + p.lambda4 - 3));
    min_l4 = std::min(min_l4, p.lambda4);
  };
  for (int i = 0; i < 200; ++i)
    record(restricted_position_multistart(
        collinear_three_primaries(MassSystem::collinear({uniform(0.01, 1), uniform(0.01, 1), uniform(0.01, 1)}))));
  for (int i = 0; i < 50; ++i) {
    std::vector<double> m;
    for (int k = 0; k < 4; ++k) m.push_back(uniform(0.01, 1));
    record(restricted_position_multistart(moulton_collinear(MassSystem::collinear(m))));
  }
  o.note << " max|l3+l4-3|=" << worst_trace << " min l4=" << min_l4;
  o.require(worst_trace < 1e-9, "trace");
  o.require(min_l4 > -1e-9, "l4 sign");
}

void symmetric_anchors(Outcome& o) {
  double y0 = solve_symmetric_y(0.0), y1 = solve_symmetric_y(1 - 1e-9);
  double b1 = symmetric_chain(1 - 1e-9).beta_hls, b0 = symmetric_chain(0.0).beta_hls;
  const double m1 = 0.5, m2 = 0.0, m3 = 0.5;
  double routh = 27 * (m1 * m2 + m2 * m3 + m3 * m1) / std::pow(m1 + m2 + m3, 2);
  bool decreasing = true;
  double prev = y0;
  for (int i = 1; i < 1000; ++i) {
    double y = solve_symmetric_y(i * 1e-3);
    decreasing = decreasing && y < prev;
    prev = y;
  }
  o.note << " y(0)=" << y0 << " y(1-)=" << y1 << " beta(1-)=" << b1 << " beta(0)=" << b0 << " routh=" << routh;
  o.require(std::fabs(y0 - std::sqrt(3.0)) < 1e-12, "y(0)");
  o.require(std::fabs(y1 - 1) < 1e-3, "y(1-)");
  o.require(std::fabs(b1) < 1e-6, "beta(1-)");
  o.require(std::fabs(b0 - 6.75) < 1e-10, "beta(0)");
  o.require(std::fabs(routh - b0) < 1e-10, "routh cross-check");
  o.require(decreasing, "dy/dm2 < 0");
}

void threshold(Outcome& o) {
  auto r = find_mstar(1e-6);
  o.note << " m*=" << r.m_star << " bracket=[" << r.lo << ", " << r.hi << "]";
  o.require(r.m_star >= 0.84 && r.m_star <= 0.87, "range");
  o.require(r.bracket_width() < 1e-6, "bracket width");
  o.require(0.854 >= r.lo - 0.005 && 0.854 <= r.hi + 0.005, "0.854 within bracket +- 0.005");
}

void circular_oracle(Outcome& o) {
  double worst_abs = 0, worst_rel = 0;
  for (int i = 0; i < 50; ++i) {
    auto p = StabilityParams::from_alpha_beta(uniform(0, 3), uniform(0, 3), 0.0);
    auto m = integrate_fundamental(p);
    Mat4 a = 2 * std::numbers::pi * j4() * b_matrix(p, 0.0);
    auto ref = eigenvalues(Mat4(a.exp()));
    for (auto z : m.eigenvalues) {
      double best = 1e300;
      for (auto w : ref) best = std::min(best, std::abs(z - w));
      worst_abs = std::max(worst_abs, best);
      worst_rel = std::max(worst_rel, best / std::max(1.0, std::abs(z)));
    }
  }
  o.note << " max abs err=" << worst_abs << " max err/max(1,|z|)=" << worst_rel;
  o.require(worst_abs < 1e-8, "eigenvalue match");
}

void symplecticity(Outcome& o) {
  double worst = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 10; ++j) {
      auto m = integrate_fundamental(StabilityParams::from_hls(9.0 * i / 19, 0.1 * j), 1e-12);
      worst = std::max(worst, m.symplectic_residual);
    }
  o.note << " max residual=" << worst;
  o.require(worst < 1e-8, "residual");
}

void index_anchors(Outcome& o) {
  int nonzero = 0;
  for (double b : {0.0, 0.5, 1.0, 1.4})
    for (double e : {0.0, 0.3, 0.6})
      nonzero += morse_index(StabilityParams::from_alpha_beta(0.5, b, e), Twist::periodic()).phi != 0;
  int anchor = morse_index(StabilityParams::from_alpha_beta(0.5, 1.5, 0.2), Twist::antiperiodic()).phi;
  int mismatches = 0, kernels = 0;
  for (int i = 0; i < 20; ++i) {
    auto p = StabilityParams::from_alpha_beta(uniform(0, 2), uniform(0, 3), uniform(0, 0.6));
    auto m = integrate_fundamental(p);
    for (auto tw : {Twist::periodic(), Twist::antiperiodic()}) {
      int nu = morse_index(p, tw).nu, dim = nullity(m.gamma_end, tw.omega(), 1e-3);
      mismatches += nu != dim;
      kernels += dim;
    }
  }
  o.note << " phi_1 nonzero at " << nonzero << "/12, phi_-1(1/2,3/2,0.2)=" << anchor << ", kernel mismatches "
         << mismatches << "/40 (nonzero kernels " << kernels << ")";
  o.require(nonzero == 0, "phi_1 = 0");
  o.require(anchor == 2, "phi_-1 anchor");
  o.require(mismatches == 0, "kernel dimensions");
}

void circular_transition(Outcome& o) {
  auto v09 = classify_spectrum(integrate_fundamental(StabilityParams::from_hls(0.9, 0.0))).verdict;
  auto v11 = classify_spectrum(integrate_fundamental(StabilityParams::from_hls(1.1, 0.0))).verdict;
  CurveSettings cs;
  auto res = find_curves({0.0}, cs);
  const auto& row = res.rows.at(0);
  o.note << " verdict(0.9,0)=" << to_string(v09) << " verdict(1.1,0)=" << to_string(v11);
  o.require(is_spectrally_stable(v09), "stable at 0.9");
  o.require(!is_spectrally_stable(v11), "unstable at 1.1");
  if (!row.beta_s) {
    o.require(false, "beta_s(0) missing: " + row.error);
    return;
  }
  o.note << " beta_s(0)=" << *row.beta_s << " (beta_k(0)=" << row.beta_k.value_or(NAN) << ")";
  o.require(*row.beta_s >= 0.95 && *row.beta_s <= 1.05, "beta_s(0) in [0.95, 1.05]");
}

void curve_structure(Outcome& o) {
  std::vector<double> es;
  for (int j = 0; j <= 5; ++j) es.push_back(0.1 * j);
  CurveSettings cs;
  auto res = find_curves(es, cs);
  for (const auto& row : res.rows) {
    // one entry per unit drop; a double jump at one beta contributes two
    int drops = static_cast<int>(row.jumps.size());
    bool ordered = row.beta_s && row.beta_m && row.beta_k && *row.beta_s <= *row.beta_m &&
                   *row.beta_m <= *row.beta_k;
    o.note << " e=" << row.e << ":drops=" << drops;
    if (row.beta_s && row.beta_m && row.beta_k)
      o.note << ",b=(" << *row.beta_s << "," << *row.beta_m << "," << *row.beta_k << ")";
    std::ostringstream tag;
    tag << "e=" << row.e;
    o.require(row.error.empty(), tag.str() + " " + row.error);
    o.require(row.monotone, tag.str() + " non-increasing");
    o.require(drops == 2, tag.str() + " two unit jumps");
    o.require(ordered, tag.str() + " ordering");
  }
}

void polygon_limit_check(Outcome& o) {
  auto s = PolygonSystem::make(8, 1e6);
  auto q1 = solve_site(s, Site::S1), q3 = solve_site(s, Site::S3);
  auto cfg = polygon_configuration(s, q3);
  double u = 0;
  for (std::size_t i = 0; i < cfg.masses.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.masses.size(); ++j)
      u += cfg.masses[i] * cfg.masses[j] / (cfg.primary_positions[i] - cfg.primary_positions[j]).norm();
  double defect = u * std::pow(s.alpha, 3) - s.omega_sq;
  o.note << " S1: A/w2=" << q1.a_ratio() << " |B|/w2=" << q1.b_ratio() << " l3=" << q1.l3 << "; S3: A/w2="
         << q3.a_ratio() << " l3=" << q3.l3 << " 2A-w2=" << 2 * q3.A - q3.omega_sq << "; mu a^3-w2=" << defect;
  o.require(std::fabs(q1.a_ratio() - 2) < 0.05, "S1 A");
  o.require(std::fabs(q1.b_ratio() - 6) < 0.15, "S1 B");
  o.require(q1.l3 < 0, "S1 l3");
  o.require(q3.a_ratio() > 0.5 && q3.a_ratio() < 0.55, "S3 A");
  o.require(q3.l3 > 0 && q3.l3 < 0.05, "S3 l3");
  o.require(2 * q3.A - q3.omega_sq > 0, "S3 2A-w2");
  o.require(std::fabs(defect) < 1e-10, "mu a^3 = w2");
}

void polygon_verdict_check(Outcome& o) {
  auto unstable = polygon_verdicts({8}, {1e3}, {0.0, 0.05, 0.1}, {Site::S1, Site::S2});
  for (const auto& r : unstable) {
    o.require(r.error.empty(), r.error);
    o.require(!is_spectrally_stable(r.verdict.verdict), std::string(to_string(r.site)) + " stable");
  }
  auto stable = polygon_verdicts({8}, {1e3}, {0.0, 0.1, 0.3}, {Site::S3});
  double worst = 0;
  for (const auto& r : stable) {
    o.require(r.error.empty(), r.error);
    for (auto z : r.eigenvalues) worst = std::max(worst, std::fabs(std::abs(z) - 1));
    o.require(r.phi_m1 - r.phi_1 == 2, "S3 index jump");
  }
  o.note << " S1/S2 rows=" << unstable.size() << " S3 max||z|-1|=" << worst;
  o.require(worst < 1e-5, "S3 on circle");
}

void mass_plane(Outcome& o) {
  std::vector<double> g;
  for (int i = 0; i < 100; ++i) g.push_back((i + 0.5) * 0.005);
  ScanSettings s;
  s.indices = false;
  auto cells = mass_scan_4body(g, g, 0.0, s);
  int stable = 0, asym = 0, errors = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const auto& a = cells[i * g.size() + j];
      stable += a.stable;
      errors += !a.error.empty();
      asym += a.stable != cells[j * g.size() + i].stable;
    }
  auto in = mass_cell(0.073, 0.073, 0.0, s), out = mass_cell(0.25, 0.25, 0.0, s);
  o.note << " stable cells=" << stable << "/10000 asymmetric=" << asym << " errors=" << errors
         << "; (0.073,0.073): beta=" << in.beta_hls << " " << to_string(in.verdict) << "; (0.25,0.25): "
         << to_string(out.verdict);
  o.require(stable > 0, "nonempty");
  o.require(asym == 0, "symmetric");
  o.require(in.stable, "contains (0.073, 0.073)");
  o.require(!out.stable, "excludes (0.25, 0.25)");
}

}  // namespace

int main() {
  int failed = 0;
  failed += !run(1, "collinear trace law", 10, trace_law);
  failed += !run(2, "symmetric-family anchors", 1, symmetric_anchors);
  failed += !run(3, "threshold m*", 5, threshold);
  failed += !run(4, "e=0 exponential oracle", 30, circular_oracle);
  failed += !run(5, "symplecticity", 60, symplecticity);
  failed += !run(6, "index anchors", 120, index_anchors);
  failed += !run(7, "circular stability transition", 10, circular_transition);
  failed += !run(8, "curve structure", 600, curve_structure);
  failed += !run(9, "polygon limits", 5, polygon_limit_check);
  failed += !run(10, "polygon verdicts", 120, polygon_verdict_check);
  failed += !run(11, "mass-plane stable set", 300, mass_plane);
  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
