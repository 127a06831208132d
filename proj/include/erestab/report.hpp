#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scan.hpp"

namespace erestab {

inline constexpr int csv_schema_version = 1;

inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline void eig_columns(std::ostringstream& os, const std::array<cd, 4>& ev) {
  for (const auto& z : ev) os << ',' << fmt17(z.real()) << ',' << fmt17(z.imag());
}

inline std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

inline std::string theta_csv(const std::vector<ScanRecord>& recs) {
  std::ostringstream os;
  os << "# erestab scan-theta schema " << csv_schema_version << "\n";
  os << "beta,e,verdict,phi_1,nu_1,phi_m1,nu_m1";
  for (int i = 1; i <= 4; ++i) os << ",eig" << i << "_re,eig" << i << "_im";
  os << ",sympl_residual,error\n";
  for (const auto& r : recs) {
    double b = r.params.beta_hls ? *r.params.beta_hls : std::nan("");
    os << fmt17(b) << ',' << fmt17(r.params.e) << ',' << (r.ok() ? to_string(r.verdict.verdict) : "Error") << ','
       << r.phi_1 << ',' << r.nu_1 << ',' << r.phi_m1 << ',' << r.nu_m1;
    detail::eig_columns(os, r.eigenvalues);
    os << ',' << fmt17(r.sympl_residual) << ',' << detail::csv_escape(r.error) << "\n";
  }
  return os.str();
}

inline std::string curves_csv(const CurveResult& c) {
  std::ostringstream os;
  os << "# erestab curves schema " << csv_schema_version << "\n";
  os << "e,curve,beta,bracket_width\n";
  for (const auto& p : c.points)
    os << fmt17(p.e) << ',' << to_string(p.curve) << ',' << fmt17(p.beta) << ',' << fmt17(p.bracket_width) << "\n";
  return os.str();
}

inline std::string mass_csv(const std::vector<MassCell>& cells) {
  std::ostringstream os;
  os << "# erestab scan-mass schema " << csv_schema_version << "\n";
  os << "m1,m3,m2,beta,lambda3,lambda4,verdict,stable,error\n";
  for (const auto& c : cells)
    os << fmt17(c.m1) << ',' << fmt17(c.m3) << ',' << fmt17(c.m2) << ',' << fmt17(c.beta_hls) << ','
       << fmt17(c.lambda3) << ',' << fmt17(c.lambda4) << ',' << (c.error.empty() ? to_string(c.verdict) : "Error")
       << ',' << (c.stable ? 1 : 0) << ',' << detail::csv_escape(c.error) << "\n";
  return os.str();
}

inline std::string polygon_csv(const std::vector<PolygonVerdictRow>& rows) {
  std::ostringstream os;
  os << "# erestab polygon-verdicts schema " << csv_schema_version << "\n";
  os << "n,m0_over_M,site,e,rho,A_over_omega2,B_over_omega2,l3,lambda3,lambda4,verdict,phi_1,nu_1,phi_m1,nu_m1";
  for (int i = 1; i <= 4; ++i) os << ",eig" << i << "_re,eig" << i << "_im";
  os << ",sympl_residual,error\n";
  for (const auto& r : rows) {
    bool ok = r.error.empty();
    os << r.n << ',' << fmt17(r.m0_over_M) << ',' << to_string(r.site) << ',' << fmt17(r.e) << ','
       << fmt17(r.q.rho) << ',' << fmt17(ok ? r.q.a_ratio() : std::nan("")) << ','
       << fmt17(ok ? r.q.b_ratio() : std::nan("")) << ',' << fmt17(r.q.l3) << ',' << fmt17(r.params.lambda3) << ','
       << fmt17(r.params.lambda4) << ',' << (ok ? to_string(r.verdict.verdict) : "Error") << ',' << r.phi_1 << ','
       << r.nu_1 << ',' << r.phi_m1 << ',' << r.nu_m1;
    detail::eig_columns(os, r.eigenvalues);
    os << ',' << fmt17(r.sympl_residual) << ',' << detail::csv_escape(r.error) << "\n";
  }
  return os.str();
}

inline const char* verdict_color(Verdict v) {
  switch (v) {
    case Verdict::StronglyLinearlyStable: return "#2b8a3e";
    case Verdict::LinearlyStable: return "#8ccf7e";
    case Verdict::SpectrallyStableNotLinear: return "#f5b041";
    case Verdict::Hyperbolic: return "#3b78c2";
    case Verdict::Unstable: return "#d6453d";
  }
  return "#999999";
}

struct SvgStyle {
  std::string title;
  std::string x_label = "beta";
  std::string y_label = "e";
  double x_min = 0, x_max = 9, y_min = 0, y_max = 1;
};

// A point to colour: position plus verdict (or error).
struct SvgPoint {
  double x = 0, y = 0;
  Verdict verdict = Verdict::Unstable;
  bool error = false;
};

struct SvgCurve {
  std::string name;
  std::vector<std::pair<double, double>> xy;
};

inline std::string emit_svg(const std::vector<SvgPoint>& points, const std::vector<SvgCurve>& curves,
                            const SvgStyle& st) {
  using detail::px;
  constexpr double W = 900, H = 600, L = 70, R = 720, T = 40, B = 540;
  auto sx = [&](double x) { return L + (x - st.x_min) / (st.x_max - st.x_min) * (R - L); };
  auto sy = [&](double y) { return B - (y - st.y_min) / (st.y_max - st.y_min) * (B - T); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"600\" viewBox=\"0 0 900 600\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  if (!st.title.empty())
    os << "<text x=\"" << px((L + R) / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << st.title
       << "</text>\n";

  // cell size from the distinct coordinates present
  std::set<double> xs, ys;
  for (const auto& p : points) {
    xs.insert(p.x);
    ys.insert(p.y);
  }
  auto spacing = [](const std::set<double>& s, double span) {
    if (s.size() < 2) return span / 50;
    double d = span;
    for (auto it = std::next(s.begin()); it != s.end(); ++it) d = std::min(d, *it - *std::prev(it));
    return d;
  };
  double cw = spacing(xs, st.x_max - st.x_min) / (st.x_max - st.x_min) * (R - L);
  double ch = spacing(ys, st.y_max - st.y_min) / (st.y_max - st.y_min) * (B - T);
  os << "<g id=\"cells\">\n";
  for (const auto& p : points) {
    const char* col = p.error ? "#999999" : verdict_color(p.verdict);
    os << "<rect class=\"" << (p.error ? "Error" : to_string(p.verdict)) << "\" x=\"" << px(sx(p.x) - cw / 2)
       << "\" y=\"" << px(sy(p.y) - ch / 2) << "\" width=\"" << px(cw) << "\" height=\"" << px(ch) << "\" fill=\""
       << col << "\"/>\n";
  }
  os << "</g>\n";

  static const char* curve_colors[] = {"#000000", "#6a3d9a", "#b15928", "#1f78b4"};
  static const char* curve_dash[] = {"", "6,3", "2,2", "8,2,2,2"};
  os << "<g id=\"curves\" fill=\"none\" stroke-width=\"2\">\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    if (curves[c].xy.empty()) continue;
    os << "<polyline class=\"" << curves[c].name << "\" stroke=\"" << curve_colors[c % 4] << "\"";
    if (*curve_dash[c % 4]) os << " stroke-dasharray=\"" << curve_dash[c % 4] << "\"";
    os << " points=\"";
    for (std::size_t i = 0; i < curves[c].xy.size(); ++i)
      os << (i ? " " : "") << px(sx(curves[c].xy[i].first)) << ',' << px(sy(curves[c].xy[i].second));
    os << "\"/>\n";
  }
  os << "</g>\n";

  os << "<g id=\"axes\" stroke=\"black\" font-size=\"12\">\n";
  os << "<line x1=\"" << L << "\" y1=\"" << B << "\" x2=\"" << R << "\" y2=\"" << B << "\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << B << "\" x2=\"" << L << "\" y2=\"" << T << "\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double xv = st.x_min + (st.x_max - st.x_min) * i / 5, yv = st.y_min + (st.y_max - st.y_min) * i / 5;
    char lab[32];
    os << "<line x1=\"" << px(sx(xv)) << "\" y1=\"" << B << "\" x2=\"" << px(sx(xv)) << "\" y2=\"" << B + 5
       << "\"/>\n";
    std::snprintf(lab, sizeof lab, "%.3g", xv);
    os << "<text stroke=\"none\" x=\"" << px(sx(xv)) << "\" y=\"" << B + 20 << "\" text-anchor=\"middle\">" << lab
       << "</text>\n";
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << px(sy(yv)) << "\" x2=\"" << L << "\" y2=\"" << px(sy(yv))
       << "\"/>\n";
    std::snprintf(lab, sizeof lab, "%.3g", yv);
    os << "<text stroke=\"none\" x=\"" << L - 8 << "\" y=\"" << px(sy(yv) + 4) << "\" text-anchor=\"end\">" << lab
       << "</text>\n";
  }
  os << "<text stroke=\"none\" x=\"" << px((L + R) / 2) << "\" y=\"" << B + 45 << "\" text-anchor=\"middle\">"
     << st.x_label << "</text>\n";
  os << "<text stroke=\"none\" x=\"20\" y=\"" << px((T + B) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << px((T + B) / 2) << ")\">" << st.y_label << "</text>\n";
  os << "</g>\n";

  os << "<g id=\"legend\" font-size=\"12\">\n";
  const Verdict all[] = {Verdict::StronglyLinearlyStable, Verdict::LinearlyStable, Verdict::SpectrallyStableNotLinear,
                         Verdict::Hyperbolic, Verdict::Unstable};
  double ly = T + 10;
  for (Verdict v : all) {
    os << "<rect x=\"735\" y=\"" << px(ly) << "\" width=\"12\" height=\"12\" fill=\"" << verdict_color(v) << "\"/>";
    os << "<text x=\"752\" y=\"" << px(ly + 10) << "\">" << to_string(v) << "</text>\n";
    ly += 20;
  }
  for (std::size_t c = 0; c < curves.size(); ++c) {
    os << "<line x1=\"735\" y1=\"" << px(ly + 6) << "\" x2=\"747\" y2=\"" << px(ly + 6) << "\" stroke=\""
       << curve_colors[c % 4] << "\" stroke-width=\"2\"/>";
    os << "<text x=\"752\" y=\"" << px(ly + 10) << "\">" << curves[c].name << "</text>\n";
    ly += 20;
  }
  os << "</g>\n";
  if (points.empty() && curves.empty())
    os << "<text class=\"warning\" x=\"" << px((L + R) / 2) << "\" y=\"" << px((T + B) / 2)
       << "\" text-anchor=\"middle\" font-size=\"16\" fill=\"#d6453d\">no data</text>\n";
  os << "</svg>\n";
  return os.str();
}

inline std::string theta_svg(const std::vector<ScanRecord>& recs, const CurveResult* curves = nullptr) {
  std::vector<SvgPoint> pts;
  for (const auto& r : recs) {
    if (!r.params.beta_hls) continue;
    pts.push_back({*r.params.beta_hls, r.params.e, r.verdict.verdict, !r.ok()});
  }
  std::vector<SvgCurve> cs;
  if (curves) {
    for (Curve c : {Curve::BetaS, Curve::BetaM, Curve::BetaK}) {
      SvgCurve sc{to_string(c), {}};
      for (const auto& p : curves->points)
        if (p.curve == c) sc.xy.push_back({p.beta, p.e});
      std::sort(sc.xy.begin(), sc.xy.end(), [](auto a, auto b) { return a.second < b.second; });
      cs.push_back(std::move(sc));
    }
  }
  SvgStyle st;
  st.title = "Linear stability in the (beta, e) rectangle";
  return emit_svg(pts, cs, st);
}

inline std::string mass_svg(const std::vector<MassCell>& cells) {
  std::vector<SvgPoint> pts;
  for (const auto& c : cells) pts.push_back({c.m1, c.m3, c.verdict, !c.error.empty()});
  SvgStyle st;
  st.title = "Stability of the massless body over (m1, m3)";
  st.x_label = "m1";
  st.y_label = "m3";
  return emit_svg(pts, {}, st);
}

}  // namespace erestab
