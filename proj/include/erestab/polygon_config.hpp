#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "central_config.hpp"
#include "errors.hpp"
#include "roots.hpp"

namespace erestab {

enum class Site { S1, S2, S3 };

inline const char* to_string(Site s) {
  switch (s) {
    case Site::S1: return "S1";
    case Site::S2: return "S2";
    case Site::S3: return "S3";
  }
  return "?";
}

inline Site parse_site(const std::string& s) {
  if (s == "S1" || s == "s1") return Site::S1;
  if (s == "S2" || s == "s2") return Site::S2;
  if (s == "S3" || s == "s3") return Site::S3;
  throw DomainError("unknown site '" + s + "'");
}

inline double h1(int n) {
  if (n < 1) throw DomainError("h1 needs n >= 1");
  double s = 0.0;
  for (int j = 1; j < n; ++j) s += 1.0 / std::sin(j * std::numbers::pi / n);
  return s / (4.0 * n);
}

inline double hn(int n, double x, double u = 0.0) {
  if (n < 1) throw DomainError("hn needs n >= 1");
  if (!(x >= 0.0)) throw DomainError("hn needs x >= 0");
  double s = 0.0;
  for (int j = 0; j < n; ++j) {  // j = 0 stands for j = n
    double phi = 2.0 * std::numbers::pi * j / n + u;
    double sh = std::sin(0.5 * phi);
    // 1 + x^2 - 2x cos(phi), written to avoid cancellation near x = 1
    double den = (1 - x) * (1 - x) + 4 * x * sh * sh;
    if (den == 0.0) throw SingularityError("hn: term j=" + std::to_string(j) + " is singular");
    s += (1 - x * std::cos(phi)) / (den * std::sqrt(den));
  }
  return s / n;
}

struct PolygonSystem {
  int n = 0;
  double m0 = 0, m = 0, M = 0, alpha = 0, omega_sq = 0;

  static PolygonSystem make(int n, double m0_over_M) {
    if (n < 2 || n > 64) throw DomainError("polygon needs 2 <= n <= 64");
    if (!(m0_over_M > 0.0) || !std::isfinite(m0_over_M))
      throw DomainError("m0/M must be positive and finite");
    PolygonSystem s;
    s.n = n;
    s.M = 1.0 / (1.0 + m0_over_M);
    s.m0 = m0_over_M / (1.0 + m0_over_M);
    s.m = s.M / n;
    s.alpha = 1.0 / std::sqrt(s.M);
    s.omega_sq = s.m0 + s.M * h1(n);
    return s;
  }

  MassSystem mass_system() const {
    std::vector<double> ms(n + 1, m);
    ms[0] = m0;
    return MassSystem{ms, MassKind::Polygon};
  }

  std::complex<double> vertex(int j) const {
    return std::polar(1.0, -2.0 * std::numbers::pi * j / n);
  }
};

inline double site_theta(const PolygonSystem& s, Site site) {
  return site == Site::S3 ? std::numbers::pi / s.n : 0.0;
}

inline double psi(const PolygonSystem& s, double rho, double u) {
  return s.m0 * (1 - rho * rho * rho) + s.M * (hn(s.n, 1.0 / rho, u) - h1(s.n) * rho * rho * rho);
}
inline double psi1(const PolygonSystem& s, double rho) { return psi(s, rho, 0.0); }
inline double psi2(const PolygonSystem& s, double rho) { return psi(s, rho, std::numbers::pi / s.n); }

struct BangQuantities {
  Site site = Site::S1;
  double rho = 0, theta = 0;
  double A = 0;
  std::complex<double> B;  // in the frame aligned with theta
  double l2 = 0, l3 = 0;
  double omega_sq = 0;
  double psi_residual = 0;

  double a_ratio() const { return A / omega_sq; }
  double b_ratio() const { return std::abs(B) / omega_sq; }
  double lambda3() const { return 1 + a_ratio() + b_ratio(); }
  double lambda4() const { return 1 + a_ratio() - b_ratio(); }
};

inline BangQuantities bang_quantities(const PolygonSystem& s, double rho, double theta) {
  const std::complex<double> w0 = std::polar(rho, theta);
  double A = 0.0;
  std::complex<double> B = 0.0;
  for (int j = 1; j <= s.n; ++j) {
    std::complex<double> d = w0 - s.vertex(j);
    double r = std::abs(d);
    if (r == 0.0) throw SingularityError("massless site coincides with vertex " + std::to_string(j));
    double r2 = r * r;
    A += 1.0 / (r2 * r);
    B += d * d / (r2 * r2 * r);
  }
  A *= s.M / (2.0 * s.n);
  B *= 3.0 * s.M / (2.0 * s.n);
  double r0 = std::abs(w0);
  A += s.m0 / (2 * r0 * r0 * r0);
  B += 1.5 * s.m0 * w0 * w0 / std::pow(r0, 5);
  B *= std::polar(1.0, -2.0 * theta);

  BangQuantities q;
  q.rho = rho;
  q.theta = theta;
  q.A = A;
  q.B = B;
  q.omega_sq = s.omega_sq;
  q.l2 = s.omega_sq - A;
  q.l3 = s.omega_sq + A - std::abs(B);
  return q;
}

inline BangQuantities solve_site(const PolygonSystem& s, Site site) {
  double lo, hi, u;
  switch (site) {
    case Site::S1: lo = 1 + 1e-6; hi = 50; u = 0; break;
    case Site::S2: lo = 1e-3; hi = 1 - 1e-6; u = 0; break;
    default: lo = 1 + 1e-9; hi = 50; u = std::numbers::pi / s.n; break;
  }
  auto f = [&](double rho) { return psi(s, rho, u); };
  double rho;
  try {
    rho = bracketed_root(f, lo, hi, 1e-15);
  } catch (const ExistenceError&) {
    throw ExistenceError(std::string("site ") + to_string(site) + " not bracketed for n=" +
                         std::to_string(s.n));
  }
  BangQuantities q = bang_quantities(s, rho, site_theta(s, site));
  q.site = site;
  q.psi_residual = std::fabs(f(rho));
  return q;
}

// Explicit primaries (centre first, then vertices) with the massless body at the site.
inline Configuration polygon_configuration(const PolygonSystem& s, const BangQuantities& q) {
  std::vector<double> ms(s.n + 1, s.m);
  ms[0] = s.m0;
  std::vector<Vec2> a(s.n + 1, Vec2::Zero());
  for (int j = 1; j <= s.n; ++j) {
    auto v = s.alpha * s.vertex(j);
    a[j] = Vec2(v.real(), v.imag());
  }
  Configuration c = normalized_configuration(ms, a);
  auto w = s.alpha * std::polar(q.rho, q.theta);
  c.massless_position = Vec2(w.real(), w.imag());
  detail::refresh_residuals(c);
  return c;
}

struct PolygonLimitRow {
  double m0_over_M = 0;
  BangQuantities q;
  double a_ratio = 0, b_ratio = 0, l3 = 0, lambda3 = 0, lambda4 = 0;
};

inline std::vector<PolygonLimitRow> polygon_limits(int n, const std::vector<double>& ratios, Site site) {
  std::vector<PolygonLimitRow> rows;
  for (double r : ratios) {
    auto s = PolygonSystem::make(n, r);
    PolygonLimitRow row;
    row.m0_over_M = r;
    row.q = solve_site(s, site);
    row.a_ratio = row.q.a_ratio();
    row.b_ratio = row.q.b_ratio();
    row.l3 = row.q.l3;
    row.lambda3 = row.q.lambda3();
    row.lambda4 = row.q.lambda4();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace erestab
