#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "roots.hpp"

namespace erestab {

using Vec2 = Eigen::Vector2d;

enum class MassKind { Collinear, Polygon };

struct MassSystem {
  std::vector<double> masses;
  MassKind kind = MassKind::Collinear;

  // Rescales raw positive masses so they sum to one.
  static MassSystem collinear(std::vector<double> raw) {
    if (raw.empty()) throw DomainError("mass system is empty");
    double total = 0.0;
    for (double m : raw) {
      if (!(m > 0.0) || !std::isfinite(m))
        throw DomainError("primary masses must be positive and finite");
      total += m;
    }
    for (double& m : raw) m /= total;
    return MassSystem{std::move(raw), MassKind::Collinear};
  }

  double total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }
  std::size_t size() const { return masses.size(); }
};

struct Configuration {
  std::vector<double> masses;
  std::vector<Vec2> primary_positions;
  std::optional<Vec2> massless_position;
  double mu = 0.0;
  double cc_residual = 0.0;
  double inertia_residual = 0.0;
  double com_residual = 0.0;
};

inline double potential(const std::vector<double>& m, const std::vector<Vec2>& a) {
  double u = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) u += m[i] * m[j] / (a[i] - a[j]).norm();
  return u;
}

// Defect of the central configuration equation at point p, skipping the body
// located at index `self` (pass npos for the massless body).
inline Vec2 cc_defect(const std::vector<double>& m, const std::vector<Vec2>& a, double mu,
                      const Vec2& p, std::size_t self = static_cast<std::size_t>(-1)) {
  Vec2 f = mu * p;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (j == self) continue;
    Vec2 d = a[j] - p;
    double r = d.norm();
    if (r == 0.0) throw SingularityError("point coincides with primary " + std::to_string(j));
    f += m[j] * d / (r * r * r);
  }
  return f;
}

namespace detail {

inline void refresh_residuals(Configuration& c) {
  double cc = 0.0;
  for (std::size_t i = 0; i < c.primary_positions.size(); ++i)
    cc = std::max(cc, cc_defect(c.masses, c.primary_positions, c.mu, c.primary_positions[i], i).norm());
  if (c.massless_position)
    cc = std::max(cc, cc_defect(c.masses, c.primary_positions, c.mu, *c.massless_position).norm());
  c.cc_residual = cc;
  Vec2 com = Vec2::Zero();
  double inertia = 0.0;
  for (std::size_t i = 0; i < c.masses.size(); ++i) {
    com += c.masses[i] * c.primary_positions[i];
    inertia += c.masses[i] * c.primary_positions[i].squaredNorm();
  }
  c.com_residual = com.norm();
  c.inertia_residual = std::fabs(inertia - 1.0);
}

}  // namespace detail

// Translates to zero centre of mass, scales to unit inertia and sets mu = U(a).
inline Configuration normalized_configuration(std::vector<double> m, std::vector<Vec2> a) {
  double total = std::accumulate(m.begin(), m.end(), 0.0);
  Vec2 com = Vec2::Zero();
  for (std::size_t i = 0; i < m.size(); ++i) com += m[i] * a[i];
  com /= total;
  double inertia = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    a[i] -= com;
    inertia += m[i] * a[i].squaredNorm();
  }
  if (!(inertia > 0.0)) throw DegenerateSolutionError("configuration has zero inertia");
  double s = 1.0 / std::sqrt(inertia);
  for (auto& p : a) p *= s;
  Configuration c;
  c.masses = std::move(m);
  c.primary_positions = std::move(a);
  c.mu = potential(c.masses, c.primary_positions);
  detail::refresh_residuals(c);
  return c;
}

inline std::array<double, 6> euler_quintic_coefficients(double m1, double m2, double m3) {
  // ascending powers x^0 .. x^5
  return {-(m1 + m2), -(3 * m1 + 2 * m2), -(3 * m1 + m2), 3 * m3 + m2, 3 * m3 + 2 * m2, m3 + m2};
}

inline double euler_quintic(double m1, double m2, double m3, double x) {
  auto c = euler_quintic_coefficients(m1, m2, m3);
  double v = 0.0;
  for (int k = 5; k >= 0; --k) v = v * x + c[k];
  return v;
}

inline double solve_euler_quintic(double m1, double m2, double m3) {
  if (!(m1 > 0 && m2 > 0 && m3 > 0)) throw DomainError("Euler quintic needs positive masses");
  auto q = [&](double x) { return euler_quintic(m1, m2, m3, x); };
  constexpr int samples = 10000;
  const double lo = std::log(1e-8), hi = std::log(100.0);
  double xprev = std::exp(lo), fprev = q(xprev);
  for (int i = 1; i < samples; ++i) {
    double x = std::exp(lo + (hi - lo) * i / (samples - 1));
    double fx = q(x);
    if ((fprev < 0) != (fx < 0) || fx == 0.0) return bracketed_root(q, xprev, x);
    xprev = x;
    fprev = fx;
  }
  throw ConvergenceError("Euler quintic: no sign change on (0, 100)");
}

// Three collinear primaries ordered m1, m2, m3 left to right.
inline Configuration collinear_three_primaries(const MassSystem& sys) {
  if (sys.kind != MassKind::Collinear || sys.size() != 3)
    throw DomainError("collinear_three_primaries needs three collinear masses");
  const auto& m = sys.masses;
  double x = solve_euler_quintic(m[0], m[1], m[2]);
  return normalized_configuration(m, {Vec2(0, 0), Vec2(x, 0), Vec2(1 + x, 0)});
}

struct NewtonOptions {
  int max_iter = 200;
  int max_halvings = 30;
  double tol = 1e-13;
};

// Collinear configuration of k bodies; ordering[p] is the mass index placed at
// the p-th slot from the left.
inline Configuration moulton_collinear(const MassSystem& sys, std::vector<int> ordering = {},
                                       NewtonOptions opt = {}) {
  const std::size_t k = sys.size();
  if (k < 2) throw DomainError("moulton_collinear needs at least two masses");
  if (ordering.empty()) {
    ordering.resize(k);
    std::iota(ordering.begin(), ordering.end(), 0);
  }
  {
    auto sorted = ordering;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < k; ++i)
      if (sorted[i] != static_cast<int>(i)) throw DomainError("ordering is not a permutation");
  }
  std::vector<double> ms(k);
  for (std::size_t p = 0; p < k; ++p) ms[p] = sys.masses[ordering[p]];

  const int nv = static_cast<int>(k) - 2;
  auto positions = [&](const Eigen::VectorXd& lg) {
    std::vector<double> x(k, 0.0);
    x[1] = 1.0;
    for (int g = 0; g < nv; ++g) x[g + 2] = x[g + 1] + std::exp(lg[g]);
    double com = 0.0, inertia = 0.0;
    for (std::size_t i = 0; i < k; ++i) com += ms[i] * x[i];
    for (auto& v : x) v -= com;
    for (std::size_t i = 0; i < k; ++i) inertia += ms[i] * x[i] * x[i];
    for (auto& v : x) v /= std::sqrt(inertia);
    return x;
  };
  auto residual = [&](const Eigen::VectorXd& lg) {
    auto x = positions(lg);
    std::vector<double> f(k, 0.0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (i == j) continue;
        double d = x[j] - x[i];
        f[i] += ms[j] * d / (std::fabs(d) * d * d);
      }
      num += ms[i] * x[i] * f[i];
      den += ms[i] * x[i] * x[i];
    }
    double lambda = -num / den;
    Eigen::VectorXd r(nv);
    for (int g = 0; g < nv; ++g) r[g] = f[g + 1] + lambda * x[g + 1];
    return r;
  };

  Eigen::VectorXd lg = Eigen::VectorXd::Zero(nv);
  if (nv > 0) {
    Eigen::VectorXd r = residual(lg);
    double rn = r.norm();
    int it = 0;
    for (; it < opt.max_iter && rn > opt.tol; ++it) {
      Eigen::MatrixXd jac(nv, nv);
      for (int c = 0; c < nv; ++c) {
        double h = 1e-7;
        Eigen::VectorXd lp = lg, lm = lg;
        lp[c] += h;
        lm[c] -= h;
        jac.col(c) = (residual(lp) - residual(lm)) / (2 * h);
      }
      Eigen::VectorXd step = jac.fullPivLu().solve(-r);
      double t = 1.0;
      bool improved = false;
      for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
        Eigen::VectorXd trial = lg + t * step;
        Eigen::VectorXd rt = residual(trial);
        if (rt.allFinite() && rt.norm() < rn) {
          lg = trial;
          r = rt;
          rn = rt.norm();
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (rn > 1e-10)
      throw ConvergenceError("moulton_collinear: Newton stalled with residual " + std::to_string(rn));
  }
  auto x = positions(lg);
  std::vector<Vec2> a(k);
  std::vector<double> m_out(k);
  // report bodies in the caller's mass order
  for (std::size_t p = 0; p < k; ++p) {
    a[ordering[p]] = Vec2(x[p], 0.0);
    m_out[ordering[p]] = ms[p];
  }
  Configuration c = normalized_configuration(m_out, a);
  if (c.cc_residual > 1e-10)
    throw ConvergenceError("moulton_collinear: residual " + std::to_string(c.cc_residual));
  return c;
}

// Off-line equilibrium of the massless body in the field of the primaries.
inline Configuration restricted_position(Configuration config, Vec2 guess = Vec2(0.0, 1.0),
                                         NewtonOptions opt = {}) {
  const auto& m = config.masses;
  const auto& a = config.primary_positions;
  const double mu = config.mu;
  bool on_axis = std::all_of(a.begin(), a.end(), [](const Vec2& p) { return std::fabs(p.y()) < 1e-14; });
  if (on_axis && std::fabs(guess.y()) < 1e-8)
    throw DomainError("initial guess lies on the primaries' line");

  auto F = [&](const Vec2& p) { return cc_defect(m, a, mu, p); };
  auto jac = [&](const Vec2& p) {
    Eigen::Matrix2d J = mu * Eigen::Matrix2d::Identity();
    for (std::size_t j = 0; j < a.size(); ++j) {
      Vec2 d = a[j] - p;
      double r2 = d.squaredNorm(), r = std::sqrt(r2);
      double r3 = r2 * r, r5 = r3 * r2;
      J += m[j] * (-Eigen::Matrix2d::Identity() / r3 + 3.0 * d * d.transpose() / r5);
    }
    return J;
  };

  Vec2 p = guess;
  Vec2 f = F(p);
  double fn = f.norm();
  for (int it = 0; it < opt.max_iter && fn > opt.tol; ++it) {
    Vec2 step = jac(p).fullPivLu().solve(-f);
    double t = 1.0;
    bool improved = false;
    for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      Vec2 trial = p + t * step;
      Vec2 ft;
      try {
        ft = F(trial);
      } catch (const SingularityError&) {
        continue;
      }
      if (ft.allFinite() && ft.norm() < fn) {
        p = trial;
        f = ft;
        fn = ft.norm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(fn < 1e-10))
    throw ConvergenceError("restricted_position: Newton stalled with residual " + std::to_string(fn));
  if (on_axis && std::fabs(p.y()) < 1e-8)
    throw DegenerateSolutionError("restricted_position converged onto the primaries' line");

  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += m[j] / std::pow((a[j] - p).norm(), 3);
  if (on_axis && std::fabs(mu - sum) >= 1e-9)
    throw ConvergenceError("off-line identity mu = sum m/r^3 violated by " +
                           std::to_string(std::fabs(mu - sum)));

  config.massless_position = p;
  detail::refresh_residuals(config);
  return config;
}

// Multi-start wrapper: tries each guess in turn and returns the first off-line solution.
inline Configuration restricted_position_multistart(const Configuration& config,
                                                    std::vector<Vec2> guesses = {Vec2(0.0, 1.0), Vec2(0.0, 2.0),
                                                                                 Vec2(0.0, 1.5), Vec2(0.0, 3.0)},
                                                    NewtonOptions opt = {}) {
  if (guesses.empty()) throw DomainError("no initial guesses");
  std::string last;
  for (const auto& g : guesses) {
    try {
      return restricted_position(config, g, opt);
    } catch (const DegenerateSolutionError& e) {
      last = e.what();
    } catch (const ConvergenceError& e) {
      last = e.what();
    }
  }
  throw ConvergenceError("restricted_position failed from every guess: " + last);
}

inline double solve_symmetric_y(double m2) {
  if (!(m2 >= 0.0 && m2 < 1.0)) throw DomainError("solve_symmetric_y needs m2 in [0, 1)");
  auto g = [m2](double y) {
    return (1 - m2) / std::pow(y * y + 1, 1.5) + m2 / (y * y * y) - (1 + 7 * m2) / 8;
  };
  const double lo = 1.0, hi = std::sqrt(3.0);
  double glo = g(lo), ghi = g(hi);
  if ((glo < 0) == (ghi < 0) && glo != 0.0 && ghi != 0.0) {
    // end-point roots up to rounding (m2 = 0 gives y = sqrt 3 exactly)
    if (std::fabs(ghi) < 1e-15) return hi;
    if (std::fabs(glo) < 1e-15) return lo;
    throw ExistenceError("symmetric y equation has no root in [1, sqrt 3]");
  }
  return bracketed_root(g, lo, hi);
}

}  // namespace erestab
