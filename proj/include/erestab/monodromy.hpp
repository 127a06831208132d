#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linearization.hpp"
#include "ode.hpp"

namespace erestab {

using cd = std::complex<double>;
using Mat4c = Eigen::Matrix4cd;

struct IntegratorRecord {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
  double tol = 0;
};

struct Monodromy {
  Mat4 gamma_end = Mat4::Identity();
  double symplectic_residual = 0;           // ||g^T J g - J||_inf
  double relative_symplectic_residual = 0;  // divided by ||g||_inf^2
  double max_intermediate_residual = 0;     // over the 64 sample points
  std::array<cd, 4> eigenvalues{};
  IntegratorRecord step_metadata;
};

inline double symplectic_residual(const Mat4& g) {
  Mat4 j = j4();
  return (g.transpose() * j * g - j).cwiseAbs().rowwise().sum().maxCoeff();
}

inline double inf_norm(const Mat4& g) { return g.cwiseAbs().rowwise().sum().maxCoeff(); }

// Parlett-Reinsch style diagonal balancing; returns the scaling d with B = D^-1 M D.
inline Eigen::Vector4d balance(Mat4& m) {
  Eigen::Vector4d d = Eigen::Vector4d::Ones();
  bool changed = true;
  for (int sweep = 0; changed && sweep < 100; ++sweep) {
    changed = false;
    for (int i = 0; i < 4; ++i) {
      double c = 0, r = 0;
      for (int j = 0; j < 4; ++j) {
        if (j == i) continue;
        c += std::fabs(m(j, i));
        r += std::fabs(m(i, j));
      }
      if (c == 0 || r == 0) continue;
      double f = 1, s = c + r;
      while (c < r / 2) { c *= 2; r /= 2; f *= 2; }
      while (c >= r * 2) { c /= 2; r *= 2; f /= 2; }
      if ((c + r) < 0.95 * s) {
        changed = true;
        d[i] *= f;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
  return d;
}

struct EigenPairs {
  std::array<cd, 4> values{};
  Mat4c vectors;
};

inline EigenPairs eigen_pairs(const Mat4& m) {
  Mat4 b = m;
  Eigen::Vector4d d = balance(b);
  Eigen::EigenSolver<Mat4> es(b, true);
  if (es.info() != Eigen::Success) throw ConvergenceError("4x4 eigen-decomposition failed");
  EigenPairs out;
  Mat4c v = d.cast<cd>().asDiagonal() * es.eigenvectors();
  for (int i = 0; i < 4; ++i) v.col(i).normalize();
  std::array<int, 4> idx{0, 1, 2, 3};
  auto ev = es.eigenvalues();
  std::sort(idx.begin(), idx.end(), [&](int a, int c) {
    double ma = std::abs(ev[a]), mc = std::abs(ev[c]);
    if (ma != mc) return ma < mc;
    return std::arg(ev[a]) < std::arg(ev[c]);
  });
  for (int i = 0; i < 4; ++i) {
    out.values[i] = ev[idx[i]];
    out.vectors.col(i) = v.col(idx[i]);
  }
  return out;
}

inline std::array<cd, 4> eigenvalues(const Mat4& m) { return eigen_pairs(m).values; }

namespace detail {

using Mat4l = Eigen::Matrix<long double, 4, 4>;
using Vec16l = Eigen::Matrix<long double, 16, 1>;

// Integrates g' = A(t) g, g(0) = I on [0, 2 pi] with A supplied in extended precision.
template <class CoefFn>
Monodromy integrate_generic(CoefFn&& coef, double tol) {
  using Solver = Dop853<long double, 16>;
  auto rhs = [&](long double t, const Vec16l& y) {
    Eigen::Map<const Mat4l> g(y.data());
    Mat4l a = coef(t);
    Vec16l out;
    Eigen::Map<Mat4l>(out.data()) = a * g;
    return out;
  };
  Solver::Options opt;
  // tol bounds the local error of every component absolutely
  opt.rtol = 0;
  opt.atol = tol;
  Solver::Stats st;
  Vec16l y;
  Eigen::Map<Mat4l>(y.data()) = Mat4l::Identity();
  long double h = 0;
  constexpr int samples = 64;
  const long double two_pi = 2 * std::numbers::pi_v<long double>;
  const Mat4l jl = j4().cast<long double>();
  double max_mid = 0;
  for (int k = 0; k < samples; ++k) {
    long double t0 = two_pi * k / samples, t1 = two_pi * (k + 1) / samples;
    y = Solver::integrate(rhs, t0, t1, y, opt, st, h);
    Eigen::Map<const Mat4l> g(y.data());
    Mat4l r = g.transpose() * jl * g - jl;
    max_mid = std::max(max_mid, double(r.cwiseAbs().rowwise().sum().maxCoeff()));
  }
  Monodromy m;
  m.gamma_end = Eigen::Map<const Mat4l>(y.data()).cast<double>();
  m.symplectic_residual = symplectic_residual(m.gamma_end);
  double nrm = inf_norm(m.gamma_end);
  m.relative_symplectic_residual = m.symplectic_residual / std::max(1.0, nrm * nrm);
  m.max_intermediate_residual = max_mid;
  m.eigenvalues = eigenvalues(m.gamma_end);
  m.step_metadata = {st.accepted, st.rejected, st.evaluations, tol};
  return m;
}

inline void check_integration_inputs(double e, double tol) {
  if (!(e >= 0.0 && e <= 0.99)) throw DomainError("eccentricity must lie in [0, 0.99] for integration");
  if (!(tol >= 1e-13)) throw DomainError("integration tolerance must be >= 1e-13");
}

}  // namespace detail

inline Monodromy integrate_fundamental(const StabilityParams& p, double tol = 1e-12) {
  detail::check_integration_inputs(p.e, tol);
  const long double l3 = p.lambda3, l4 = p.lambda4, e = p.e;
  auto coef = [=](long double t) {
    // J B(t) with B = [[I, -J2], [J2, I - r K]]
    long double r = 1 / (1 + e * std::cos(t));
    detail::Mat4l a = detail::Mat4l::Zero();
    a(0, 1) = 1;  a(0, 2) = -(1 - r * l3);
    a(1, 0) = -1; a(1, 3) = -(1 - r * l4);
    a(2, 0) = 1;  a(2, 3) = 1;
    a(3, 1) = 1;  a(3, 2) = -1;
    return a;
  };
  return detail::integrate_generic(coef, tol);
}

// Same system written with the full D matrix (not diagonalised).
inline Monodromy integrate_fundamental_dform(const Mat2& d, double e, double tol = 1e-12) {
  detail::check_integration_inputs(e, tol);
  const detail::Mat4l jl = j4().cast<long double>();
  const Eigen::Matrix<long double, 2, 2> dl = d.cast<long double>();
  const long double el = e;
  auto coef = [=](long double t) {
    long double r = 1 / (1 + el * std::cos(t));
    detail::Mat4l b = detail::Mat4l::Identity();
    b.block<2, 2>(0, 2) = -j2().cast<long double>();
    b.block<2, 2>(2, 0) = j2().cast<long double>();
    b.block<2, 2>(2, 2) = Eigen::Matrix<long double, 2, 2>::Identity() - r * dl;
    return detail::Mat4l(jl * b);
  };
  return detail::integrate_generic(coef, tol);
}

inline Mat4 matrix_exponential(const Mat4& a) {
  double nrm = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  Mat4 x = a / std::ldexp(1.0, s);
  Mat4 term = Mat4::Identity(), sum = Mat4::Identity();
  for (int k = 1; k <= 30; ++k) {
    term = term * x / k;
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18 * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// Normal-form building blocks acting on one (p_i, q_i) pair.
inline Mat2 rotation_block(double theta) {
  Mat2 r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}
inline Mat2 jordan_block(double lambda, double b) {
  Mat2 r;
  r << lambda, b, 0, lambda;
  return r;
}
inline Mat2 hyperbolic_block(double lambda) {
  Mat2 r;
  r << lambda, 0, 0, 1 / lambda;
  return r;
}

// Symplectic direct sum in coordinates (p1, p2, q1, q2).
inline Mat4 direct_sum(const Mat2& a, const Mat2& b) {
  Mat4 m = Mat4::Zero();
  m(0, 0) = a(0, 0); m(0, 2) = a(0, 1); m(2, 0) = a(1, 0); m(2, 2) = a(1, 1);
  m(1, 1) = b(0, 0); m(1, 3) = b(0, 1); m(3, 1) = b(1, 0); m(3, 3) = b(1, 1);
  return m;
}

enum class Verdict { StronglyLinearlyStable, LinearlyStable, SpectrallyStableNotLinear, Hyperbolic, Unstable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::StronglyLinearlyStable: return "StronglyLinearlyStable";
    case Verdict::LinearlyStable: return "LinearlyStable";
    case Verdict::SpectrallyStableNotLinear: return "SpectrallyStableNotLinear";
    case Verdict::Hyperbolic: return "Hyperbolic";
    case Verdict::Unstable: return "Unstable";
  }
  return "?";
}

inline bool is_spectrally_stable(Verdict v) {
  return v == Verdict::StronglyLinearlyStable || v == Verdict::LinearlyStable ||
         v == Verdict::SpectrallyStableNotLinear;
}

struct EigenDetail {
  cd value;
  double modulus = 0;
  double angle = 0;
  bool on_circle = false;
  int cluster_size = 1;
  int krein_sign = 0;  // sign of Im(v* J v) for simple non-real circle eigenvalues
};

struct SpectrumVerdict {
  Verdict verdict = Verdict::Unstable;
  int on_circle_count = 0;
  bool semisimple = true;
  std::vector<EigenDetail> details;
};

// dim ker(M - w I) by singular values below rank_tol.
inline int nullity(const Mat4& m, cd w, double rank_tol) {
  Mat4c a = m.cast<cd>() - w * Mat4c::Identity();
  Eigen::JacobiSVD<Mat4c> svd(a);
  int k = 0;
  for (int i = 0; i < 4; ++i)
    if (svd.singularValues()[i] < rank_tol) ++k;
  return k;
}

inline SpectrumVerdict classify_spectrum(const Mat4& m, double circle_tol = 1e-6) {
  const double rank_tol = std::sqrt(circle_tol);
  auto ep = eigen_pairs(m);
  SpectrumVerdict v;
  v.details.resize(4);
  const Mat4c jc = j4().cast<cd>();
  for (int i = 0; i < 4; ++i) {
    auto& d = v.details[i];
    d.value = ep.values[i];
    d.modulus = std::abs(d.value);
    d.angle = std::arg(d.value);
    d.on_circle = std::fabs(d.modulus - 1.0) < circle_tol;
    if (d.on_circle) ++v.on_circle_count;
  }
  bool distinct = true;
  for (int i = 0; i < 4; ++i) {
    if (!v.details[i].on_circle) continue;
    std::vector<int> members;
    for (int j = 0; j < 4; ++j)
      if (v.details[j].on_circle && std::abs(ep.values[i] - ep.values[j]) < rank_tol) members.push_back(j);
    v.details[i].cluster_size = static_cast<int>(members.size());
    for (int j = 0; j < 4; ++j)
      if (j != i && v.details[j].on_circle && std::abs(ep.values[i] - ep.values[j]) <= circle_tol) distinct = false;
    if (members.size() > 1) {
      cd c = 0;
      for (int j : members) c += ep.values[j];
      c /= double(members.size());
      if (nullity(m, c, rank_tol) < static_cast<int>(members.size())) v.semisimple = false;
    } else if (std::fabs(std::sin(v.details[i].angle)) > circle_tol) {
      cd q = ep.vectors.col(i).adjoint() * jc * ep.vectors.col(i);
      v.details[i].krein_sign = q.imag() > 0 ? 1 : (q.imag() < 0 ? -1 : 0);
    }
  }
  if (v.on_circle_count == 0) {
    v.verdict = Verdict::Hyperbolic;
  } else if (v.on_circle_count < 4) {
    v.verdict = Verdict::Unstable;
  } else if (!v.semisimple) {
    v.verdict = Verdict::SpectrallyStableNotLinear;
  } else {
    bool away = true;
    for (const auto& d : v.details) {
      double a = std::fabs(d.angle);
      if (a <= circle_tol || std::numbers::pi - a <= circle_tol) away = false;
    }
    v.verdict = (distinct && away) ? Verdict::StronglyLinearlyStable : Verdict::LinearlyStable;
  }
  return v;
}

inline SpectrumVerdict classify_spectrum(const Monodromy& m, double circle_tol = 1e-6) {
  return classify_spectrum(m.gamma_end, circle_tol);
}

}  // namespace erestab
