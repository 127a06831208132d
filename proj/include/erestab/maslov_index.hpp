#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linearization.hpp"
#include "monodromy.hpp"

namespace erestab {

using MatXc = Eigen::MatrixXcd;

// omega = exp(2 pi i rho), rho in [0, 1).
struct Twist {
  double rho = 0.0;

  static Twist periodic() { return {0.0}; }
  static Twist antiperiodic() { return {0.5}; }
  static Twist from_rho(double r) {
    if (!std::isfinite(r)) throw DomainError("twist must be finite");
    r -= std::floor(r);
    if (r >= 1.0) r = 0.0;
    return {r};
  }
  static Twist from_omega(cd w) {
    if (std::fabs(std::abs(w) - 1.0) > 1e-12) throw DomainError("omega must lie on the unit circle");
    return from_rho(std::arg(w) / (2 * std::numbers::pi));
  }
  cd omega() const {
    if (rho == 0.0) return 1.0;
    if (rho == 0.5) return -1.0;
    return std::polar(1.0, 2 * std::numbers::pi * rho);
  }
};

// Fourier coefficient c_k of 1/(1 + e cos t).
inline double re_fourier(double e, int k) {
  double s = std::sqrt(1 - e * e);
  if (e == 0.0) return k == 0 ? 1.0 : 0.0;
  double b = -e / (1 + s);
  return std::pow(b, std::abs(k)) / s;
}

inline void check_operator_inputs(const StabilityParams& p, int K) {
  if (!(p.e >= 0.0 && p.e <= 0.99)) throw DomainError("eccentricity must lie in [0, 0.99]");
  if (K < 1) throw DomainError("number of Fourier modes must be positive");
}

namespace detail {

// Galerkin matrix on the modes exp(i (j + rho) t), kmin <= j <= kmax.
inline MatXc assemble_on_modes(const StabilityParams& p, double rho, int kmin, int kmax) {
  const int nb = kmax - kmin + 1, n = 2 * nb;
  const int span = nb + 2;
  std::vector<double> c(2 * span + 1);
  for (int m = -span; m <= span; ++m) c[span + m] = re_fourier(p.e, m);
  const cd I(0, 1);
  // S(t) = exp(2it) P + exp(-2it) conj(P)
  const cd p00 = 0.5, p01 = -0.5 * I, p11 = -0.5;
  MatXc a = MatXc::Zero(n, n);
  const double one_alpha = 1 + p.alpha;
  for (int k = kmin; k <= kmax; ++k) {
    for (int l = kmin; l <= kmax; ++l) {
      const int d = k - l;
      const int r = 2 * (k - kmin), q = 2 * (l - kmin);
      const double cm = c[span + d], cp2 = c[span + d - 2], cm2 = c[span + d + 2];
      cd b00 = one_alpha * cm + p.beta * (cp2 * p00 + cm2 * std::conj(p00));
      cd b01 = p.beta * (cp2 * p01 + cm2 * std::conj(p01));
      cd b11 = one_alpha * cm + p.beta * (cp2 * p11 + cm2 * std::conj(p11));
      if (d == 0) {
        double s = k + rho;
        b00 += s * s - 1;
        b11 += s * s - 1;
      }
      a(r, q) = b00;
      a(r, q + 1) = b01;
      a(r + 1, q) = b01;
      a(r + 1, q + 1) = b11;
    }
  }
  return a;
}

// For omega = +-1 the operator is real: rewrite it in the cos/sin basis of a
// conjugation-symmetric mode set (|j + rho| <= K + rho).
inline Eigen::MatrixXd real_operator(const StabilityParams& p, double rho, int K) {
  const int kmin = rho == 0.0 ? -K : -K - 1, kmax = K;
  MatXc a = assemble_on_modes(p, rho, kmin, kmax);
  const int n = static_cast<int>(a.rows());
  struct Col { int i0, i1; cd c0, c1; };
  std::vector<Col> cols;
  const double h = std::sqrt(0.5);
  const cd mi(0, -1);
  for (int k = kmin; k <= kmax; ++k) {
    int mate = rho == 0.0 ? -k : -k - 1;
    if (mate < k) continue;
    for (int comp = 0; comp < 2; ++comp) {
      int i = 2 * (k - kmin) + comp, j = 2 * (mate - kmin) + comp;
      if (mate == k) {
        cols.push_back({i, -1, 1.0, 0.0});
      } else {
        cols.push_back({i, j, h, h});
        cols.push_back({i, j, mi * h, -mi * h});
      }
    }
  }
  MatXc t(n, n);
  for (int c = 0; c < n; ++c) {
    const auto& u = cols[c];
    t.col(c) = u.c0 * a.col(u.i0);
    if (u.i1 >= 0) t.col(c) += u.c1 * a.col(u.i1);
  }
  Eigen::MatrixXd r(n, n);
  for (int c = 0; c < n; ++c) {
    const auto& u = cols[c];
    Eigen::RowVectorXcd row = std::conj(u.c0) * t.row(u.i0);
    if (u.i1 >= 0) row += std::conj(u.c1) * t.row(u.i1);
    r.row(c) = row.real();
  }
  return 0.5 * (r + r.transpose());
}

}  // namespace detail

// Galerkin matrix of -d^2 - I + r_e [(1 + alpha) I + beta S(t)] on modes exp(i (k + rho) t), |k| <= K.
inline MatXc assemble_operator(const StabilityParams& p, Twist tw, int K) {
  check_operator_inputs(p, K);
  return detail::assemble_on_modes(p, tw.rho, -K, K);
}

struct IndexOptions {
  std::vector<int> levels{64, 128, 256, 512, 1024};
};

struct IndexResult {
  cd omega = 1.0;
  double rho = 0.0;
  int phi = 0;
  int nu = 0;
  int num_modes = 0;
  double min_eigenvalue = 0;
  double kernel_gap = 0;  // smallest |eigenvalue| outside the kernel band
  double kernel_tol = 0;
  bool stable_under_refinement = false;
};

// Relative scale of the potential part; the kinetic diagonal does not enter.
inline double kernel_tolerance(const StabilityParams& p) {
  return 1e-7 * (1 + (std::fabs(1 + p.alpha) + std::fabs(p.beta)) / (1 - p.e));
}

inline IndexResult count_eigenvalues(const StabilityParams& p, Twist tw, int K) {
  check_operator_inputs(p, K);
  Eigen::VectorXd ev;
  if (tw.rho == 0.0 || tw.rho == 0.5) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::real_operator(p, tw.rho, K), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("symmetric eigen-solve failed");
    ev = es.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<MatXc> es(assemble_operator(p, tw, K), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigen-solve failed");
    ev = es.eigenvalues();
  }
  IndexResult r;
  r.omega = tw.omega();
  r.rho = tw.rho;
  r.num_modes = K;
  r.kernel_tol = kernel_tolerance(p);
  r.min_eigenvalue = ev[0];
  r.kernel_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < -r.kernel_tol) {
      ++r.phi;
      r.kernel_gap = std::min(r.kernel_gap, -ev[i]);
    } else if (ev[i] <= r.kernel_tol) {
      ++r.nu;
    } else {
      r.kernel_gap = std::min(r.kernel_gap, ev[i]);
    }
  }
  return r;
}

inline IndexResult morse_index(const StabilityParams& p, Twist tw, const IndexOptions& opt = {}) {
  check_operator_inputs(p, 8);
  if (opt.levels.size() < 2) throw DomainError("index refinement needs at least two levels");
  IndexResult prev = count_eigenvalues(p, tw, opt.levels[0]);
  for (std::size_t i = 1; i < opt.levels.size(); ++i) {
    IndexResult cur = count_eigenvalues(p, tw, opt.levels[i]);
    if (cur.phi == prev.phi && cur.nu == prev.nu) {
      cur.stable_under_refinement = true;
      return cur;
    }
    prev = cur;
  }
  throw ConvergenceError("index did not stabilise up to K=" + std::to_string(opt.levels.back()) +
                         " (last phi=" + std::to_string(prev.phi) + ", nu=" + std::to_string(prev.nu) + ")");
}

inline IndexResult morse_index(const StabilityParams& p, cd omega, const IndexOptions& opt = {}) {
  return morse_index(p, Twist::from_omega(omega), opt);
}

inline bool positivity_check(const StabilityParams& p, int omega_samples = 16, const IndexOptions& opt = {}) {
  if (omega_samples < 16) throw DomainError("positivity check needs at least 16 omega samples");
  for (int j = 0; j < omega_samples; ++j) {
    auto r = morse_index(p, Twist::from_rho(double(j) / omega_samples), opt);
    if (r.phi > 0 || r.nu > 0 || !(r.min_eigenvalue > r.kernel_tol)) return false;
  }
  return true;
}

struct KernelCheck {
  cd omega;
  int nu_operator = 0;
  int nu_monodromy = 0;
};

struct ConsistencyReport {
  std::vector<KernelCheck> kernels;
  bool kernels_agree = true;
  int phi_1 = 0, phi_m1 = 0;
  int krein_sum = 0;           // sum over simple circle eigenvalues in the upper half plane
  bool krein_applicable = false;
  bool jump_agrees = true;
  bool consistent = true;
};

inline ConsistencyReport index_monodromy_consistency(const StabilityParams& p, int circle_samples = 6,
                                                     double tol = 1e-12, double circle_tol = 1e-6) {
  ConsistencyReport rep;
  Monodromy m = integrate_fundamental(p, tol);
  const double rank_tol = std::sqrt(circle_tol);
  std::vector<Twist> twists{Twist::periodic(), Twist::antiperiodic()};
  for (int j = 0; j < circle_samples; ++j) twists.push_back(Twist::from_rho((j + 0.5) / (circle_samples + 1)));
  for (const auto& tw : twists) {
    auto r = morse_index(p, tw);
    KernelCheck k{tw.omega(), r.nu, nullity(m.gamma_end, tw.omega(), rank_tol)};
    if (tw.rho == 0.0) rep.phi_1 = r.phi;
    if (tw.rho == 0.5) rep.phi_m1 = r.phi;
    if (k.nu_operator != k.nu_monodromy) rep.kernels_agree = false;
    rep.kernels.push_back(k);
  }
  auto v = classify_spectrum(m.gamma_end, circle_tol);
  rep.krein_applicable = true;
  for (const auto& d : v.details) {
    if (!d.on_circle) continue;
    if (d.cluster_size > 1 || d.krein_sign == 0) {
      rep.krein_applicable = false;
      continue;
    }
    if (d.value.imag() > 0) rep.krein_sum -= d.krein_sign;
  }
  if (rep.krein_applicable) rep.jump_agrees = (rep.phi_m1 - rep.phi_1 == rep.krein_sum);
  rep.consistent = rep.kernels_agree && rep.jump_agrees;
  return rep;
}

}  // namespace erestab
