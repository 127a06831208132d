#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <utility>

#include "central_config.hpp"
#include "errors.hpp"

namespace erestab {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

inline Mat2 j2() {
  Mat2 j;
  j << 0, -1, 1, 0;
  return j;
}

inline Mat4 j4() {
  Mat4 j = Mat4::Zero();
  j.block<2, 2>(0, 2) = -Mat2::Identity();
  j.block<2, 2>(2, 0) = Mat2::Identity();
  return j;
}

struct StabilityParams {
  double lambda3 = 1.5, lambda4 = 1.5;
  double alpha = 0.5, beta = 0.0;
  std::optional<double> beta_hls;  // only on the trace-3 family
  double e = 0.0;

  static StabilityParams from_eigenvalues(double la, double lb, double e) {
    if (!(e >= 0.0 && e < 1.0)) throw DomainError("eccentricity must lie in [0, 1)");
    if (!std::isfinite(la) || !std::isfinite(lb)) throw DomainError("eigenvalues must be finite");
    StabilityParams p;
    p.lambda3 = std::max(la, lb);
    p.lambda4 = std::min(la, lb);
    p.e = e;
    p.alpha = 0.5 * (p.lambda3 + p.lambda4) - 1.0;
    p.beta = 0.5 * (p.lambda3 - p.lambda4);
    if (std::fabs(p.lambda3 + p.lambda4 - 3.0) <= 1e-8) {
      double d = p.lambda3 - p.lambda4;
      p.beta_hls = 9.0 - d * d;
    }
    return p;
  }

  // Trace-3 family parameterised by beta in [0, 9].
  static StabilityParams from_hls(double beta_hls, double e) {
    if (!(beta_hls >= 0.0 && beta_hls <= 9.0)) throw DomainError("beta must lie in [0, 9]");
    double s = std::sqrt(9.0 - beta_hls);
    auto p = from_eigenvalues(0.5 * (3 + s), 0.5 * (3 - s), e);
    p.beta_hls = beta_hls;
    return p;
  }

  static StabilityParams from_alpha_beta(double alpha, double beta, double e) {
    if (!(beta >= 0.0)) throw DomainError("beta must be nonnegative");
    return from_eigenvalues(1 + alpha + beta, 1 + alpha - beta, e);
  }

  Mat2 K() const { return Eigen::Vector2d(lambda3, lambda4).asDiagonal(); }
};

struct DMatrix {
  Mat2 entries = Mat2::Identity();
  double beta20 = 0.0;
  std::complex<double> beta220 = 0.0;

  double trace() const { return entries.trace(); }
  double det() const { return entries.determinant(); }
};

inline DMatrix compute_D(const Configuration& c) {
  if (!c.massless_position) throw DomainError("compute_D needs the massless position");
  if (!(c.mu > 0.0)) throw DomainError("compute_D needs mu > 0");
  const Vec2 p = *c.massless_position;
  double s3 = 0.0;
  Mat2 outer = Mat2::Zero();
  std::complex<double> b220 = 0.0;
  for (std::size_t j = 0; j < c.primary_positions.size(); ++j) {
    Vec2 d = c.primary_positions[j] - p;
    double r2 = d.squaredNorm();
    if (r2 == 0.0) throw SingularityError("massless body coincides with primary " + std::to_string(j));
    double r = std::sqrt(r2), r3 = r2 * r, r5 = r3 * r2;
    s3 += c.masses[j] / r3;
    outer += c.masses[j] * d * d.transpose() / r5;
    std::complex<double> z(d.x(), d.y());
    b220 += c.masses[j] * z * z / r5;
  }
  DMatrix D;
  D.entries = Mat2::Identity() * (1.0 - s3 / c.mu) + (3.0 / c.mu) * outer;
  D.entries(0, 1) = D.entries(1, 0) = 0.5 * (D.entries(0, 1) + D.entries(1, 0));
  D.beta20 = s3 / c.mu - 1.0;
  D.beta220 = 1.5 / c.mu * b220;
  return D;
}

// Closed-form ordered eigenvalues of a symmetric 2x2 matrix.
inline std::pair<double, double> symmetric_eigenvalues(const Mat2& m) {
  double h = 0.5 * (m(0, 0) + m(1, 1));
  double g = std::hypot(0.5 * (m(0, 0) - m(1, 1)), m(0, 1));
  return {h + g, h - g};
}

inline StabilityParams spectral_params(const DMatrix& d, double e) {
  auto [a, b] = symmetric_eigenvalues(d.entries);
  return StabilityParams::from_eigenvalues(a, b, e);
}

inline double r_e(double e, double theta) { return 1.0 / (1.0 + e * std::cos(theta)); }

// Coefficient matrix of the linearised system in the rotated diagonal frame.
inline Mat4 b_matrix(const StabilityParams& p, double theta) {
  Mat4 b = Mat4::Identity();
  b.block<2, 2>(0, 2) = -j2();
  b.block<2, 2>(2, 0) = j2();
  b.block<2, 2>(2, 2) = Mat2::Identity() - r_e(p.e, theta) * p.K();
  return b;
}

// Same system with the full D matrix in place of its diagonalisation.
inline Mat4 b_matrix_dform(const Mat2& d, double e, double theta) {
  Mat4 b = Mat4::Identity();
  b.block<2, 2>(0, 2) = -j2();
  b.block<2, 2>(2, 0) = j2();
  b.block<2, 2>(2, 2) = Mat2::Identity() - r_e(e, theta) * d;
  return b;
}

// Symmetric four-body chain m1 = m3 = (1 - m2)/2 with the massless body on the axis.
struct SymmetricChain {
  double m2 = 0, y = 0, z = 0;
  double lambda3 = 0, lambda4 = 0, beta_hls = 0;
};

inline SymmetricChain symmetric_chain(double m2) {
  SymmetricChain c;
  c.m2 = m2;
  c.y = solve_symmetric_y(m2);
  c.z = 8 * (1 - m2) / ((1 + 7 * m2) * std::pow(c.y * c.y + 1, 2.5));
  c.lambda3 = std::max(3 * (1 - c.z), 3 * c.z);
  c.lambda4 = std::min(3 * (1 - c.z), 3 * c.z);
  c.beta_hls = 36 * c.z * (1 - c.z);
  return c;
}

}  // namespace erestab
