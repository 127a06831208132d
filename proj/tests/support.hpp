#pragma once

#include <erestab/central_config.hpp>

#include <Eigen/Dense>
#include <random>

namespace testing_support {

using erestab::Vec2;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

// Gravitational potential of the primaries at x, and its Hessian by central differences.
inline double field_potential(const erestab::Configuration& c, const Vec2& x) {
  double u = 0;
  for (std::size_t i = 0; i < c.masses.size(); ++i) u += c.masses[i] / (x - c.primary_positions[i]).norm();
  return u;
}

inline Eigen::Matrix2d fd_hessian(const erestab::Configuration& c, const Vec2& x, double h = 1e-4) {
  Eigen::Matrix2d H;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Vec2 ei = Vec2::Zero(), ej = Vec2::Zero();
      ei[i] = h;
      ej[j] = h;
      H(i, j) = (field_potential(c, x + ei + ej) - field_potential(c, x + ei - ej) -
                 field_potential(c, x - ei + ej) + field_potential(c, x - ei - ej)) /
                (4 * h * h);
    }
  return H;
}

// Acceleration on body k from the others; for a central configuration it equals -mu a_k.
inline Vec2 acceleration(const std::vector<double>& m, const std::vector<Vec2>& a, std::size_t k) {
  Vec2 acc = Vec2::Zero();
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (j == k) continue;
    Vec2 d = a[j] - a[k];
    acc += m[j] * d / std::pow(d.norm(), 3);
  }
  return acc;
}

}  // namespace testing_support
