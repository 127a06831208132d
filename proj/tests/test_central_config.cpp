#include <gtest/gtest.h>

#include <erestab/central_config.hpp>
#include <erestab/linearization.hpp>

#include "support.hpp"

using namespace erestab;
using testing_support::uniform;

namespace {

// Force balance for positions 0, x, 1 + x, written without the quintic.
double middle_balance(double m1, double m2, double m3, double x) {
  std::vector<double> m{m1, m2, m3};
  std::vector<Vec2> a{Vec2(0, 0), Vec2(x, 0), Vec2(1 + x, 0)};
  double com = (m2 * x + m3 * (1 + x)) / (m1 + m2 + m3);
  // acc_k = -mu (a_k - com): compare the ratio acc/(a - com) on bodies 1 and 3
  double r1 = testing_support::acceleration(m, a, 0).x() / (0 - com);
  double r3 = testing_support::acceleration(m, a, 2).x() / (1 + x - com);
  return r1 - r3;
}

double oracle_root(double m1, double m2, double m3) {
  auto f = [&](double x) { return middle_balance(m1, m2, m3, x); };
  double lo = 0, hi = 0;
  double prev = 1e-6, fp = f(prev);
  for (double x = 1e-6 * 1.01; x < 100; x *= 1.01) {
    double fx = f(x);
    if ((fx < 0) != (fp < 0)) {
      lo = prev;
      hi = x;
      break;
    }
    prev = x;
    fp = fx;
  }
  EXPECT_GT(hi, 0.0);
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

int sign_changes(double m1, double m2, double m3) {
  int n = 0;
  double prev = euler_quintic(m1, m2, m3, 1e-9);
  for (int i = 1; i <= 200000; ++i) {
    double x = 100.0 * i / 200000;
    double v = euler_quintic(m1, m2, m3, x);
    if ((v < 0) != (prev < 0)) ++n;
    prev = v;
  }
  return n;
}

void expect_central(const Configuration& c, double tol) {
  for (std::size_t k = 0; k < c.masses.size(); ++k) {
    Vec2 acc = testing_support::acceleration(c.masses, c.primary_positions, k);
    EXPECT_LT((acc + c.mu * c.primary_positions[k]).norm(), tol) << "body " << k;
  }
}

}  // namespace

TEST(EulerQuintic, SymmetricMassesGiveUnitRatio) {
  EXPECT_NEAR(solve_euler_quintic(0.2, 0.6, 0.2), 1.0, 1e-14);
  EXPECT_NEAR(solve_euler_quintic(1.0 / 3, 1.0 / 3, 1.0 / 3), 1.0, 1e-14);
}

TEST(EulerQuintic, AsymmetricRootIsUniqueAndSmall) {
  double x = solve_euler_quintic(0.5, 0.3, 0.2);
  EXPECT_LT(std::fabs(euler_quintic(0.5, 0.3, 0.2, x)), 1e-13);
  EXPECT_EQ(sign_changes(0.5, 0.3, 0.2), 1);
}

TEST(EulerQuintic, MatchesForceBalanceOracle) {
  for (int i = 0; i < 25; ++i) {
    double m1 = uniform(0.05, 1), m2 = uniform(0.05, 1), m3 = uniform(0.05, 1);
    double s = m1 + m2 + m3;
    m1 /= s, m2 /= s, m3 /= s;
    EXPECT_NEAR(solve_euler_quintic(m1, m2, m3), oracle_root(m1, m2, m3), 1e-10);
  }
}

TEST(EulerQuintic, RejectsNonPositiveMasses) {
  EXPECT_THROW(solve_euler_quintic(0.0, 0.5, 0.5), DomainError);
  EXPECT_THROW(MassSystem::collinear({0.5, -0.1, 0.6}), DomainError);
}

TEST(CollinearThree, SymmetricPositionsInClosedForm) {
  for (double m2 : {0.1, 0.5, 0.9}) {
    double m1 = 0.5 * (1 - m2);
    auto c = collinear_three_primaries(MassSystem::collinear({m1, m2, m1}));
    double a = 1 / std::sqrt(1 - m2);
    EXPECT_NEAR(c.primary_positions[0].x(), -a, 1e-12);
    EXPECT_NEAR(c.primary_positions[1].norm(), 0.0, 1e-12);
    EXPECT_NEAR(c.primary_positions[2].x(), a, 1e-12);
  }
}

TEST(CollinearThree, NormalisationAndCentralResidual) {
  auto c = collinear_three_primaries(MassSystem::collinear({0.5, 0.3, 0.2}));
  EXPECT_LT(c.cc_residual, 1e-10);
  EXPECT_LT(c.inertia_residual, 1e-14);
  EXPECT_LT(c.com_residual, 1e-14);
  expect_central(c, 1e-10);
  double inertia = 0;
  for (std::size_t i = 0; i < 3; ++i) inertia += c.masses[i] * c.primary_positions[i].squaredNorm();
  EXPECT_NEAR(inertia, 1.0, 1e-14);
}

TEST(Moulton, TwoBodiesClosedForm) {
  auto c = moulton_collinear(MassSystem::collinear({0.3, 0.7}));
  // m1 m2 d^2 = 1 fixes the separation
  double d = (c.primary_positions[1] - c.primary_positions[0]).norm();
  EXPECT_NEAR(d, 1 / std::sqrt(0.21), 1e-12);
  EXPECT_NEAR(c.mu, 0.21 / d, 1e-12);
}

TEST(Moulton, AgreesWithQuinticForThreeBodies) {
  for (int i = 0; i < 50; ++i) {
    auto sys = MassSystem::collinear({uniform(0.05, 1), uniform(0.05, 1), uniform(0.05, 1)});
    auto a = collinear_three_primaries(sys);
    auto b = moulton_collinear(sys);
    for (int k = 0; k < 3; ++k) EXPECT_LT((a.primary_positions[k] - b.primary_positions[k]).norm(), 1e-10);
  }
}

TEST(Moulton, EqualFourBodiesAreReflectionSymmetric) {
  auto c = moulton_collinear(MassSystem::collinear({1, 1, 1, 1}));
  EXPECT_LT(c.cc_residual, 1e-10);
  EXPECT_NEAR(c.primary_positions[0].x(), -c.primary_positions[3].x(), 1e-12);
  EXPECT_NEAR(c.primary_positions[1].x(), -c.primary_positions[2].x(), 1e-12);
  expect_central(c, 1e-10);
}

TEST(Moulton, OrderingPermutesSlots) {
  auto sys = MassSystem::collinear({0.1, 0.2, 0.3, 0.4});
  const std::vector<int> order{3, 1, 0, 2};
  auto c = moulton_collinear(sys, order);
  EXPECT_EQ(c.masses, sys.masses);
  EXPECT_LT(c.cc_residual, 1e-10);
  for (std::size_t k = 1; k < 4; ++k)
    EXPECT_LT(c.primary_positions[order[k - 1]].x(), c.primary_positions[order[k]].x());
  EXPECT_THROW(moulton_collinear(sys, {0, 0, 1, 2}), DomainError);
}

TEST(Moulton, RandomFiveBodyResiduals) {
  for (int i = 0; i < 20; ++i) {
    std::vector<double> m;
    for (int k = 0; k < 5; ++k) m.push_back(uniform(0.05, 1));
    auto c = moulton_collinear(MassSystem::collinear(m));
    expect_central(c, 1e-9);
  }
}

TEST(RestrictedPosition, SymmetricChainPosition) {
  for (double m2 : {0.0001, 0.3, 0.6, 0.95}) {
    double m1 = 0.5 * (1 - m2);
    auto c = restricted_position(collinear_three_primaries(MassSystem::collinear({m1, m2, m1})));
    double y = solve_symmetric_y(m2);
    EXPECT_NEAR(c.massless_position->x(), 0.0, 1e-10);
    EXPECT_NEAR(c.massless_position->y(), y / std::sqrt(1 - m2), 1e-10);
  }
}

TEST(RestrictedPosition, RandomTriplesSatisfyEquilibrium) {
  for (int i = 0; i < 100; ++i) {
    auto c = restricted_position_multistart(
        collinear_three_primaries(MassSystem::collinear({uniform(0.01, 1), uniform(0.01, 1), uniform(0.01, 1)})));
    Vec2 p = *c.massless_position;
    Vec2 acc = Vec2::Zero();
    for (std::size_t j = 0; j < 3; ++j) {
      Vec2 d = c.primary_positions[j] - p;
      acc += c.masses[j] * d / std::pow(d.norm(), 3);
    }
    EXPECT_LT((acc + c.mu * p).norm(), 1e-10);
    EXPECT_GT(p.y(), 1e-3);
  }
}

TEST(RestrictedPosition, SingleStartCanCollapseOntoTheLine) {
  auto c = collinear_three_primaries(MassSystem::collinear({0.63847, 0.322443, 0.0390877}));
  EXPECT_THROW(restricted_position(c), DegenerateSolutionError);
  auto r = restricted_position_multistart(c);
  EXPECT_GT(std::fabs(r.massless_position->y()), 1e-3);
}

TEST(RestrictedPosition, OnLineGuessIsRejected) {
  auto c = collinear_three_primaries(MassSystem::collinear({1, 1, 1}));
  EXPECT_THROW(restricted_position(c, Vec2(0.3, 0.0)), DomainError);
}

TEST(SymmetricY, Anchors) {
  EXPECT_NEAR(solve_symmetric_y(0.0), std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(solve_symmetric_y(1 - 1e-9), 1.0, 1e-3);
  EXPECT_GT(solve_symmetric_y(0.3), solve_symmetric_y(0.6));
  EXPECT_THROW(solve_symmetric_y(1.0), DomainError);
}

TEST(SymmetricY, DecreasingOnFineGrid) {
  double prev = solve_symmetric_y(0.0);
  for (int i = 1; i < 1000; ++i) {
    double y = solve_symmetric_y(i * 1e-3);
    EXPECT_LT(y, prev) << "m2=" << i * 1e-3;
    prev = y;
  }
}
