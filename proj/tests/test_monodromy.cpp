#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <erestab/monodromy.hpp>
#include <erestab/ode.hpp>

#include "support.hpp"

using namespace erestab;
using testing_support::uniform;

namespace {

Mat4 oracle_monodromy_circular(const StabilityParams& p) {
  Mat4 a = 2 * std::numbers::pi * j4() * b_matrix(p, 0.0);
  return a.exp();
}

// Largest distance from an eigenvalue of `a` to its nearest partner in `b`, relative to max(1, |z|).
double spectrum_distance(const std::array<cd, 4>& a, const std::array<cd, 4>& b) {
  double worst = 0;
  for (auto z : a) {
    double best = 1e300;
    for (auto w : b) best = std::min(best, std::abs(z - w));
    worst = std::max(worst, best / std::max(1.0, std::abs(z)));
  }
  return worst;
}

}  // namespace

TEST(Dop853, HarmonicOscillatorAccuracy) {
  using S = Dop853<double, 2>;
  S::Options opt;
  opt.rtol = 0;
  opt.atol = 1e-12;
  S::Stats st;
  double h = 0;
  S::State y(1.0, 0.0);
  auto f = [](double, const S::State& x) { return S::State(x[1], -x[0]); };
  y = S::integrate(f, 0.0, 10.0, y, opt, st, h);
  EXPECT_NEAR(y[0], std::cos(10.0), 1e-10);
  EXPECT_NEAR(y[1], -std::sin(10.0), 1e-10);
  EXPECT_GT(st.accepted, 0);
}

TEST(Dop853, ErrorShrinksWithTolerance) {
  using S = Dop853<double, 1>;
  auto f = [](double t, const S::State& x) { return S::State(std::cos(t) * x[0]); };
  double prev = 1e9;
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    S::Options opt;
    opt.rtol = tol;
    opt.atol = tol;
    S::Stats st;
    double h = 0;
    S::State y(1.0);
    y = S::integrate(f, 0.0, 5.0, y, opt, st, h);
    double err = std::fabs(y[0] - std::exp(std::sin(5.0)));
    EXPECT_LT(err, prev);
    EXPECT_LT(err, 100 * tol);
    prev = err;
  }
}

TEST(Dop853, BackwardIntegration) {
  using S = Dop853<double, 1>;
  S::Options opt;
  S::Stats st;
  double h = 0;
  S::State y(std::exp(2.0));
  y = S::integrate([](double, const S::State& x) { return x; }, 2.0, 0.0, y, opt, st, h);
  EXPECT_NEAR(y[0], 1.0, 1e-10);
}

TEST(MatrixExponential, Identities) {
  EXPECT_LT((matrix_exponential(Mat4::Zero()) - Mat4::Identity()).norm(), 1e-16);
  Mat4 a = Mat4::Zero();
  a.block<2, 2>(0, 0) = 2 * std::numbers::pi * j2();
  Mat4 e = matrix_exponential(a);
  EXPECT_LT((e.block<2, 2>(0, 0) - Mat2::Identity()).norm(), 1e-12);
  for (int i = 0; i < 20; ++i) {
    Mat4 r = Mat4::Random() * 3;
    Mat4 prod = matrix_exponential(r) * matrix_exponential(-r);
    EXPECT_LT((prod - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_LT((matrix_exponential(r) - r.exp()).norm() / r.exp().norm(), 1e-12);
  }
}

TEST(Monodromy, CircularCaseMatchesExponential) {
  for (int i = 0; i < 15; ++i) {
    auto p = StabilityParams::from_alpha_beta(uniform(0, 3), uniform(0, 3), 0.0);
    auto m = integrate_fundamental(p);
    Mat4 ex = oracle_monodromy_circular(p);
    EXPECT_LT((m.gamma_end - ex).norm() / std::max(1.0, ex.norm()), 1e-9);
    EXPECT_LT(spectrum_distance(m.eigenvalues, eigenvalues(ex)), 1e-8);
  }
}

TEST(Monodromy, SymplecticAndUnitDeterminant) {
  for (double e : {0.0, 0.3, 0.7, 0.9})
    for (double b : {0.5, 3.0, 8.0}) {
      auto m = integrate_fundamental(StabilityParams::from_hls(b, e));
      EXPECT_NEAR(m.gamma_end.determinant(), 1.0, 1e-9 * std::max(1.0, std::pow(m.gamma_end.norm(), 4)));
      EXPECT_LT(m.symplectic_residual, 1e-8);
    }
}

TEST(Monodromy, EqualEigenvaluesAtCircularOrbitAreHyperbolic) {
  // lambda3 = lambda4 = 3/2 is the equal-mass Lagrangian point beta = 9, off the circle by Routh
  auto p = StabilityParams::from_eigenvalues(1.5, 1.5, 0.0);
  auto m = integrate_fundamental(p);
  EXPECT_LT(spectrum_distance(m.eigenvalues, eigenvalues(oracle_monodromy_circular(p))), 1e-8);
  EXPECT_EQ(classify_spectrum(m).verdict, Verdict::Hyperbolic);
  double top = 0;
  for (auto z : m.eigenvalues) top = std::max(top, std::abs(z));
  EXPECT_NEAR(top, std::exp(2 * std::numbers::pi / std::sqrt(2.0)), 1e-6);
}

TEST(Monodromy, DiagonalAndFullDFormsAreConjugate) {
  for (int i = 0; i < 20; ++i) {
    double l3 = uniform(1.5, 3), l4 = uniform(0, 1.5), e = uniform(0, 0.7), th = uniform(0, std::numbers::pi);
    Mat2 q = rotation_block(th);
    Mat2 d = q * Eigen::Vector2d(l3, l4).asDiagonal() * q.transpose();
    auto a = integrate_fundamental(StabilityParams::from_eigenvalues(l3, l4, e));
    auto b = integrate_fundamental_dform(d, e);
    Mat4 r = Mat4::Zero();
    r.block<2, 2>(0, 0) = q;
    r.block<2, 2>(2, 2) = q;
    Mat4 conj = r * a.gamma_end * r.transpose();
    EXPECT_LT((conj - b.gamma_end).norm() / std::max(1.0, b.gamma_end.norm()), 1e-8);
    EXPECT_LT(spectrum_distance(a.eigenvalues, b.eigenvalues), 1e-7);
  }
}

TEST(Monodromy, SelfConvergence) {
  auto p = StabilityParams::from_hls(4.0, 0.9);
  auto coarse = integrate_fundamental(p, 1e-10), mid = integrate_fundamental(p, 1e-12),
       fine = integrate_fundamental(p, 1e-13);
  double scale = fine.gamma_end.norm();
  double d1 = (coarse.gamma_end - fine.gamma_end).norm(), d2 = (mid.gamma_end - fine.gamma_end).norm();
  EXPECT_LT(d2, 0.1 * d1);
  EXPECT_LT(d2 / scale, 1e-12);
  EXPECT_GT(fine.step_metadata.accepted, coarse.step_metadata.accepted);
}

TEST(Monodromy, InputValidation) {
  EXPECT_THROW(integrate_fundamental(StabilityParams::from_hls(1.0, 0.995)), DomainError);
  EXPECT_THROW(integrate_fundamental(StabilityParams::from_hls(1.0, 0.1), 1e-14), DomainError);
}

TEST(Classify, NormalForms) {
  EXPECT_EQ(classify_spectrum(direct_sum(rotation_block(0.3), rotation_block(1.1))).verdict,
            Verdict::StronglyLinearlyStable);
  EXPECT_EQ(classify_spectrum(direct_sum(hyperbolic_block(2.0), rotation_block(0.5))).verdict, Verdict::Unstable);
  EXPECT_EQ(classify_spectrum(direct_sum(jordan_block(1, 1), rotation_block(0.5))).verdict,
            Verdict::SpectrallyStableNotLinear);
  EXPECT_EQ(classify_spectrum(direct_sum(hyperbolic_block(2.0), hyperbolic_block(-3.0))).verdict,
            Verdict::Hyperbolic);
  // identity is semisimple but sits at 1
  EXPECT_EQ(classify_spectrum(Mat4::Identity()).verdict, Verdict::LinearlyStable);
  EXPECT_EQ(classify_spectrum(direct_sum(rotation_block(0.7), rotation_block(0.7))).verdict,
            Verdict::LinearlyStable);
}

TEST(Classify, InvariantUnderSymplecticConjugation) {
  Mat4 m = direct_sum(rotation_block(0.4), rotation_block(2.0));
  // a symplectic shear
  Mat4 s = Mat4::Identity();
  s(2, 0) = 0.7;
  s(3, 1) = -0.2;
  s(2, 1) = s(3, 0) = 0.3;
  ASSERT_LT(symplectic_residual(s), 1e-15);
  auto v = classify_spectrum(s * m * s.inverse());
  EXPECT_EQ(v.verdict, Verdict::StronglyLinearlyStable);
  int plus = 0;
  for (const auto& d : v.details) plus += d.krein_sign;
  EXPECT_EQ(plus, 0);  // conjugate pairs carry opposite signs
}

TEST(Classify, CircularVerdicts) {
  EXPECT_EQ(classify_spectrum(integrate_fundamental(StabilityParams::from_hls(0.5, 0))).verdict,
            Verdict::StronglyLinearlyStable);
  EXPECT_TRUE(is_spectrally_stable(classify_spectrum(integrate_fundamental(StabilityParams::from_hls(0.9, 0))).verdict));
  EXPECT_FALSE(is_spectrally_stable(classify_spectrum(integrate_fundamental(StabilityParams::from_hls(1.1, 0))).verdict));
  EXPECT_FALSE(is_spectrally_stable(classify_spectrum(integrate_fundamental(StabilityParams::from_hls(2.0, 0))).verdict));
}
