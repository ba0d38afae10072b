#include "acgn/kalman.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using acgn::ArmaNoiseModel;
using acgn::IVec;
using acgn::Mat;
using acgn::Vec;

namespace {

ArmaNoiseModel scalar_model(std::vector<double> f, std::vector<double> g, double var) {
  ArmaNoiseModel m;
  m.Vhat = Mat::Constant(1, 1, var);
  for (double fi : f) m.F.push_back(Mat::Constant(1, 1, fi));
  for (double gj : g) m.G.push_back(Mat::Constant(1, 1, gj));
  return m;
}

ArmaNoiseModel white_model(const Mat& vhat) {
  ArmaNoiseModel m;
  m.Vhat = vhat;
  return m;
}

Mat random_orthogonal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = d(rng);
  return Eigen::HouseholderQR<Mat>(a).householderQ();
}

}  // namespace

TEST(RiccatiStep, ScalarArithmetic) {
  // a=2, c=1, V=1: P' = 4P - 4P^2/(P+1).
  const Mat A = Mat::Constant(1, 1, 2.0);
  const Mat C = Mat::Identity(1, 1);
  const Mat V = Mat::Identity(1, 1);
  Mat P = Mat::Constant(1, 1, 1.0);
  P = acgn::riccati_step(P, A, C, V);
  EXPECT_DOUBLE_EQ(P(0, 0), 2.0);
  P = acgn::riccati_step(P, A, C, V);
  EXPECT_NEAR(P(0, 0), 8.0 - 16.0 / 3.0, 1e-14);
}

TEST(RiccatiStep, ZeroIsFixedPoint) {
  const Mat A = Mat::Constant(1, 1, 2.0);
  Mat P = acgn::riccati_step(Mat::Zero(1, 1), A, Mat::Identity(1, 1), Mat::Identity(1, 1));
  EXPECT_DOUBLE_EQ(P(0, 0), 0.0);
}

TEST(SolveAre, ScalarClosedForm) {
  // P = (a^2 - 1) V = 3, K = a P / (P + V) = 1.5, closed loop 1/a = 0.5.
  acgn::FilterSolution sol =
      acgn::solve_are(Mat::Constant(1, 1, 2.0), Mat::Identity(1, 1), Mat::Identity(1, 1));
  EXPECT_NEAR(sol.P(0, 0), 3.0, 1e-9);
  EXPECT_NEAR(sol.K(0, 0), 1.5, 1e-9);
  EXPECT_NEAR(sol.closed_loop_radius, 0.5, 1e-9);
  EXPECT_FALSE(sol.degenerate);
  EXPECT_LE(sol.residual, acgn::tol::are_rel);
}

TEST(SolveAre, DecoupledDiagonal) {
  Mat A = Mat::Zero(2, 2);
  A(0, 0) = 2.0;
  A(1, 1) = 3.0;
  acgn::FilterSolution sol = acgn::solve_are(A, Mat::Identity(2, 2), Mat::Identity(2, 2));
  EXPECT_NEAR(sol.P(0, 0), 3.0, 1e-8);
  EXPECT_NEAR(sol.P(1, 1), 8.0, 1e-8);
  EXPECT_NEAR(sol.P(0, 1), 0.0, 1e-8);
}

TEST(SolveAre, MonotoneFromAbove) {
  // Scalar iterates decrease monotonically from P0 above the fixed point.
  const Mat A = Mat::Constant(1, 1, 2.0);
  const Mat C = Mat::Identity(1, 1);
  const Mat V = Mat::Identity(1, 1);
  Mat P = Mat::Constant(1, 1, 10.0);
  double prev = P(0, 0);
  for (int k = 0; k < 20; ++k) {
    P = acgn::riccati_step(P, A, C, V);
    EXPECT_LT(P(0, 0), prev + 1e-15);
    EXPECT_GE(P(0, 0), 3.0 - 1e-12);
    prev = P(0, 0);
  }
}

TEST(SolveAre, DegenerateBoundaryFlagged) {
  // |a| = 1: P decays to 0 like 1/k; accepted but flagged.
  acgn::FilterSolution sol =
      acgn::solve_are(Mat::Constant(1, 1, 1.0), Mat::Identity(1, 1), Mat::Identity(1, 1));
  EXPECT_TRUE(sol.degenerate);
  EXPECT_LE(sol.P(0, 0), 1e-4);
  EXPECT_GE(sol.closed_loop_radius, 1.0 - 1e-4);
}

TEST(SolveAre, Rejections) {
  EXPECT_THROW(acgn::solve_are(Mat::Constant(1, 1, 2.0), Mat::Identity(1, 1),
                               Mat::Identity(1, 1), Mat::Zero(1, 1)),
               std::invalid_argument);
  EXPECT_THROW(acgn::solve_are(Mat::Constant(1, 1, 2.0), Mat::Identity(1, 1),
                               Mat::Identity(1, 1), Mat(), 3),
               acgn::numeric_error);
}

TEST(ComputeChat, WhiteIsUnchanged) {
  std::mt19937_64 rng(31);
  Mat T = random_orthogonal(rng, 3);
  Vec lambda(3);
  lambda << 2.0, -1.5, 1.2;
  Mat C(3, 3);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) C(i, j) = d(rng);
  Mat chat = acgn::compute_chat(T, lambda, C, white_model(Mat::Identity(3, 3)));
  EXPECT_LE(acgn::max_abs(chat - C), 1e-12);
}

TEST(ComputeChat, ScalarAr1Formula) {
  // Chat = (1 - f/lambda) C for scalar AR(1).
  ArmaNoiseModel m = scalar_model({0.5}, {}, 1.0);
  const Mat T = Mat::Identity(1, 1);
  Vec lambda(1);
  lambda << 2.0;
  Mat chat = acgn::compute_chat(T, lambda, Mat::Constant(1, 1, 4.0 / 3.0), m);
  EXPECT_NEAR(chat(0, 0), (1.0 - 0.25) * 4.0 / 3.0, 1e-14);  // = 1
  EXPECT_NEAR(chat(0, 0), 1.0, 1e-14);
}

TEST(ComputeChat, MatchesSeriesOracle) {
  // Chat = C - sum_i H_i C A^{-i}, truncated until the terms vanish.
  std::mt19937_64 rng(32);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    ArmaNoiseModel m;
    const int n = 2;
    auto tap = [&](double scale) {
      Mat t(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(i, j) = d(rng);
      return Mat(scale * t / t.norm());
    };
    m.F = {tap(0.4), tap(0.3)};
    m.G = {tap(0.5)};
    m.Vhat = Mat::Identity(n, n);
    Mat T = random_orthogonal(rng, n);
    Vec lambda(n);
    lambda << 1.7, -1.4;
    Mat C(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) C(i, j) = d(rng);

    Mat A = T * lambda.asDiagonal() * T.inverse();
    Mat Ainv = A.inverse();
    acgn::ImpulseResponse ir = acgn::inverse_filter_taps(m, 400);
    Mat series = C;
    Mat Apow = Mat::Identity(n, n);
    for (int i = 1; i <= ir.L(); ++i) {
      Apow = Apow * Ainv;
      series -= ir.H[i - 1] * C * Apow;
    }
    Mat chat = acgn::compute_chat(T, lambda, C, m);
    EXPECT_LE(acgn::max_abs(chat - series), 1e-8);
  }
}

TEST(DesignCForIdentity, WhiteGivesIdentity) {
  std::mt19937_64 rng(33);
  Mat T = random_orthogonal(rng, 2);
  Vec lambda(2);
  lambda << 1.3, -2.0;
  Mat C = acgn::design_c_for_identity(T, lambda, white_model(Mat::Identity(2, 2)));
  EXPECT_LE(acgn::max_abs(C - Mat::Identity(2, 2)), 1e-12);
}

TEST(DesignCForIdentity, ScalarAr1BothSigns) {
  ArmaNoiseModel m = scalar_model({0.5}, {}, 1.0);
  const Mat T = Mat::Identity(1, 1);
  Vec lp(1), lm(1);
  lp << 2.0;
  lm << -2.0;
  EXPECT_NEAR(acgn::design_c_for_identity(T, lp, m)(0, 0), 4.0 / 3.0, 1e-13);
  EXPECT_NEAR(acgn::design_c_for_identity(T, lm, m)(0, 0), 0.8, 1e-13);
}

TEST(DesignCForIdentity, RoundTripProperty) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 3;
    ArmaNoiseModel m;
    auto tap = [&](double scale) {
      Mat t(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(i, j) = d(rng);
      return Mat(scale * t / t.norm());
    };
    m.F = {tap(0.6)};
    m.G = {tap(0.4), tap(0.3)};
    m.Vhat = Mat::Identity(n, n);
    Mat T = random_orthogonal(rng, n);
    Vec lambda(n);
    lambda << 1.2, -1.6, 2.4;
    Mat C = acgn::design_c_for_identity(T, lambda, m);
    Mat chat = acgn::compute_chat(T, lambda, C, m);
    EXPECT_LE(acgn::max_abs(chat - Mat::Identity(n, n)), 1e-9);
  }
}

TEST(DesignCForIdentity, RejectsSubUnitPole) {
  Vec lambda(1);
  lambda << 0.9;
  EXPECT_THROW(
      acgn::design_c_for_identity(Mat::Identity(1, 1), lambda, white_model(Mat::Identity(1, 1))),
      std::invalid_argument);
}

TEST(ObservabilityRank, KnownCases) {
  EXPECT_EQ(acgn::observability_rank(Mat::Identity(3, 3), Mat::Identity(3, 3)), 3);
  Mat C = Mat::Zero(2, 2);
  C(0, 0) = 1.0;
  EXPECT_EQ(acgn::observability_rank(Mat::Identity(2, 2), C), 1);
  Mat A(2, 2);
  A << 1.1, 1.0, 0.0, 0.9;
  Mat c_row = Mat::Zero(1, 2);
  c_row(0, 0) = 1.0;
  EXPECT_EQ(acgn::observability_rank(A, c_row), 2);
}

TEST(CheckPlant, ReportsAntiStabilityAndObservability) {
  acgn::PlantSpec ps;
  ps.A = Mat::Constant(1, 1, 2.0);
  ps.C = Mat::Identity(1, 1);
  ps.noise = white_model(Mat::Identity(1, 1));
  acgn::PlantCheck pc = acgn::check_plant(ps);
  EXPECT_TRUE(pc.anti_stable);
  EXPECT_TRUE(pc.observable);
  ps.A = Mat::Constant(1, 1, 0.5);
  pc = acgn::check_plant(ps);
  EXPECT_FALSE(pc.anti_stable);
}
