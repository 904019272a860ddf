/*
 * Copyright 2026 The lattice-ctrl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gtest/gtest.h"
#include "lattice_ctrl/convert.hpp"
#include "lattice_ctrl/security.hpp"

namespace lattice_ctrl {
namespace {

PlainController Fixture() {
  PlainController c;
  c.F.resize(2, 2);
  c.F << -0.1, 0.1, -3.6, 0.5;
  c.G.resize(2, 1);
  c.G << 1.1, 3.0;
  c.H.resize(1, 2);
  c.H << -6.0, -5.0;
  c.J = MatrixXd::Zero(1, 1);
  c.x0 = VectorXd::Zero(2);
  return c;
}

PlainController Scalar() {
  PlainController c;
  c.F = MatrixXd::Constant(1, 1, -0.25);
  c.G = MatrixXd::Constant(1, 1, 1.0);
  c.H = MatrixXd::Constant(1, 1, 1.0);
  c.J = MatrixXd::Zero(1, 1);
  c.x0 = VectorXd::Constant(1, 1.0);
  return c;
}

PlainController RandomController(std::mt19937_64& rng, Index l, Index p, Index m) {
  std::normal_distribution<double> nd(0.0, 1.0);
  auto fill = [&](Index r, Index c) {
    MatrixXd A(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) A(i, j) = nd(rng);
    return A;
  };
  PlainController c;
  c.F = fill(l, l);
  c.F /= std::max(1.0, 1.25 * c.F.eigenvalues().cwiseAbs().maxCoeff());
  c.G = fill(l, p);
  c.H = fill(m, l);
  c.J = fill(m, p);
  c.x0 = fill(l, 1);
  return c;
}

std::vector<std::complex<double>> SortedEigenvalues(const MatrixXd& A) {
  Eigen::EigenSolver<MatrixXd> es(A);
  std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                       es.eigenvalues().data() + A.rows());
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return ev;
}

// Frequency response H (zI - F)^-1 G + J.
Eigen::MatrixXcd FrequencyResponse(const PlainController& c, double w) {
  const std::complex<double> z = std::polar(1.0, w);
  const Index l = c.state_dim();
  Eigen::MatrixXcd M = z * Eigen::MatrixXcd::Identity(l, l) - c.F.cast<std::complex<double>>();
  return c.H.cast<std::complex<double>>() *
             M.partialPivLu().solve(c.G.cast<std::complex<double>>()) +
         c.J.cast<std::complex<double>>();
}

// ---------------------------------------------------------------------------

TEST(ObservabilityTest, ObservableUnchanged) {
  const auto c = Fixture();
  const auto red = observable_reduce_detailed(c);
  EXPECT_FALSE(red.changed());
  EXPECT_EQ(red.rank, 2);
  EXPECT_TRUE(red.reduced.F.isApprox(c.F));
  EXPECT_TRUE(red.reduced.H.isApprox(c.H));
}

TEST(ObservabilityTest, DiagonalDropsUnobservableMode) {
  PlainController c;
  c.F = Eigen::Vector2d(0.4, -0.7).asDiagonal();
  c.G.resize(2, 1);
  c.G << 0.3, 2.0;
  c.H.resize(1, 2);
  c.H << 1.0, 0.0;
  c.J = MatrixXd::Constant(1, 1, 0.5);
  c.x0 = Eigen::Vector2d(1.5, -2.0);
  const auto red = observable_reduce_detailed(c);
  ASSERT_EQ(red.rank, 1);
  EXPECT_NEAR(red.reduced.F(0, 0), 0.4, 1e-12);
  EXPECT_NEAR(red.reduced.G(0, 0), 0.3, 1e-12);
  EXPECT_NEAR(red.reduced.H(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(red.reduced.J(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(red.reduced.x0(0), 1.5, 1e-12);
}

TEST(ObservabilityTest, RankDeficientMatchesTransferFunction) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    // Observable 3-state part plus one hidden mode driven by it.
    PlainController obs = RandomController(rng, 3, 2, 2);
    PlainController c;
    c.F = MatrixXd::Zero(4, 4);
    c.F.topLeftCorner(3, 3) = obs.F;
    c.F(3, 3) = 0.3;
    c.F.block(3, 0, 1, 3) = MatrixXd::Constant(1, 3, 0.2);
    c.G.resize(4, 2);
    c.G << obs.G, MatrixXd::Constant(1, 2, 0.7);
    c.H.resize(2, 4);
    c.H << obs.H, MatrixXd::Zero(2, 1);
    c.J = obs.J;
    c.x0 = VectorXd::Zero(4);
    // Mix coordinates so the hidden mode is not axis aligned.
    MatrixXd S = MatrixXd::Random(4, 4) + 3.0 * MatrixXd::Identity(4, 4);
    const MatrixXd Si = S.inverse();
    c.F = S * c.F * Si;
    c.G = S * c.G;
    c.H = c.H * Si;

    ASSERT_EQ(observability_rank(c.F, c.H), 3);
    const auto red = observable_reduce_detailed(c);
    ASSERT_EQ(red.rank, 3);
    EXPECT_EQ(observability_rank(red.reduced.F, red.reduced.H), 3);
    for (int k = 0; k < 10; ++k) {
      const double w = 0.1 + 0.3 * k;
      EXPECT_LT((FrequencyResponse(c, w) - FrequencyResponse(red.reduced, w)).norm(), 1e-8)
          << "trial " << trial << " w " << w;
    }
  }
}

TEST(ObservabilityTest, ZeroOutputIsRejected) {
  auto c = Fixture();
  c.H.setZero();
  EXPECT_THROW(observable_reduce(c), PreconditionError);
}

// ---------------------------------------------------------------------------

TEST(ReparamTest, ScalarExample) {
  const auto c = Scalar();
  const std::vector<std::int64_t> targets{0};
  const auto rp = integer_reparam(c.F, c.H, targets);
  EXPECT_NEAR(rp.R(0, 0), -0.25, 1e-15);
  EXPECT_NEAR(std::fabs(rp.T(0, 0)), 1.0, 1e-15);
  EXPECT_EQ(rp.Fint(0, 0), 0);
  EXPECT_TRUE(rp.companion);
}

TEST(ReparamTest, FixtureDeadbeat) {
  const auto c = Fixture();
  const auto rp = integer_reparam(c.F, c.H);
  EXPECT_EQ(rp.Fint, IntMatrix(2, 2, std::vector<std::int64_t>{0, 0, 1, 0}));
  EXPECT_LE(rp.residual, 1e-6);
  for (auto ev : SortedEigenvalues(c.F - rp.R * c.H)) EXPECT_LT(std::abs(ev), 1e-7);
  EXPECT_LT(rp.condition, 1e8);
  EXPECT_TRUE((rp.T * rp.T_inv).isIdentity(1e-12));
}

TEST(ReparamTest, RandomSingleOutputZeroTargets) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = RandomController(rng, 3, 1, 1);
    if (condition_number(observability_matrix(c.F, c.H)) > 1e4) continue;
    const auto rp = integer_reparam(c.F, c.H);
    const MatrixXd M = c.F - rp.R * c.H;
    // Nilpotent of index 3: M^3 = 0.
    EXPECT_LT((M * M * M).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
    EXPECT_LT((rp.T * M * rp.T_inv - MatrixXd::Zero(3, 3) -
               [&] { MatrixXd S = MatrixXd::Zero(3, 3); S(1, 0) = S(2, 1) = 1; return S; }())
                  .cwiseAbs().maxCoeff(),
              1e-8);
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(ReparamTest, IntegerEigenvalueTargets) {
  const auto c = Fixture();
  const std::vector<std::int64_t> targets{1, -2};
  const auto rp = integer_reparam(c.F, c.H, targets);
  const auto ev = SortedEigenvalues(c.F - rp.R * c.H);
  EXPECT_NEAR(ev[0].real(), -2.0, 1e-8);
  EXPECT_NEAR(ev[1].real(), 1.0, 1e-8);
  EXPECT_NEAR(std::abs(ev[0].imag()) + std::abs(ev[1].imag()), 0.0, 1e-8);
  // Companion of s^2 + s - 2.
  EXPECT_EQ(rp.Fint, IntMatrix(2, 2, std::vector<std::int64_t>{0, 2, 1, -1}));
}

TEST(ReparamTest, CompanionCoefficientTargets) {
  const auto c = Fixture();
  const std::vector<std::int64_t> k{3, -1};
  const auto rp = integer_reparam(c.F, c.H, k, {}, TargetKind::kCompanionCoefficients);
  EXPECT_EQ(rp.Fint, IntMatrix(2, 2, std::vector<std::int64_t>{0, 3, 1, -1}));
  EXPECT_LE(rp.residual, 1e-6);
}

TEST(ReparamTest, MultiOutputDiagonalizes) {
  std::mt19937_64 rng(99);
  const std::vector<std::int64_t> targets{0, 1, -1};
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = RandomController(rng, 3, 2, 2);
    const auto rp = integer_reparam(c.F, c.H, targets);
    EXPECT_FALSE(rp.companion);
    const auto ev = SortedEigenvalues(c.F - rp.R * c.H);
    EXPECT_NEAR(ev[0].real(), -1.0, 1e-8);
    EXPECT_NEAR(ev[1].real(), 0.0, 1e-8);
    EXPECT_NEAR(ev[2].real(), 1.0, 1e-8);
    for (Index i = 0; i < 3; ++i) EXPECT_EQ(rp.Fint(i, i), targets[static_cast<std::size_t>(i)]);
    EXPECT_LE(rp.residual, 1e-6);
  }
}

TEST(ReparamTest, MultiOutputNeedsDistinctTargets) {
  std::mt19937_64 rng(5);
  const auto c = RandomController(rng, 3, 2, 2);
  EXPECT_THROW(integer_reparam(c.F, c.H), ParameterError);
  const std::vector<std::int64_t> dup{0, 0, 1};
  EXPECT_THROW(integer_reparam(c.F, c.H, dup), ParameterError);
}

TEST(ReparamTest, UnobservableIsPreconditionError) {
  MatrixXd F = Eigen::Vector2d(0.4, -0.7).asDiagonal();
  MatrixXd H(1, 2);
  H << 1.0, 0.0;
  EXPECT_THROW(integer_reparam(F, H), PreconditionError);
}

TEST(ReparamTest, IllConditionedIsRejected) {
  MatrixXd F(2, 2);
  F << 0.5, 0.0, 0.0, 0.5 + 1e-9;
  MatrixXd H(1, 2);
  H << 1.0, 1.0;
  ReparamOptions opt;
  opt.rank_tol = 1e-15;
  try {
    integer_reparam(F, H, {}, opt);
    FAIL() << "expected ConditioningError";
  } catch (const ConditioningError& e) {
    EXPECT_GT(e.condition_number(), 1e8);
  }
}

// z = Tx turns the controller into z+ = T(F-RH)T^-1 z + T(G-RJ) y + TR u,
// u = HT^-1 z + J y; outputs agree for any R.
TEST(ReparamTest, InputOutputPreserved) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto c = trial == 0 ? Fixture() : RandomController(rng, 3, 1, 1);
    const auto rp = integer_reparam(c.F, c.H);
    MatrixXd Ft = MatrixXd(rp.Fint.rows(), rp.Fint.cols());
    for (Index i = 0; i < Ft.rows(); ++i)
      for (Index j = 0; j < Ft.cols(); ++j) Ft(i, j) = static_cast<double>(rp.Fint(i, j));
    const MatrixXd Gt = rp.T * (c.G - rp.R * c.J), Rt = rp.T * rp.R, Ht = c.H * rp.T_inv;
    VectorXd x = c.x0, z = rp.T * c.x0;
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      VectorXd y(c.input_dim());
      for (Index i = 0; i < y.size(); ++i) y(i) = ud(rng);
      const VectorXd u = c.H * x + c.J * y;
      const VectorXd ut = Ht * z + c.J * y;
      worst = std::max(worst, (u - ut).cwiseAbs().maxCoeff());
      x = c.F * x + c.G * y;
      z = Ft * z + Gt * y + Rt * ut;
    }
    EXPECT_LT(worst, 1e-8) << "trial " << trial;
  }
}

// ---------------------------------------------------------------------------

TEST(QuantizeTest, UnitScaleKeepsIntegers) {
  PlainController c;
  c.F = MatrixXd::Zero(1, 1);
  c.G = MatrixXd::Constant(1, 1, 3.0);
  c.H = MatrixXd::Constant(1, 1, 1.0);
  c.J = MatrixXd::Constant(1, 1, -2.0);
  c.x0 = VectorXd::Constant(1, 4.0);
  const auto rp = integer_reparam(c.F, c.H);
  const auto ic = quantize_controller(c, rp, Scales{1.0, 1.0, 1});
  EXPECT_EQ(ic.F(0, 0), 0);
  EXPECT_EQ(ic.G(0, 0), 3);
  EXPECT_EQ(ic.R(0, 0), 0);
  EXPECT_EQ(ic.H(0, 0), 1);
  EXPECT_EQ(ic.J(0, 0), -2);
  EXPECT_EQ(ic.z0, IntVector{4});
}

TEST(QuantizeTest, RoundsGain) {
  PlainController c = Scalar();
  c.F(0, 0) = 0.0;
  c.G(0, 0) = 0.33;
  const auto rp = integer_reparam(c.F, c.H);
  const auto ic = quantize_controller(c, rp, Scales{1.0, 0.01, 1});
  EXPECT_EQ(ic.G(0, 0), 33);
  EXPECT_EQ(ic.H(0, 0), 100);
}

TEST(QuantizeTest, ScalarExampleFormulas) {
  const auto c = Scalar();
  const auto rp = integer_reparam(c.F, c.H, std::vector<std::int64_t>{0});
  const Scales sc{0.1, 0.01, 4};
  const auto ic = quantize_controller(c, rp, sc);
  const double t = rp.T(0, 0);
  EXPECT_EQ(ic.F(0, 0), 0);
  EXPECT_EQ(ic.G(0, 0), std::llround(t * 1.0 / 0.01));
  EXPECT_EQ(ic.R(0, 0), std::llround(t * -0.25 / 0.01));
  EXPECT_EQ(ic.H(0, 0), std::llround(1.0 / t / 0.01));
  EXPECT_EQ(ic.z0[0], 4 * std::llround(t * 1.0 / (0.1 * 0.01)));
}

TEST(QuantizeTest, ResidualShrinksWithS) {
  std::mt19937_64 rng(3);
  const auto c = RandomController(rng, 3, 2, 1);
  const auto rp = integer_reparam(c.F, c.H);
  auto residual = [&](double s) {
    const auto ic = quantize_controller(c, rp, Scales{1.0, s, 1});
    const MatrixXd G = rp.T * (c.G - rp.R * c.J);
    double worst = 0.0;
    for (Index i = 0; i < G.rows(); ++i)
      for (Index j = 0; j < G.cols(); ++j)
        worst = std::max(worst, std::fabs(G(i, j) - s * static_cast<double>(ic.G(i, j))));
    EXPECT_LE(worst, s / 2 + 1e-15);
    return worst;
  };
  double prev = residual(1e-2);
  for (double s : {1e-3, 1e-4, 1e-5}) {
    const double cur = residual(s);
    EXPECT_LE(cur * 5, prev) << "s " << s;
    prev = cur;
  }
}

TEST(QuantizeTest, InputExamples) {
  const Modulus q(8);
  EXPECT_EQ(quantize_input(std::vector<double>{0.0}, 0.1, 1, q), ZqVector{0});
  EXPECT_EQ(quantize_input(std::vector<double>{0.31}, 0.1, 1, q), ZqVector{3});
  EXPECT_EQ(quantize_input(std::vector<double>{-0.31}, 0.1, 4, q), ZqVector{244});
}

TEST(QuantizeTest, OverflowingScaleIsCapacityError) {
  EXPECT_THROW(quantize_input_integer(std::vector<double>{1.0}, 1e-12, 1ULL << 40),
               CapacityError);
}

// ---------------------------------------------------------------------------

TEST(ModulusTest, SmallestPowerOfTwo) {
  const OutputBand band{{0.0}, {1.0}, 0.0};
  EXPECT_DOUBLE_EQ(static_cast<double>(modulus_bound(band, Scales{1, 1, 1})), 2.0);
  EXPECT_EQ(select_modulus(band, Scales{1, 1, 1}).value(), 4u);
  // Bound just above a power of two rounds up.
  const OutputBand b2{{0.0}, {4.5}, 0.0};
  EXPECT_EQ(select_modulus(b2, Scales{1, 1, 1}).value(), 8u);
}

TEST(ModulusTest, EpsilonIsLinear) {
  const Scales sc{0.01, 0.1, 16};
  const OutputBand a{{-1.0}, {2.0}, 0.05};
  const OutputBand b{{-1.0}, {2.0}, 0.10};
  const long double grow = modulus_bound(b, sc) - modulus_bound(a, sc);
  EXPECT_NEAR(static_cast<double>(grow), 2 * 0.05 * 16 / (0.01 * 0.1 * 0.1), 1e-6);
}

TEST(ModulusTest, WorstOutputWins) {
  const OutputBand band{{0.0, -10.0}, {1.0, 10.0}, 0.0};
  EXPECT_DOUBLE_EQ(static_cast<double>(modulus_bound(band, Scales{1, 1, 1})), 21.0);
  EXPECT_EQ(select_modulus(band, Scales{1, 1, 1}).log2(), 5u);
}

TEST(ModulusTest, PresetNear47Bits) {
  // 2^47.3 lands on 2^48.
  const double span = std::exp2(47.3) - 1;
  const OutputBand band{{0.0}, {span}, 0.0};
  EXPECT_EQ(select_modulus(band, Scales{1, 1, 1}).log2(), 48u);
}

TEST(ModulusTest, TooLargeIsCapacityError) {
  const OutputBand band{{-1.0}, {1.0}, 0.01};
  try {
    select_modulus(band, Scales{1e-6, 1e-6, 1ULL << 20});
    FAIL();
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("increase s"), std::string::npos);
  }
}

TEST(ProjectTest, NegativeEntryWraps) {
  IntegerController ic;
  ic.F = IntMatrix(1, 1, std::vector<std::int64_t>{-25});
  ic.G = IntMatrix(1, 1, std::vector<std::int64_t>{7});
  ic.R = IntMatrix(1, 1, std::vector<std::int64_t>{0});
  ic.H = IntMatrix(1, 1, std::vector<std::int64_t>{1});
  ic.J = IntMatrix(1, 1, std::vector<std::int64_t>{0});
  ic.z0 = {3};
  ic.scales = Scales{1, 1, 1};
  const auto mc = project_mod_q(ic, Modulus(8), OutputBand{{0.0}, {1.0}, 0.0});
  EXPECT_EQ(mc.F(0, 0), 231u);
  EXPECT_EQ(mc.G(0, 0), 7u);
  EXPECT_EQ(mc.z0, ZqVector{3});
}

ModularController ScalarModular(double r, double s, std::uint64_t L, OutputBand band,
                                unsigned log2_q) {
  IntegerController ic;
  ic.F = IntMatrix(1, 1, 0);
  ic.G = IntMatrix(1, 1, 0);
  ic.R = IntMatrix(1, 1, 0);
  ic.H = IntMatrix(1, 1, 1);
  ic.J = IntMatrix(1, 1, 0);
  ic.z0 = {0};
  ic.scales = Scales{r, s, L};
  return project_mod_q(ic, Modulus(log2_q), band);
}

TEST(RecoverTest, ScaledValue) {
  // r s^2 / L = 0.01.
  const auto mc = ScalarModular(1.0, 0.1, 1, OutputBand{{0.0}, {1.0}, 0.0}, 8);
  const auto g = recover_output(std::vector<std::uint64_t>{75}, mc);
  EXPECT_NEAR(g[0], 0.75, 1e-12);
  EXPECT_EQ(recover_output(std::vector<std::uint64_t>{0}, mc)[0], 0.0);
}

TEST(RecoverTest, InvertsProjectionInsideBand) {
  const auto mc = ScalarModular(0.5, 0.2, 3, OutputBand{{-2.0}, {1.0}, 0.1}, 10);
  const auto v0 = mc.offsets()[0];
  const long double f = 0.5L * 0.2L * 0.2L / 3.0L;
  for (std::int64_t ubar = static_cast<std::int64_t>(std::ceil(v0)); ubar < v0 + 1024; ++ubar) {
    const std::uint64_t u = mc.q.reduce(ubar);
    EXPECT_EQ(unwrap_output(std::vector<std::uint64_t>{u}, mc)[0], ubar);
    EXPECT_NEAR(recover_output(std::vector<std::uint64_t>{u}, mc)[0],
                static_cast<double>(f * ubar), 1e-12);
  }
}

TEST(RecoverTest, BandEdgeIsBottomRepresentative) {
  // u_min - eps = -1 at unit scale: offset -1 exactly.
  const auto mc = ScalarModular(1.0, 1.0, 1, OutputBand{{-0.5}, {2.0}, 0.5}, 4);
  EXPECT_DOUBLE_EQ(static_cast<double>(mc.offsets()[0]), -1.0);
  EXPECT_EQ(unwrap_output(std::vector<std::uint64_t>{15}, mc)[0], -1);
  EXPECT_EQ(unwrap_output(std::vector<std::uint64_t>{14}, mc)[0], 14);
}

TEST(RequantizeTest, UnitScaleIsIdentity) {
  const auto mc = ScalarModular(1.0, 1.0, 1, OutputBand{{-3.0}, {3.0}, 0.0}, 4);
  for (std::uint64_t u = 0; u < 16; ++u) {
    EXPECT_EQ(requantize_output(std::vector<std::uint64_t>{u}, mc)[0], u);
  }
}

TEST(RequantizeTest, MatchesIntegerFormula) {
  const auto mc = ScalarModular(0.01, 0.01, 16, OutputBand{{-1.0}, {1.0}, 0.01}, 40);
  std::mt19937_64 rng(8);
  const auto v0 = mc.offsets()[0];
  std::uniform_int_distribution<std::int64_t> dist(static_cast<std::int64_t>(std::ceil(v0)),
                                                   static_cast<std::int64_t>(-v0));
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t ubar = dist(rng);
    // L [s^2 ubar / L] in exact rational arithmetic: s^2 = 1e-4.
    const long double v = static_cast<long double>(ubar) / (16.0L * 10000.0L);
    const std::int64_t expect = 16 * static_cast<std::int64_t>(std::floor(v + 0.5L));
    EXPECT_EQ(requantize_output(std::vector<std::uint64_t>{mc.q.reduce(ubar)}, mc)[0],
              mc.q.reduce(expect));
  }
}

// ---------------------------------------------------------------------------

TEST(ConvertTest, ScalarExamplePipeline) {
  const auto cv = convert_controller(Scalar(), Scales{0.01, 0.01, 1},
                                     OutputBand{{0.5}, {1.0}, 0.01});
  EXPECT_EQ(cv.integer.F(0, 0), 0);
  EXPECT_FALSE(cv.reduction.changed());
  // L (0.5 + 0.02) / (r s^2) + 1 = 520001 -> 2^19.
  EXPECT_EQ(cv.modular.q.log2(), 19u);
  EXPECT_NEAR(static_cast<double>(cv.modulus_bound), 520001.0, 1e-6);
}

TEST(ConvertTest, UnobservableReducesDimension) {
  PlainController c;
  c.F = Eigen::Vector3d(0.5, -0.2, 0.3).asDiagonal();
  c.F(1, 2) = 0.1;
  c.G = Eigen::Vector3d(1.0, 0.5, 1.0);
  c.H.resize(1, 3);
  c.H << 1.0, 0.0, 0.0;
  c.J = MatrixXd::Constant(1, 1, 0.1);
  c.x0 = VectorXd::Zero(3);
  const auto cv = convert_controller(c, Scales{0.01, 0.01, 1}, OutputBand{{-1}, {1}, 0.01});
  EXPECT_EQ(cv.reduction.original_dim, 3);
  EXPECT_EQ(cv.reduction.rank, 1);
  EXPECT_EQ(cv.integer.state_dim(), 1u);
}

TEST(ConvertTest, TargetCountChecked) {
  ConversionOptions opt;
  opt.targets = {0, 0, 0};
  EXPECT_THROW(convert_controller(Fixture(), Scales{0.01, 0.01, 1},
                                  OutputBand{{-1}, {1}, 0.01}, opt),
               ParameterError);
}

TEST(ConvertTest, BandDimensionChecked) {
  EXPECT_THROW(convert_controller(Fixture(), Scales{0.01, 0.01, 1},
                                  OutputBand{{-1, -1}, {1, 1}, 0.01}),
               ParameterError);
}

// ---------------------------------------------------------------------------

TEST(ErrorBudgetTest, VanishesWithScales) {
  const auto c = Fixture();
  const auto rp = integer_reparam(c.F, c.H);
  const auto b = error_budget(c, rp, Scales{0.0 + 1e-300, 1e-300, 1}, 1.0, 0.01);
  EXPECT_LT(b.alpha, 1e-290);
}

TEST(ErrorBudgetTest, AlphaMonotoneInS) {
  const auto c = Fixture();
  const auto rp = integer_reparam(c.F, c.H);
  double prev = std::numeric_limits<double>::infinity();
  for (double s = 1e-1; s > 1e-6; s /= 2) {
    const double a = error_budget(c, rp, Scales{1e-3, s, 1}, 1.0, 0.01).alpha;
    EXPECT_LT(a, prev) << "s " << s;
    prev = a;
  }
}

TEST(ErrorBudgetTest, BetaFallsWithL) {
  const auto c = Fixture();
  const auto rp = integer_reparam(c.F, c.H);
  const Params p = Params::make(50, 48, 10.0);
  double prev = std::numeric_limits<double>::infinity();
  for (unsigned k = 0; k <= 40; k += 10) {
    const auto b = error_budget(c, rp, Scales{1e-3, 1e-3, 1ULL << k}, 1.0, 0.01, &p);
    EXPECT_LT(b.beta, prev);
    EXPECT_NEAR(b.beta * static_cast<double>(1ULL << k),
                error_budget(c, rp, Scales{1e-3, 1e-3, 1}, 1.0, 0.01, &p).beta, 1e-6 * b.beta * (1ULL << k));
    prev = b.beta;
  }
  EXPECT_EQ(error_budget(c, rp, Scales{1e-3, 1e-3, 1}, 1.0, 0.01).beta, 0.0);
}

// ---------------------------------------------------------------------------

// Independent evaluation of n log q >= ((lambda + 110) / 7.2) log^2(sqrt(2 pi) sigma / q)
// with base-2 logs converted to natural logs.
double ThresholdOracle(double lambda, double log2_q, double sigma) {
  const double ln2 = std::log(2.0);
  const double ratio = (std::log2(std::sqrt(2 * M_PI) * sigma) - log2_q) * ln2;
  return (lambda + 110) / 7.2 * ratio * ratio / (log2_q * ln2);
}

TEST(SecurityTest, ReferenceSizing) {
  EXPECT_NEAR(min_n_threshold(80, 48, 10.0), ThresholdOracle(80, 48, 10.0), 1e-9);
  EXPECT_NEAR(min_n_threshold(80, 48, 10.0), 716.19, 0.01);
  EXPECT_EQ(min_n(80, 48, 10.0), 717u);
}

TEST(SecurityTest, LinearInLambdaPlus110) {
  const double a = min_n_threshold(80, 48, 10.0);
  const double b = min_n_threshold(2 * 190 - 110, 48, 10.0);
  EXPECT_NEAR(b, 2 * a, 1e-9);
}

TEST(SecurityTest, EstimateInvertsThreshold) {
  const double lam = security_estimate(1000, 48, 10.0);
  EXPECT_NEAR(min_n_threshold(lam, 48, 10.0), 1000.0, 1e-6);
  // Frozen from the oracle: 7.2 n ln q / ln^2(...) - 110.
  const double ln2 = std::log(2.0);
  const double r = (std::log2(std::sqrt(2 * M_PI) * 10.0) - 48) * ln2;
  EXPECT_NEAR(lam, 7.2 * 1000 * 48 * ln2 / (r * r) - 110, 1e-9);
  EXPECT_NEAR(lam, 155.3, 0.05);
}

TEST(SecurityTest, RejectsBadInputs) {
  EXPECT_THROW(security_estimate(10, 48, 0.0), ParameterError);
  EXPECT_THROW(min_n(80, 3, 10.0), ParameterError);
}

}  // namespace
}  // namespace lattice_ctrl
