#include "kyp/frequency.hpp"
#include "kyp/linalg.hpp"
#include "kyp/realization.hpp"
#include "kyp/storage.hpp"
#include "support/random_systems.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>

using namespace kyp;

namespace {

Mat m1(double a) { return Mat::Constant(1, 1, a); }

Mat real(std::initializer_list<std::initializer_list<double>> rows) {
  Mat M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (auto r : rows) {
    Eigen::Index j = 0;
    for (double v : r) M(i, j++) = v;
    ++i;
  }
  return M;
}

Mat random_unitary(testgen::SystemGenerator& gen, Eigen::Index n) {
  Eigen::HouseholderQR<Mat> qr(gen.gaussian(n, n));
  return qr.householderQ() * Mat::Identity(n, n);
}

StateSpaceSystem diag_example() {
  return StateSpaceSystem(real({{0.5, 0}, {0, 2.0}}), real({{1}, {1}}), real({{1, 1}}), m1(0.0));
}

}  // namespace

TEST(SpectralMargin, ZeroMatrix) { EXPECT_DOUBLE_EQ(spectral_margin(m1(0.0)), 1.0); }

TEST(SpectralMargin, Diagonal) { EXPECT_NEAR(spectral_margin(real({{0.5, 0}, {0, 2.0}})), 0.5, 1e-14); }

TEST(SpectralMargin, RotationPair) {
  Mat A = real({{0, 1}, {-0.81, 0}});
  Vec ev = Eigen::ComplexEigenSolver<Mat>(A).eigenvalues();
  const double oracle = std::min(std::abs(std::abs(ev(0)) - 1.0), std::abs(std::abs(ev(1)) - 1.0));
  EXPECT_NEAR(spectral_margin(A), 0.1, 1e-12);
  EXPECT_NEAR(spectral_margin(A), oracle, 1e-12);
}

TEST(SpectralMargin, NonSquareThrows) {
  try {
    spectral_margin(Mat::Zero(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonSquare);
  }
}

TEST(SpectralMargin, UnitaryInvariance) {
  testgen::SystemGenerator gen(11);
  testgen::SystemSpec spec;
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = gen.integer(1, 8);
    Mat A = gen.state_matrix(n, spec);
    Mat U = random_unitary(gen, n);
    EXPECT_NEAR(spectral_margin(U.adjoint() * A * U), spectral_margin(A), 1e-10);
  }
}

TEST(DichotomySplit, AlreadyDiagonal) {
  DichotomousDecomposition dec = dichotomy_split(diag_example());
  EXPECT_EQ(dec.dimPlus, 1);
  EXPECT_EQ(dec.dimMinus, 1);
  EXPECT_NEAR(std::abs(dec.Aplus(0, 0) - 0.5), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(dec.Aminus(0, 0) - 2.0), 0.0, 1e-14);
  EXPECT_NEAR(dec.margin, 0.5, 1e-14);
}

TEST(DichotomySplit, AllStable) {
  StateSpaceSystem sys(0.9 * Mat::Identity(2, 2), Mat::Ones(2, 1), Mat::Ones(1, 2), m1(0.0));
  DichotomousDecomposition dec = dichotomy_split(sys);
  EXPECT_EQ(dec.dimMinus, 0);
  EXPECT_EQ(dec.Aminus.size(), 0);
  EXPECT_NEAR((dec.Aplus - 0.9 * Mat::Identity(2, 2)).norm(), 0.0, 1e-14);
}

TEST(DichotomySplit, CoupledTriangular) {
  // Decoupling 2x - 0.5x = -1 gives x = -2/3: the stable eigenvector is (-2/3, 1) up to scale.
  StateSpaceSystem sys(real({{2, 1}, {0, 0.5}}), real({{1}, {1}}), real({{1, 0}}), m1(0.0));
  DichotomousDecomposition dec = dichotomy_split(sys);
  EXPECT_NEAR(std::abs(dec.Aminus(0, 0) - 2.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(dec.Aplus(0, 0) - 0.5), 0.0, 1e-13);
  Mat split = dec.Tinv * sys.A * dec.T;
  EXPECT_NEAR(std::abs(split(0, 1)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(split(1, 0)), 0.0, 1e-13);
  Vec vplus = dec.T.col(1);
  EXPECT_NEAR(std::abs(vplus(0) / vplus(1) - (-2.0 / 3.0)), 0.0, 1e-13);
}

TEST(DichotomySplit, UnitCircleEigenvalueThrows) {
  StateSpaceSystem sys(real({{1.0, 0}, {0, 0.5}}), real({{1}, {1}}), real({{1, 1}}), m1(0.0));
  try {
    dichotomy_split(sys);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoDichotomy);
  }
}

TEST(DichotomySplit, RandomBlockDiagonalAndOrthonormalBlocks) {
  testgen::SystemGenerator gen(3);
  testgen::SystemSpec spec;
  spec.nMax = 8;
  const double tol = 1e-8;
  for (int t = 0; t < 30; ++t) {
    StateSpaceSystem sys = gen.system(spec, 0.9);
    DichotomousDecomposition dec = dichotomy_split(sys, tol);
    Mat split = dec.Tinv * sys.A * dec.T;
    Mat target = linalg::blockdiag(dec.Aminus, dec.Aplus);
    EXPECT_LE((split - target).norm(), 10 * tol * sys.A.norm());
    EXPECT_LT(linalg::spectral_radius(dec.Aplus), 1.0);
    if (dec.dimMinus) {
      EXPECT_LT(linalg::spectral_radius(dec.Aminus.inverse()), 1.0);
    }
    Mat Vm = dec.T.leftCols(dec.dimMinus), Vp = dec.T.rightCols(dec.dimPlus);
    EXPECT_LE((Vm.adjoint() * Vm - Mat::Identity(dec.dimMinus, dec.dimMinus)).norm(), 1e-12);
    EXPECT_LE((Vp.adjoint() * Vp - Mat::Identity(dec.dimPlus, dec.dimPlus)).norm(), 1e-12);
    Mat Bsplit(dec.n(), sys.m());
    Bsplit << dec.Bminus, dec.Bplus;
    EXPECT_LE((dec.Tinv * sys.B - Bsplit).norm(), 1e-12 * std::max(1.0, sys.B.norm() * dec.Tinv.norm()));
  }
}

TEST(ToBicausal, ScalarAnticausal) {
  DichotomousDecomposition dec = dichotomy_split(diag_example());
  BicausalRealization bi = to_bicausal(dec, dec.D);
  // Blocks after the split carry a unit-modulus basis scaling; B*C products are invariant.
  EXPECT_NEAR(std::abs(bi.Aminus(0, 0) - 0.5), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(bi.Cminus(0, 0) * bi.Bminus(0, 0) - (-0.5)), 0.0, 1e-14);

  DichotomousDecomposition raw;
  raw.dimMinus = 1;
  raw.dimPlus = 0;
  raw.Aminus = m1(2.0);
  raw.Bminus = m1(1.0);
  raw.Cminus = m1(1.0);
  raw.Aplus = Mat(0, 0);
  raw.Bplus = Mat(0, 1);
  raw.Cplus = Mat(1, 0);
  raw.D = m1(0.0);
  raw.T = raw.Tinv = Mat::Identity(1, 1);
  BicausalRealization b2 = to_bicausal(raw, raw.D);
  EXPECT_NEAR(std::abs(b2.Aminus(0, 0) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b2.Bminus(0, 0) + 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b2.Cminus(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b2.Dhat(0, 0) + 0.5), 0.0, 1e-15);
}

TEST(ToBicausal, StableHasEmptyAnticausalPart) {
  StateSpaceSystem sys(0.5 * Mat::Identity(2, 2), Mat::Ones(2, 1), Mat::Ones(1, 2), m1(0.3));
  BicausalRealization bi = to_bicausal(dichotomy_split(sys));
  EXPECT_EQ(bi.dimMinus(), 0);
  EXPECT_NEAR(std::abs(bi.Dtilde(0, 0) - 0.3), 0.0, 1e-15);
}

TEST(ToBicausal, RoundTripTransferAgreement) {
  testgen::SystemGenerator gen(5);
  testgen::SystemSpec spec;
  spec.nMax = 8;
  spec.margin = 0.1;
  for (int t = 0; t < 20; ++t) {
    StateSpaceSystem sys = gen.system(spec, 0.8);
    DichotomousDecomposition dec = dichotomy_split(sys);
    StateSpaceSystem back = from_bicausal(to_bicausal(dec, dec.D));
    for (int k = 0; k < 512; ++k) {
      const cplx z = std::polar(1.0, 2.0 * M_PI * k / 512.0);
      Mat F = eval_transfer(sys, z), G = eval_transfer(back, z);
      ASSERT_LE((F - G).norm(), 1e-9 * std::max(1.0, F.norm()));
    }
  }
}

TEST(FromBicausal, InverseOfToBicausal) {
  BicausalRealization bi =
      make_bicausal(Mat(0, 0), Mat(0, 1), Mat(1, 0), m1(0.0), m1(0.5), m1(-0.5), m1(1.0));
  StateSpaceSystem s = from_bicausal(bi);
  EXPECT_NEAR(std::abs(s.A(0, 0) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.B(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(FromBicausal, EmptyAnticausalUnchanged) {
  BicausalRealization bi = make_bicausal(m1(0.5), m1(1.0), m1(2.0), m1(0.1), Mat(0, 0), Mat(0, 1), Mat(1, 0));
  StateSpaceSystem s = from_bicausal(bi);
  EXPECT_EQ((s.A - m1(0.5)).norm(), 0.0);
  EXPECT_EQ((s.B - m1(1.0)).norm(), 0.0);
  EXPECT_EQ((s.C - m1(2.0)).norm(), 0.0);
  EXPECT_EQ((s.D - m1(0.1)).norm(), 0.0);
}

TEST(FromBicausal, SingularAminusThrows) {
  BicausalRealization bi = make_bicausal(Mat(0, 0), Mat(0, 1), Mat(1, 0), m1(0.0), m1(0.0), m1(1.0), m1(1.0));
  try {
    from_bicausal(bi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularAminus);
  }
}

TEST(MakeBicausal, RejectsUnstableOperators) {
  try {
    make_bicausal(m1(1.5), m1(1.0), m1(1.0), m1(0.0), Mat(0, 0), Mat(0, 1), Mat(1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoDichotomy);
  }
}

TEST(AugmentEpsilon, Dimensions) {
  StateSpaceSystem sys(m1(0.5), m1(1.0), m1(1.0), m1(0.0));
  AugmentedSystem a = augment_epsilon(sys, 0.1);
  EXPECT_EQ(a.augmented.m(), 2);
  EXPECT_EQ(a.augmented.p(), 3);
  EXPECT_EQ((a.augmented.A - sys.A).norm(), 0.0);
}

TEST(AugmentEpsilon, ZeroEpsilonThrows) {
  StateSpaceSystem sys(m1(0.5), m1(1.0), m1(1.0), m1(0.0));
  try {
    augment_epsilon(sys, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveEpsilon);
  }
}

TEST(AugmentEpsilon, NormConvergesAsEpsilonShrinks) {
  testgen::SystemGenerator gen(17);
  testgen::SystemSpec spec;
  for (int t = 0; t < 10; ++t) {
    StateSpaceSystem sys = gen.system(spec, 0.7);
    const double h = hinf_norm(sys);
    const double h1 = hinf_norm(augment_epsilon(sys, 0.1).augmented);
    const double h2 = hinf_norm(augment_epsilon(sys, 0.01).augmented);
    EXPECT_GE(h1, h - 1e-9);
    EXPECT_GE(h2, h - 1e-9);
    EXPECT_LE(h2 - h, h1 - h + 1e-12);
    EXPECT_LE(h2 - h, 0.2 * (h1 - h) + 1e-9);
    EXPECT_NEAR(spectral_margin(augment_epsilon(sys, 0.1).augmented.A), spectral_margin(sys.A), 0.0);
  }
}

TEST(AugmentEpsilon, DeletingAugmentedCoordinatesGivesStrictResidual) {
  testgen::SystemGenerator gen(19);
  testgen::SystemSpec spec;
  for (int t = 0; t < 10; ++t) {
    StateSpaceSystem sys = gen.system(spec, 0.7);
    const double eps = 0.3;
    AugmentedSystem a = augment_epsilon(sys, eps);
    Mat H = gen.gaussian(sys.n(), sys.n());
    H = linalg::hermitian_part(H);
    Mat Raug = kyp_residual(a.augmented, H, 0.0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < sys.n(); ++i) keep.push_back(i);
    for (Eigen::Index i : a.baseInputs) keep.push_back(sys.n() + i);
    Mat cut(keep.size(), keep.size());
    for (size_t i = 0; i < keep.size(); ++i)
      for (size_t j = 0; j < keep.size(); ++j) cut(i, j) = Raug(keep[i], keep[j]);
    EXPECT_LE((cut - kyp_residual(sys, H, eps)).norm(), 1e-12 * std::max(1.0, H.norm()));
  }
}

TEST(AugmentDecomposition, MatchesAugmentedSystemInSplitCoordinates) {
  testgen::SystemGenerator gen(23);
  testgen::SystemSpec spec;
  StateSpaceSystem sys = gen.system(spec, 0.8);
  DichotomousDecomposition dec = dichotomy_split(sys);
  StateSpaceSystem a = augment_epsilon(sys, 0.2).augmented;
  StateSpaceSystem s = split_system(augment_decomposition(dec, 0.2));
  EXPECT_LE((dec.Tinv * a.B - s.B).norm(), 1e-12);
  EXPECT_LE((a.C * dec.T - s.C).norm(), 1e-12);
  EXPECT_EQ((a.D - s.D).norm(), 0.0);
}

TEST(AugmentEpsilonBicausal, Dimensions) {
  BicausalRealization bi = make_bicausal(m1(0.5), m1(1.0), m1(1.0), m1(0.0), m1(0.4), m1(1.0), m1(1.0));
  AugmentedBicausal a = augment_epsilon_bicausal(bi, 0.1);
  EXPECT_EQ(a.augmented.m(), 1 + 1 + 1);
  EXPECT_EQ(a.augmented.p(), 1 + 1 + 1 + 1);
  EXPECT_EQ((a.augmented.Aplus - bi.Aplus).norm(), 0.0);
  EXPECT_EQ((a.augmented.Aminus - bi.Aminus).norm(), 0.0);
}

TEST(AugmentEpsilonBicausal, EmptyAnticausalReducesToCausalAugmentation) {
  StateSpaceSystem sys(m1(0.5), m1(1.0), m1(1.0), m1(0.2));
  BicausalRealization bi = make_bicausal(sys.A, sys.B, sys.C, sys.D, Mat(0, 0), Mat(0, 1), Mat(1, 0));
  AugmentedBicausal a = augment_epsilon_bicausal(bi, 0.1);
  StateSpaceSystem c = augment_epsilon(sys, 0.1).augmented;
  EXPECT_EQ(a.augmented.dimMinus(), 0);
  EXPECT_EQ((a.augmented.Bplus - c.B).norm(), 0.0);
  EXPECT_EQ((a.augmented.Cplus - c.C).norm(), 0.0);
  EXPECT_EQ((a.augmented.Dtilde - c.D).norm(), 0.0);
}

TEST(AugmentEpsilonBicausal, WindowOperatorsSurjectiveWithMargin) {
  testgen::SystemGenerator gen(29);
  testgen::SystemSpec spec;
  for (int t = 0; t < 10; ++t) {
    StateSpaceSystem sys = gen.system(spec, 0.8);
    BicausalRealization bi = to_bicausal(dichotomy_split(sys));
    const double eps = 0.1;
    AugmentedBicausal a = augment_epsilon_bicausal(bi, eps);
    GramianData g = build_gramians(a.augmented, 64);
    const double rho = g.window.envelope.rho;
    const double bound = eps * std::sqrt(1.0 - rho);
    EXPECT_GE(g.sigmaMin.cPlus, bound);
    EXPECT_GE(g.sigmaMin.cMinus, bound);
    EXPECT_GE(g.sigmaMin.oPlus, bound);
    // The anticausal observability rows start at C-~ A-~, so the eps I block
    // enters through A-~.
    EXPECT_GE(g.sigmaMin.oMinus, eps * linalg::sigma_min(bi.Aminus) * (1.0 - 1e-12));
  }
}

TEST(StateSpaceSystem, ValidationErrors) {
  EXPECT_THROW(StateSpaceSystem(Mat::Zero(2, 3), Mat::Zero(2, 1), Mat::Zero(1, 2), Mat::Zero(1, 1)), Error);
  EXPECT_THROW(StateSpaceSystem(Mat::Zero(2, 2), Mat::Zero(3, 1), Mat::Zero(1, 2), Mat::Zero(1, 1)), Error);
  Mat A = Mat::Zero(1, 1);
  A(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    StateSpaceSystem(A, Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Zero(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
  }
}
