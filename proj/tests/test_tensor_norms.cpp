#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qform/tensor_norms.hpp"

using namespace qform;

namespace {

ComplexMatrix diag2(double a, double b) {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

SolverParams tight() {
  SolverParams p;
  p.tol = 1e-14;
  p.max_iter = 200000;
  return p;
}

}  // namespace

TEST(SuperopApply, IdentityPairIsIdentity) {
  Engine rng = make_stream(1, 0);
  const HSMatrix t(ginibre(3, 3, rng));
  const QuadraticForm one({identity_matrix(3)}, {identity_matrix(3)});
  EXPECT_LE((superop_apply(one, t).mat() - t.mat()).norm(), 1e-14);

  const QuadraticForm four(std::vector<ComplexMatrix>(4, identity_matrix(3)),
                           std::vector<ComplexMatrix>(4, identity_matrix(3)));
  EXPECT_LE((superop_apply(four, t).mat() - 4.0 * t.mat()).norm(), 1e-13);
}

TEST(SuperopApply, MatchesKroneckerMatrixOnRowVectorization) {
  Engine rng = make_stream(2, 0);
  const std::vector<ComplexMatrix> a{ginibre(3, 3, rng), ginibre(3, 3, rng)};
  const std::vector<ComplexMatrix> b{ginibre(3, 3, rng), ginibre(3, 3, rng)};
  const QuadraticForm form(a, b);
  const ComplexMatrix t = ginibre(3, 3, rng);
  const Eigen::VectorXcd expected = oracle::kronecker_sum(a, b) * oracle::vec_rows(t);
  const Eigen::VectorXcd got = oracle::vec_rows(superop_apply(form, HSMatrix(t)).mat());
  EXPECT_LE((got - expected).norm(), 1e-12 * expected.norm());
}

TEST(SuperopApply, RectangularShapes) {
  Engine rng = make_stream(3, 0);
  const std::vector<ComplexMatrix> a{ginibre(4, 4, rng)};
  const std::vector<ComplexMatrix> b{ginibre(2, 2, rng)};
  const QuadraticForm form(a, b);
  const ComplexMatrix t = ginibre(4, 2, rng);
  const Eigen::VectorXcd expected = oracle::kronecker_sum(a, b) * oracle::vec_rows(t);
  EXPECT_LE((oracle::vec_rows(form.apply(t)) - expected).norm(), 1e-12 * expected.norm());
  EXPECT_THROW(form.apply(ginibre(2, 4, rng)), std::invalid_argument);
}

TEST(QuadraticForm, RejectsMismatchedFamilies) {
  EXPECT_THROW(QuadraticForm({identity_matrix(2)}, {}), std::invalid_argument);
  EXPECT_THROW(QuadraticForm({identity_matrix(2), identity_matrix(3)},
                             {identity_matrix(2), identity_matrix(2)}),
               std::invalid_argument);
}

TEST(MinTensorNorm, FiniteDimensionalFamilyHasNormN) {
  for (std::size_t n : {1U, 2U, 4U}) {
    Engine rng = make_stream(10 + n, 0);
    const UnitaryFamily u = haar_family(n, 5, rng);
    const NormReport r = min_tensor_norm(QuadraticForm::diagonal(u));
    EXPECT_NEAR(r.value, static_cast<double>(n), 1e-8);
    EXPECT_DOUBLE_EQ(r.upper_bound_n, static_cast<double>(n));
    EXPECT_DOUBLE_EQ(r.lower_bound_2sqrt, 2.0 * std::sqrt(n - 1.0));
    // the witness is the identity direction; n = 1 is an isometry, so any t attains it
    const HSMatrix e(identity_matrix(5) / std::sqrt(5.0));
    if (n > 1) {
      EXPECT_GE(std::abs(hs_inner(r.witness, e)), 0.99);
    }
  }
}

TEST(MinTensorNorm, DiagonalPairAgainstDenseOracle) {
  const std::vector<ComplexMatrix> a{identity_matrix(2), diag2(1.0, -1.0)};
  const NormReport r = min_tensor_norm(QuadraticForm(a, a));
  // Σ aᵢ⊗āᵢ = diag(2, 0, 0, 2)
  EXPECT_NEAR(oracle::largest_singular_value(oracle::kronecker_sum(a, a)), 2.0, 1e-14);
  EXPECT_NEAR(r.value, 2.0, 1e-9);
}

TEST(MinTensorNorm, GeneralFamiliesAgainstDenseOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Engine rng = make_stream(seed, 7);
    std::vector<ComplexMatrix> a, b;
    for (int i = 0; i < 3; ++i) {
      a.push_back(ginibre(3, 3, rng));
      b.push_back(ginibre(2, 2, rng));
    }
    const NormReport r = min_tensor_norm(QuadraticForm(a, b), tight());
    const double expected = oracle::largest_singular_value(oracle::kronecker_sum(a, b));
    EXPECT_LE(r.value, expected * (1 + 1e-12));
    EXPECT_NEAR(r.value, expected, 1e-6 * expected);
  }
}

TEST(MinTensorNorm, ConjugationSymmetry) {
  Engine rng = make_stream(21, 0);
  std::vector<ComplexMatrix> a, b;
  for (int i = 0; i < 3; ++i) {
    a.push_back(haar_unitary(3, rng));
    b.push_back(haar_unitary(4, rng));
  }
  const double ab = min_tensor_norm(QuadraticForm(a, b), tight()).value;
  const double ba = min_tensor_norm(QuadraticForm(b, a), tight()).value;
  EXPECT_NEAR(ab, ba, 1e-6);
}

TEST(FreeBoundGap, SingleUnitary) {
  const GapReport g = theorem1_gap(UnitaryFamily({haar_unitary(3, 4)}));
  EXPECT_NEAR(g.gap, 1.0, 1e-9);
}

TEST(FreeBoundGap, FiniteDimensionalGapIsNMinusBound) {
  Engine rng = make_stream(11, 0);
  const UnitaryFamily u = haar_family(3, 8, rng);
  const GapReport g = theorem1_gap(u);
  EXPECT_TRUE(g.norm.converged);
  EXPECT_GE(g.gap, -1e-6);
  EXPECT_NEAR(g.gap, 3.0 - 2.0 * std::sqrt(2.0), 1e-8);
}

TEST(FreeBoundGap, RejectsNonUnitary) {
  EXPECT_THROW(theorem1_gap(std::vector<ComplexMatrix>{identity_matrix(2) * 1.1}), std::invalid_argument);
  EXPECT_NO_THROW(theorem1_gap(std::vector<ComplexMatrix>{identity_matrix(2)}));
}

TEST(FreeBoundGap, TriangleBoundHolds) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Engine rng = make_stream(seed, 3);
    const UnitaryFamily u = haar_family(4, 6, rng);
    const GapReport g = theorem1_gap(u);
    EXPECT_LE(g.norm.value, 4.0 + 1e-6);
  }
}

TEST(HaagerupSlack, EqualFamiliesGiveZero) {
  Engine rng = make_stream(31, 0);
  std::vector<ComplexMatrix> a{ginibre(3, 3, rng), ginibre(3, 3, rng)};
  EXPECT_NEAR(haagerup_slack(a, a).slack, 0.0, 1e-8);
}

TEST(HaagerupSlack, UnitaryFamiliesHaveRhsN) {
  Engine rng = make_stream(5, 0);
  const UnitaryFamily a = haar_family(2, 4, rng);
  const UnitaryFamily b = haar_family(2, 3, rng);
  const HaagerupReport h = haagerup_slack(a.members(), b.members(), tight());
  EXPECT_NEAR(h.norm_aa, 2.0, 1e-8);
  EXPECT_NEAR(h.norm_bb, 2.0, 1e-8);
  EXPECT_LE(h.lhs, 2.0 + 1e-8);
  EXPECT_GE(h.slack, -1e-6);
  const double dense = oracle::largest_singular_value(oracle::kronecker_sum(a.members(), b.members()));
  EXPECT_NEAR(h.lhs, dense, 1e-6);
}

TEST(HaagerupSlack, GeneralFamiliesAgainstDenseOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Engine rng = make_stream(seed, 9);
    std::vector<ComplexMatrix> a, b;
    for (int i = 0; i < 3; ++i) {
      a.push_back(ginibre(3, 3, rng));
      b.push_back(ginibre(2, 2, rng));
    }
    const double lhs = oracle::largest_singular_value(oracle::kronecker_sum(a, b));
    const double rhs = std::sqrt(oracle::largest_singular_value(oracle::kronecker_sum(a, a)) *
                                 oracle::largest_singular_value(oracle::kronecker_sum(b, b)));
    const HaagerupReport h = haagerup_slack(a, b, tight());
    EXPECT_GE(h.slack, -1e-6);
    EXPECT_NEAR(h.slack, rhs - lhs, 1e-5 * rhs);
  }
}

TEST(PsdSupForm, IdentityStartGivesN) {
  Engine rng = make_stream(41, 0);
  const UnitaryFamily u = haar_family(3, 4, rng);
  const PsdAscentReport r = psd_sup_form(u);
  EXPECT_NEAR(r.value, 3.0, 1e-9);
  EXPECT_FALSE(r.restricted);
}

TEST(PsdSupForm, SingleUnitary) {
  const PsdAscentReport r = psd_sup_form(UnitaryFamily({haar_unitary(3, 2)}));
  EXPECT_NEAR(r.value, 1.0, 1e-9);
}

TEST(PsdSupForm, AgreesWithMinTensorNorm) {
  Engine rng = make_stream(43, 0);
  const UnitaryFamily u = haar_family(2, 4, rng);
  EXPECT_NEAR(psd_sup_form(u).value, min_tensor_norm(QuadraticForm::diagonal(u)).value, 1e-4);
}

TEST(PsdSupForm, AdjointClosedFamiliesUseTheDiagonal) {
  Engine rng = make_stream(44, 0);
  const ComplexMatrix v = haar_unitary(3, rng), w = haar_unitary(3, rng);
  const UnitaryFamily u({v, v.adjoint(), w, w.adjoint()});
  const PsdAscentReport r = psd_sup_form(u);
  EXPECT_TRUE(r.restricted);
  EXPECT_LE((r.t - r.s).norm(), 1e-14);
  EXPECT_NEAR(r.value, min_tensor_norm(QuadraticForm::diagonal(u)).value, 1e-4);
}

TEST(PsdSupForm, IteratesAreLowerBoundsFromRandomStarts) {
  Engine rng = make_stream(45, 0);
  const UnitaryFamily u = haar_family(3, 3, rng);
  PsdAscentParams p;
  p.random_starts = 4;
  const PsdAscentReport r = psd_sup_form(u, p);
  EXPECT_LE(r.value, 3.0 + 1e-9);
  EXPECT_TRUE(is_psd_unit(r.t));
  EXPECT_TRUE(is_psd_unit(r.s));
}

TEST(PsdPart, ClampsAndRenormalizes) {
  ComplexMatrix out;
  EXPECT_TRUE(psd_normalized_part(diag2(3.0, -4.0), out));
  EXPECT_NEAR((out - diag2(1.0, 0.0)).norm(), 0.0, 1e-15);
  EXPECT_FALSE(psd_normalized_part(diag2(-1.0, -2.0), out));
}

TEST(SzarekMoment, IdentityStartFirstMoment) {
  Engine rng = make_stream(51, 0);
  const UnitaryFamily u = haar_family(3, 4, rng);
  const SzarekReport r = szarek_moment(u, HSMatrix(identity_matrix(4) / 2.0), 1);
  EXPECT_NEAR(r.lhs, 9.0, 1e-10);
  EXPECT_EQ(r.count, 3);
}

TEST(SzarekMoment, SingleUnitaryIsIsometry) {
  Engine rng = make_stream(52, 0);
  const UnitaryFamily u({haar_unitary(3, rng)});
  const HSMatrix t(random_psd_unit(3, rng));
  for (std::size_t m = 1; m <= 4; ++m) {
    const SzarekReport r = szarek_moment(u, t, m);
    EXPECT_NEAR(r.lhs, 1.0, 1e-12);
    EXPECT_EQ(r.count, 1);
  }
}

TEST(SzarekMoment, RandomPsdSecondMoment) {
  Engine rng = make_stream(53, 0);
  const UnitaryFamily u = haar_family(2, 3, rng);
  const HSMatrix t(random_psd_unit(3, rng));
  const SzarekReport r = szarek_moment(u, t, 2);
  EXPECT_EQ(r.count, 6);
  EXPECT_GE(r.lhs, 6.0 - 1e-9);
}

TEST(SzarekMoment, RejectsNonPsd) {
  const UnitaryFamily u({identity_matrix(2)});
  EXPECT_THROW(szarek_moment(u, HSMatrix(diag2(1.0, -1.0) / std::sqrt(2.0)), 1), std::invalid_argument);
  EXPECT_THROW(szarek_moment(u, HSMatrix(identity_matrix(2)), 1), std::invalid_argument);  // ‖t‖₂ ≠ 1
}

TEST(SzarekMoment, RootsIncreaseInM) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Engine rng = make_stream(seed, 54);
    const UnitaryFamily u = haar_family(3, 3, rng);
    const HSMatrix t(random_psd_unit(3, rng));
    double previous = 0.0;
    for (std::size_t m = 1; m <= 6; ++m) {
      const double root = std::pow(szarek_moment(u, t, m).lhs, 1.0 / (2.0 * m));
      EXPECT_GE(root, previous - 1e-9);
      EXPECT_LE(root, 3.0 + 1e-9);
      previous = root;
    }
  }
}
