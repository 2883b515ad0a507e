#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "covchan/covariance.hpp"

namespace covchan {
namespace {

const double kS = std::numbers::sqrt2 / 2.0;
const CMatrix kI = CMatrix::identity(2);
const CMatrix kX{{0, 1}, {1, 0}};
const CMatrix kZ{{1, 0}, {0, -1}};
const CMatrix kH{{kS, kS}, {kS, -kS}};
const CMatrix kP0{{1, 0}, {0, 0}};
const CMatrix kP1{{0, 0}, {0, 1}};

KrausSet phase_damping() { return KrausSet({kS * kI, kS * kZ}, true); }

/// Brute force over permutations with the per-row optimal phase, evaluated
/// as a plain Frobenius distance.
double brute_phase_permutation_distance(const CMatrix& v) {
  const std::size_t n = v.rows();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    CMatrix dp(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      const Complex x = v(r, perm[r]);
      dp(r, perm[r]) = std::abs(x) > 0 ? x / std::abs(x) : Complex{1.0};
    }
    best = std::min(best, frobenius_distance(v, dp));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TEST(TransformState, Examples) {
  const DensityMatrix rho(random_density(2, 4));
  EXPECT_LE(frobenius_distance(transform_state(rho, FrameTransform::identity(2)).mat(), rho.mat()), 1e-15);
  const CMatrix diag{{0.75, 0}, {0, 0.25}};
  const CMatrix swapped{{0.25, 0}, {0, 0.75}};
  EXPECT_EQ(transform_state(DensityMatrix(diag), FrameTransform(kX)).mat(), swapped);
}

TEST(TransformState, PreservesSpectrum) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(derive_seed(10, 0, seed));
    const std::size_t d = 1 + seed % 8;
    const DensityMatrix rho(random_density(d, rng));
    const FrameTransform f(random_unitary(d, rng));
    const auto before = hermitian_eigenvalues(rho.mat());
    const auto after = hermitian_eigenvalues(transform_state(rho, f).mat());
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(before[i], after[i], 1e-10);
  }
}

TEST(TransformState, DimensionMismatchThrows) {
  EXPECT_THROW(transform_state(DensityMatrix(random_density(3, 1)), FrameTransform::identity(2)), ShapeError);
}

TEST(FrameTransform, RejectsNonUnitary) {
  EXPECT_THROW(FrameTransform(CMatrix{{1, 1}, {0, 1}}), DomainError);
  EXPECT_THROW(FrameTransform(CMatrix(2, 3)), ShapeError);
}

TEST(ConjugateKraus, Examples) {
  const KrausSet k = random_kraus(2, 3, 8);
  EXPECT_EQ(conjugate_kraus(k, FrameTransform::identity(2)).ops(), k.ops());
  const KrausSet z = conjugate_kraus(KrausSet({kX}), FrameTransform(kH));
  EXPECT_LE(frobenius_distance(z[0], kZ), 1e-12);
}

TEST(ConjugateKraus, PreservesCompletenessDefect) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(derive_seed(11, 0, seed));
    const std::size_t d = 1 + seed % 5;
    std::vector<CMatrix> ops;
    for (std::size_t a = 0; a <= seed % 3; ++a) ops.push_back(ginibre(d, d, rng));
    const KrausSet k(ops);
    const FrameTransform f(random_unitary(d, rng));
    EXPECT_NEAR(completeness_defect(conjugate_kraus(k, f)), completeness_defect(k), 1e-10);
  }
}

TEST(CompatibilityResidual, Examples) {
  const KrausSet k = random_kraus(3, 2, 21);
  const FrameTransform f(random_unitary(3, 22));
  EXPECT_LE(compatibility_residual(k, conjugate_kraus(k, f), f), 1e-10);
  EXPECT_EQ(compatibility_residual(k, k, FrameTransform::identity(3)), 0.0);
  // Identity vs bit flip: the Choi projectors onto (1,0,0,1) and (0,1,1,0)
  // have disjoint support, four unit entries each.
  EXPECT_DOUBLE_EQ(compatibility_residual(KrausSet({kI}), KrausSet({kX}), FrameTransform::identity(2)),
                   std::sqrt(8.0));
}

TEST(CompatibilityResidual, CovariantSolutionAlwaysCompatible) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(derive_seed(12, 0, seed));
    const std::size_t d = 1 + seed % 8;
    const KrausSet k = random_kraus(d, 1 + seed % 6, rng);
    const FrameTransform f(random_unitary(d, rng));
    ASSERT_LE(compatibility_residual(k, conjugate_kraus(k, f), f), 1e-10) << "seed " << seed;
  }
}

TEST(CompatibilityResidual, DimensionMismatchThrows) {
  EXPECT_THROW(compatibility_residual(KrausSet({kI}), KrausSet({kI}), FrameTransform::identity(3)), ShapeError);
}

TEST(MixKraus, IdentityMixing) {
  const KrausSet k = random_kraus(3, 3, 4);
  const KrausSet out = mix_kraus(k, MixingUnitary(CMatrix::identity(3)));
  for (std::size_t a = 0; a < 3; ++a) EXPECT_LE(frobenius_distance(out[a], k[a]), 1e-15);
}

TEST(MixKraus, HadamardTurnsPauliDephasingIntoProjectors) {
  const KrausSet out = mix_kraus(phase_damping(), MixingUnitary(kH));
  EXPECT_LE(frobenius_distance(out[0], kP0), 1e-12);
  EXPECT_LE(frobenius_distance(out[1], kP1), 1e-12);
  EXPECT_TRUE(channels_equal(out, phase_damping()));
}

TEST(MixKraus, PreservesChannelAndCompleteness) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(derive_seed(13, 0, seed));
    const std::size_t d = 1 + seed % 4;
    const std::size_t n = 1 + seed % 6;
    const KrausSet k = random_kraus(d, n, rng);
    const KrausSet l = mix_kraus(k, MixingUnitary(random_unitary(n, rng)));
    ASSERT_LE(choi_distance(k, l), 1e-10) << "seed " << seed;
    ASSERT_TRUE(channels_equal(l, k, 1e-9));
    ASSERT_LE(completeness_defect(l), 1e-9);
  }
}

TEST(MixKraus, RankMismatchThrows) {
  EXPECT_THROW(mix_kraus(phase_damping(), MixingUnitary(CMatrix::identity(3))), ShapeError);
}

TEST(MakeNoncovariantSolution, TrivialMixingIsCovariant) {
  const KrausSet k = random_kraus(2, 2, 30);
  const FrameTransform f(random_unitary(2, 31));
  const KrausSet l = make_noncovariant_solution(k, f, MixingUnitary(CMatrix::identity(2)));
  EXPECT_LE(covariant_distance(k, l, f), 1e-15);
}

TEST(MakeNoncovariantSolution, PhaseDampingExample) {
  const KrausSet l = make_noncovariant_solution(phase_damping(), FrameTransform::identity(2), MixingUnitary(kH));
  EXPECT_LE(frobenius_distance(l[0], kP0), 1e-12);
  EXPECT_LE(frobenius_distance(l[1], kP1), 1e-12);
  EXPECT_LE(compatibility_residual(phase_damping(), l, FrameTransform::identity(2)), 1e-12);
  // ‖diag(1,0) − I/√2‖ = sqrt(2 − √2) and ‖diag(0,1) − Z/√2‖ = sqrt(2 + √2);
  // the report keeps the larger one.
  const double first = frobenius_distance(l[0], kS * kI);
  const double second = frobenius_distance(l[1], kS * kZ);
  EXPECT_NEAR(first, std::sqrt(2.0 - std::numbers::sqrt2), 1e-12);
  EXPECT_NEAR(second, std::sqrt(2.0 + std::numbers::sqrt2), 1e-12);
  EXPECT_NEAR(covariant_distance(phase_damping(), l, FrameTransform::identity(2)), std::max(first, second), 1e-15);
}

TEST(MakeNoncovariantSolution, AlwaysCompatible) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(derive_seed(14, 0, seed));
    const std::size_t d = 2 + seed % 3;
    const std::size_t n = 2 + (seed / 3) % 3;
    const KrausSet k = random_kraus(d, n, rng);
    const FrameTransform f(random_unitary(d, rng));
    const MixingUnitary v(random_unitary(n, rng));
    const KrausSet l = make_noncovariant_solution(k, f, v);
    ASSERT_LE(compatibility_residual(k, l, f), 1e-9) << "seed " << seed;
    if (distance_to_phase_permutation(v.matrix()) > 1e-3) EXPECT_GT(covariant_distance(k, l, f), 0.0);
  }
}

TEST(Analyze, Trichotomy) {
  const KrausSet k = random_kraus(2, 2, 40);
  const FrameTransform f(random_unitary(2, 41));
  EXPECT_EQ(analyze(k, conjugate_kraus(k, f), f).verdict, Verdict::kCovariant);
  EXPECT_EQ(analyze(k, make_noncovariant_solution(k, f, MixingUnitary(kH)), f).verdict,
            Verdict::kNoncovariantCompatible);
  const CovarianceReport bad = analyze(KrausSet({kI}), KrausSet({kX}), FrameTransform::identity(2));
  EXPECT_EQ(bad.verdict, Verdict::kIncompatible);
  EXPECT_DOUBLE_EQ(bad.residual, std::sqrt(8.0));
}

TEST(Analyze, RankOnePairsArePhaseAligned) {
  const CMatrix u = random_unitary(3, 42);
  const FrameTransform f(random_unitary(3, 43));
  const KrausSet lprime({std::polar(1.0, 1.1) * matmul(matmul(f.matrix(), u), dagger(f.matrix()))});
  const CovarianceReport r = analyze(KrausSet({u}), lprime, f);
  EXPECT_TRUE(r.phase_aligned);
  EXPECT_EQ(r.verdict, Verdict::kCovariant);
}

TEST(Analyze, DifferentRanksHaveInfiniteCovariantDistance) {
  const KrausSet k({kI});
  const KrausSet l({kI, CMatrix::zero(2, 2)});
  const CovarianceReport r = analyze(k, l, FrameTransform::identity(2));
  EXPECT_TRUE(std::isinf(r.covariant_distance));
  EXPECT_EQ(r.verdict, Verdict::kNoncovariantCompatible);
}

TEST(Analyze, VerdictMatchesInvariants) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(derive_seed(15, 0, seed));
    const std::size_t d = 1 + seed % 3;
    const std::size_t n = 1 + seed % 3;
    const KrausSet k = random_kraus(d, n, rng);
    const FrameTransform f(random_unitary(d, rng));
    const KrausSet l = seed % 3 == 0   ? conjugate_kraus(k, f)
                       : seed % 3 == 1 ? make_noncovariant_solution(k, f, MixingUnitary(random_unitary(n, rng)))
                                       : random_kraus(d, n, rng);
    const double tol = 1e-9;
    const CovarianceReport r = analyze(k, l, f, tol);
    const int hits = (r.verdict == Verdict::kCovariant) + (r.verdict == Verdict::kNoncovariantCompatible) +
                     (r.verdict == Verdict::kIncompatible);
    ASSERT_EQ(hits, 1);
    EXPECT_EQ(r.verdict == Verdict::kIncompatible, r.residual > tol);
    EXPECT_EQ(r.verdict == Verdict::kCovariant, r.residual <= tol && r.covariant_distance <= tol);
    EXPECT_EQ(analyze(k, l, f, tol).verdict, r.verdict);
  }
}

TEST(PhasePermutationDistance, MatchesBruteForce) {
  EXPECT_NEAR(distance_to_phase_permutation(CMatrix::identity(4)), 0.0, 1e-15);
  const CMatrix phased_swap{{0, std::polar(1.0, 0.3)}, {std::polar(1.0, -2.0), 0}};
  EXPECT_NEAR(distance_to_phase_permutation(phased_swap), 0.0, 1e-7);
  EXPECT_NEAR(distance_to_phase_permutation(kH), brute_phase_permutation_distance(kH), 1e-7);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const CMatrix v = random_unitary(1 + seed % 5, seed);
    EXPECT_NEAR(distance_to_phase_permutation(v), brute_phase_permutation_distance(v), 1e-7);
  }
}

TEST(N1UniquenessCheck, GlobalPhaseIsEqual) {
  const N1Check c = n1_uniqueness_check(kI, std::polar(1.0, std::numbers::pi / 4) * kI);
  EXPECT_EQ(c.verdict, N1Verdict::kEqualUpToPhase);
  EXPECT_FALSE(c.witness.has_value());
  EXPECT_NEAR(std::arg(c.alignment.phase), std::numbers::pi / 4, 1e-12);
}

TEST(N1UniquenessCheck, IdentityVersusBitFlip) {
  const N1Check c = n1_uniqueness_check(kI, kX);
  ASSERT_EQ(c.verdict, N1Verdict::kDifferent);
  ASSERT_TRUE(c.witness.has_value());
  // |0⟩⟨0| maps to diag(1,0) vs diag(0,1), distance √2; the |+⟩ states are
  // fixed by X, so the basis projector is the best witness.
  EXPECT_EQ(c.witness->mat(), kP0);
  EXPECT_NEAR(c.witness_distance, std::numbers::sqrt2, 1e-12);
}

TEST(N1UniquenessCheck, RandomPhasesAreEqual) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(derive_seed(16, 0, seed));
    const std::size_t d = 1 + seed % 6;
    const CMatrix k1 = random_unitary(d, rng);
    const Complex c = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
    ASSERT_EQ(n1_uniqueness_check(k1, c * k1).verdict, N1Verdict::kEqualUpToPhase) << "seed " << seed;
  }
}

TEST(N1UniquenessCheck, IndependentPairsHaveValidWitness) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(derive_seed(17, 0, seed));
    const std::size_t d = 2 + seed % 4;
    const CMatrix k1 = random_unitary(d, rng);
    const CMatrix l1 = random_unitary(d, rng);
    const double tol = 1e-9;
    const N1Check c = n1_uniqueness_check(k1, l1, tol);
    ASSERT_EQ(c.verdict, N1Verdict::kDifferent);
    ASSERT_TRUE(c.witness.has_value());
    const CMatrix& w = c.witness->mat();
    EXPECT_NO_THROW(DensityMatrix{w});
    const double dist = frobenius_distance(matmul(matmul(k1, w), dagger(k1)), matmul(matmul(l1, w), dagger(l1)));
    EXPECT_GT(dist, tol);
    EXPECT_DOUBLE_EQ(dist, c.witness_distance);
  }
}

TEST(N1UniquenessCheck, ChannelEqualityForcesPhaseEquality) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(derive_seed(18, 0, seed));
    const std::size_t d = 1 + seed % 4;
    const CMatrix k1 = random_unitary(d, rng);
    const CMatrix l1 =
        seed % 2 ? random_unitary(d, rng) : std::polar(1.0, 6.0 * rng.uniform()) * k1;
    const bool same_channel = channels_equal(KrausSet({k1}), KrausSet({l1}), 1e-9);
    const N1Check c = n1_uniqueness_check(k1, l1);
    EXPECT_EQ(same_channel, c.verdict == N1Verdict::kEqualUpToPhase) << "seed " << seed;
  }
}

TEST(N1UniquenessCheck, Errors) {
  EXPECT_THROW(n1_uniqueness_check(CMatrix(2, 3), kI), ShapeError);
  EXPECT_THROW(n1_uniqueness_check(kI, CMatrix::identity(3)), ShapeError);
  try {
    n1_uniqueness_check(kP0, kI);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("completeness"), std::string::npos);
  }
}

TEST(WitnessCandidates, SpanOperatorSpace) {
  for (std::size_t d = 1; d <= 4; ++d) {
    const auto cands = witness_candidates(d);
    ASSERT_EQ(cands.size(), d * d);
    // Real-linear independence of the d² Hermitian candidates: Gram matrix of
    // the Hilbert–Schmidt inner products is nonsingular.
    CMatrix g(d * d, d * d);
    for (std::size_t a = 0; a < d * d; ++a)
      for (std::size_t b = 0; b < d * d; ++b) g(a, b) = hs_inner(cands[a].mat(), cands[b].mat());
    EXPECT_GT(hermitian_eigenvalues(g).front(), 1e-6) << "d=" << d;
  }
}

TEST(N1CovarianceSearch, IdentityFindsNoViolation) {
  N1SearchOptions opts;
  opts.trials = 1000;
  opts.seed = 5;
  const N1SearchReport r = n1_covariance_search(kI, FrameTransform::identity(2), opts);
  EXPECT_EQ(r.sampled, 1000u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.cross_check_failures, 0u);
  EXPECT_GT(r.min_noncovariant_residual, opts.tol);
}

TEST(N1CovarianceSearch, MinimizationConvergesToCovariantSolution) {
  N1SearchOptions opts;
  opts.trials = 50;
  opts.seed = 9;
  const CMatrix k1 = random_unitary(3, 100);
  const FrameTransform f(random_unitary(3, 101));
  const N1SearchReport r = n1_covariance_search(k1, f, opts);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.cross_check_failures, 0u);
  // The descent drives the residual far below the random-sample level, and
  // whatever it reaches stays phase-equivalent to ΛK₁Λ†.
  EXPECT_LT(r.best_minimized_residual, 1e-3);
  EXPECT_GT(r.min_noncovariant_residual, opts.tol);
}

TEST(N1CovarianceSearch, ScalarCaseHasNoViolations) {
  N1SearchOptions opts;
  opts.trials = 200;
  const N1SearchReport r = n1_covariance_search(CMatrix{{std::polar(1.0, 0.4)}}, FrameTransform::identity(1), opts);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.compatible, r.evaluations);
  EXPECT_TRUE(std::isinf(r.min_noncovariant_residual));
}

TEST(N1CovarianceSearch, Deterministic) {
  N1SearchOptions opts;
  opts.trials = 20;
  opts.seed = 77;
  opts.restarts = 2;
  const CMatrix k1 = random_unitary(2, 1);
  const FrameTransform f(random_unitary(2, 2));
  const auto a = n1_covariance_search(k1, f, opts);
  const auto b = n1_covariance_search(k1, f, opts);
  EXPECT_EQ(a.min_residual, b.min_residual);
  EXPECT_EQ(a.best_minimized_residual, b.best_minimized_residual);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(N1CovarianceSearch, RejectsNonUnitary) {
  EXPECT_THROW(n1_covariance_search(kP0, FrameTransform::identity(2), {}), DomainError);
}

TEST(ExtractMixing, IdentityAndHadamard) {
  const KrausSet k = random_kraus(2, 3, 50);
  const auto v = extract_mixing(k, k);
  ASSERT_TRUE(v.has_value());
  EXPECT_LE(frobenius_distance(v->matrix(), CMatrix::identity(3)), 1e-10);

  const auto h = extract_mixing(phase_damping(), KrausSet({kP0, kP1}, true));
  ASSERT_TRUE(h.has_value());
  EXPECT_LE(frobenius_distance(h->matrix(), kH), 1e-10);
}

TEST(ExtractMixing, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(derive_seed(19, 0, seed));
    const std::size_t n = 2 + seed % 4;
    const std::size_t d = 2 + (seed / 4) % 3;
    if (n > d * d) continue;
    const KrausSet k = random_kraus(d, n, rng);
    const MixingUnitary v0(random_unitary(n, rng));
    const auto v = extract_mixing(k, mix_kraus(k, v0));
    ASSERT_TRUE(v.has_value()) << "seed " << seed;
    EXPECT_LE(frobenius_distance(v->matrix(), v0.matrix()), 1e-8) << "seed " << seed;
  }
}

TEST(ExtractMixing, DependentOperatorsGiveNone) {
  // Five operators in a four-dimensional operator space.
  const KrausSet k = random_kraus(2, 5, 60);
  EXPECT_FALSE(extract_mixing(k, mix_kraus(k, MixingUnitary(random_unitary(5, 61)))).has_value());
  const KrausSet dup({kS * kI, kS * kI}, true);
  EXPECT_FALSE(extract_mixing(dup, dup).has_value());
}

TEST(ExtractMixing, Errors) {
  EXPECT_THROW(extract_mixing(phase_damping(), KrausSet({kI}, true)), ShapeError);
  EXPECT_THROW(extract_mixing(phase_damping(), KrausSet({kS * kI, kS * kX}, true)), DomainError);
}

}  // namespace
}  // namespace covchan
