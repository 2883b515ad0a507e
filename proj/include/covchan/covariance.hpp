#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>

#include "covchan/channel.hpp"

namespace covchan {

/// Unitary change of reference frame acting on states and operators.
class FrameTransform {
 public:
  static constexpr double kTolerance = 1e-10;
  explicit FrameTransform(CMatrix lambda, double tol = kTolerance);
  static FrameTransform identity(std::size_t d) { return FrameTransform(CMatrix::identity(d)); }

  const CMatrix& matrix() const { return lambda_; }
  std::size_t dim() const { return lambda_.rows(); }

 private:
  CMatrix lambda_;
};

/// N×N unitary V acting on the Kraus index: L_A = Σ_B V_AB K_B.
class MixingUnitary {
 public:
  static constexpr double kTolerance = 1e-10;
  explicit MixingUnitary(CMatrix v, double tol = kTolerance);

  const CMatrix& matrix() const { return v_; }
  std::size_t rank() const { return v_.rows(); }

 private:
  CMatrix v_;
};

enum class Verdict { kCovariant, kNoncovariantCompatible, kIncompatible };
std::string_view to_string(Verdict v);

struct CovarianceReport {
  /// Choi distance between the frame-S map and the pulled-back frame-S' map.
  double residual = 0.0;
  /// max_A ‖L'_A − ΛK_AΛ†‖_F; infinite when the ranks differ. Phase-aligned
  /// only for rank-1 pairs.
  double covariant_distance = 0.0;
  bool phase_aligned = false;
  std::size_t rank = 0;
  std::size_t dim = 0;
  Verdict verdict = Verdict::kIncompatible;
};

DensityMatrix transform_state(const DensityMatrix& rho, const FrameTransform& f);

/// Element-wise ΛK_AΛ†, the covariant frame-S' representation of k.
KrausSet conjugate_kraus(const KrausSet& k, const FrameTransform& f);
/// Element-wise Λ†L'_AΛ, pulling a frame-S' set back into frame S.
KrausSet conjugate_kraus_inverse(const KrausSet& lprime, const FrameTransform& f);

/// Choi distance between k and the pull-back of lprime. Zero exactly when
/// Σ K_A ρ K_A† = Σ Λ†L'_AΛ ρ Λ†L'_A†Λ for every ρ.
double compatibility_residual(const KrausSet& k, const KrausSet& lprime, const FrameTransform& f);

/// Raw max_A ‖L'_A − ΛK_AΛ†‖_F (infinity on rank mismatch).
double covariant_distance(const KrausSet& k, const KrausSet& lprime, const FrameTransform& f);

KrausSet mix_kraus(const KrausSet& k, const MixingUnitary& v);

/// mix_kraus(conjugate_kraus(k, f), v): compatible with k in every frame,
/// and noncovariant unless v is a phased permutation.
KrausSet make_noncovariant_solution(const KrausSet& k, const FrameTransform& f, const MixingUnitary& v);

CovarianceReport analyze(const KrausSet& k, const KrausSet& lprime, const FrameTransform& f,
                         double tol = kDefaultTolerance);

/// Optimal global phase c (|c| = 1) aligning b to a, and ‖b − c·a‖_F.
struct PhaseAlignment {
  Complex phase{1.0, 0.0};
  double distance = 0.0;
};
PhaseAlignment align_phase(const CMatrix& a, const CMatrix& b);

/// min over permutations π and phases of ‖V − phase·P_π‖_F. Exact for
/// N ≤ 16 (bitmask assignment); a lower bound via row argmax above that.
double distance_to_phase_permutation(const CMatrix& v);

enum class N1Verdict { kEqualUpToPhase, kDifferent };
std::string_view to_string(N1Verdict v);

struct N1Check {
  N1Verdict verdict = N1Verdict::kDifferent;
  PhaseAlignment alignment;
  /// Present when verdict is kDifferent: the candidate state maximizing
  /// ‖K₁ρK₁† − L₁ρL₁†‖_F.
  std::optional<DensityMatrix> witness;
  double witness_distance = 0.0;
};

/// Decides whether two single-operator channels coincide, i.e. whether
/// L₁ = c·K₁ for a unit-modulus c. Throws DomainError when either operator
/// is farther than tol from unitary.
///
/// The witness scan covers |i⟩⟨i|, |i+j⟩ and |i+ij⟩ projectors for i < j.
/// Their span is the full operator space, so a map that vanishes on all of
/// them vanishes identically.
N1Check n1_uniqueness_check(const CMatrix& k1, const CMatrix& l1, double tol = kDefaultTolerance);

std::vector<DensityMatrix> witness_candidates(std::size_t d);

struct N1SearchOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double tol = kDefaultTolerance;
  /// Candidates farther than this (phase-aligned) from ΛK₁Λ† count as
  /// noncovariant.
  double phase_threshold = 1e-6;
  std::size_t restarts = 8;
  std::size_t max_sweeps = 200;
};

struct N1SearchReport {
  std::size_t sampled = 0;
  std::size_t restarts = 0;
  std::size_t evaluations = 0;
  /// Candidates with residual ≤ tol.
  std::size_t compatible = 0;
  /// Compatible candidates that n1_uniqueness_check did not confirm.
  std::size_t cross_check_failures = 0;
  /// Compatible candidates farther than phase_threshold from ΛK₁Λ†.
  std::size_t violations = 0;
  double min_residual = std::numeric_limits<double>::infinity();
  /// Smallest residual among noncovariant candidates (infinite if none).
  double min_noncovariant_residual = std::numeric_limits<double>::infinity();
  /// Final residual of the best local minimization run.
  double best_minimized_residual = std::numeric_limits<double>::infinity();
};

/// Looks for a frame-S' unitary L'₁ that reproduces {K₁} after pull-back but
/// is not phase-equivalent to ΛK₁Λ†. Random Haar candidates are followed by
/// random-restart coordinate descent on U(d), stepping along Hermitian
/// generators. Deterministic in (inputs, options).
N1SearchReport n1_covariance_search(const CMatrix& k1, const FrameTransform& f,
                                    const N1SearchOptions& options);

/// Recovers V with L_A = Σ_B V_AB K_B via Gram-matrix overlaps. Returns
/// nullopt when the K_A are linearly dependent (smallest Gram eigenvalue
/// ≤ 1e-8) or the recovered V fails the reconstruction or unitarity checks.
/// Throws ShapeError on rank mismatch, DomainError when the channels differ.
std::optional<MixingUnitary> extract_mixing(const KrausSet& k, const KrausSet& l,
                                            double tol = kDefaultTolerance);

inline constexpr double kGramSingularity = 1e-8;

}  // namespace covchan
