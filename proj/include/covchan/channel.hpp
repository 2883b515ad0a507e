#pragma once

#include <cstdint>
#include <vector>

#include "covchan/matrix.hpp"

namespace covchan {

inline constexpr double kDefaultTolerance = 1e-9;

/// Hermitian, positive-semidefinite, unit-trace d×d matrix.
class DensityMatrix {
 public:
  static constexpr double kTolerance = 1e-10;

  /// Validates the state invariants at `tol`; throws DomainError otherwise.
  explicit DensityMatrix(CMatrix mat, double tol = kTolerance);

  static DensityMatrix pure(std::span<const Complex> amplitudes);

  const CMatrix& mat() const { return mat_; }
  std::size_t dim() const { return mat_.rows(); }

 private:
  CMatrix mat_;
};

/// Ordered operator-sum representation {K_A}, A = 0..N-1.
///
/// The trace-preserving flag is fixed at construction; when set, the
/// completeness relation Σ K_A†K_A = I is checked to 1e-9. Unflagged sets
/// (e.g. a single selective measurement branch) are accepted as-is.
class KrausSet {
 public:
  static constexpr double kCompletenessTolerance = 1e-9;

  explicit KrausSet(std::vector<CMatrix> ops, bool trace_preserving = false);

  const std::vector<CMatrix>& ops() const { return ops_; }
  const CMatrix& operator[](std::size_t a) const { return ops_[a]; }
  std::size_t dim() const { return ops_.front().rows(); }
  std::size_t rank() const { return ops_.size(); }
  bool trace_preserving() const { return trace_preserving_; }

 private:
  std::vector<CMatrix> ops_;
  bool trace_preserving_;
};

/// d²×d² matrix Σ_A vec(K_A)·vec(K_A)†, vec = column stacking
/// (vec(K)[i + j·d] = K(i, j)).
class ChoiMatrix {
 public:
  ChoiMatrix(CMatrix mat, std::size_t dim) : mat_(std::move(mat)), dim_(dim) {}
  const CMatrix& mat() const { return mat_; }
  std::size_t dim() const { return dim_; }

 private:
  CMatrix mat_;
  std::size_t dim_;
};

/// Column-stacking vectorization as a d²×1 column.
CMatrix vec(const CMatrix& k);

/// Σ_A K_A·m·K_A† for an arbitrary d×d operator m.
CMatrix apply_kraus(const KrausSet& k, const CMatrix& m);

/// Channel application on a state. Requires a trace-preserving set so the
/// result is again a DensityMatrix; use apply_kraus for selective branches.
DensityMatrix apply_channel(const KrausSet& k, const DensityMatrix& rho);

/// ‖Σ_A K_A†K_A − I‖_F.
double completeness_defect(const KrausSet& k);

ChoiMatrix choi_matrix(const KrausSet& k);

/// True iff the Choi matrices agree within `tol` (Frobenius). Ranks may differ.
bool channels_equal(const KrausSet& k, const KrausSet& l, double tol = kDefaultTolerance);
double choi_distance(const KrausSet& k, const KrausSet& l);

/// Images Σ_A K_A E_ij K_A† of every matrix unit, (i, j) row-major.
std::vector<CMatrix> apply_to_matrix_units(const KrausSet& k);

/// Largest entrywise modulus difference between two image lists.
double max_entry_difference(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b);

/// Random trace-preserving set: Ginibre operators G_A rescaled by
/// (Σ G_A†G_A)^{-1/2}.
KrausSet random_kraus(std::size_t d, std::size_t n, std::uint64_t seed);
KrausSet random_kraus(std::size_t d, std::size_t n, Rng& rng);

/// Gram matrix G_BC = Tr(K_B† K_C) of the operators.
CMatrix gram_matrix(const KrausSet& k);

}  // namespace covchan
