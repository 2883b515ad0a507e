#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace covchan {

using Complex = std::complex<double>;

/// Raised when operand shapes (rows, cols, ranks, dims) do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a value violates a domain precondition (non-unitary frame,
/// incomplete Kraus set, zero dimension, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Dense complex matrix stored row-major. Every entry is finite.
class CMatrix {
 public:
  CMatrix(std::size_t rows, std::size_t cols);
  CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  /// Row-wise literal, e.g. CMatrix{{0, 1}, {1, 0}}.
  CMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static CMatrix identity(std::size_t d);
  static CMatrix zero(std::size_t rows, std::size_t cols);
  static CMatrix diag(std::span<const Complex> values);
  /// Matrix unit E_ij of size d×d.
  static CMatrix unit(std::size_t d, std::size_t i, std::size_t j);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const Complex> entries() const { return data_; }

  CMatrix& operator+=(const CMatrix& other);
  CMatrix& operator-=(const CMatrix& other);
  CMatrix& operator*=(Complex s);

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Complex> data_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(Complex s, CMatrix a);
CMatrix operator*(const CMatrix& a, const CMatrix& b);

CMatrix matmul(const CMatrix& a, const CMatrix& b);
CMatrix dagger(const CMatrix& a);
CMatrix kron(const CMatrix& a, const CMatrix& b);
Complex trace(const CMatrix& a);
double frobenius_norm(const CMatrix& a);
double frobenius_distance(const CMatrix& a, const CMatrix& b);
/// Hilbert–Schmidt inner product Tr(a† b).
Complex hs_inner(const CMatrix& a, const CMatrix& b);

/// ‖a†a − I‖_F for square a.
double unitarity_defect(const CMatrix& a);
/// ‖a − a†‖_F for square a.
double hermiticity_defect(const CMatrix& a);

/// Eigenvalues of the Hermitian part of a, ascending.
std::vector<double> hermitian_eigenvalues(const CMatrix& a);
/// exp(i·h) for Hermitian h, via the spectral decomposition.
CMatrix unitary_exp(const CMatrix& h);
/// Inverse square root of a Hermitian positive-definite matrix.
CMatrix inverse_sqrt_psd(const CMatrix& a);
Complex determinant(const CMatrix& a);
/// Solves a·x = b for square non-singular a (partial-pivot LU).
CMatrix solve_linear(const CMatrix& a, const CMatrix& b);

// ---------------------------------------------------------------------------
// Seeded sampling
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer; the building block of every derived stream.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based stream derivation: the seed for trial `index` of stream
/// `stream` under `master`. Independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

/// xoshiro256** with a Box–Muller normal. Output is identical across
/// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double normal();
  /// Standard complex normal, E|z|² = 1.
  Complex complex_normal();

 private:
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

CMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng);

/// Haar-random d×d unitary: QR of a complex Ginibre matrix with the
/// R-diagonal phases folded back into Q.
CMatrix random_unitary(std::size_t d, std::uint64_t seed);
CMatrix random_unitary(std::size_t d, Rng& rng);

/// G·G†/Tr(G·G†) for complex Ginibre G.
CMatrix random_density(std::size_t d, std::uint64_t seed);
CMatrix random_density(std::size_t d, Rng& rng);

std::string to_string(const CMatrix& a);

}  // namespace covchan
