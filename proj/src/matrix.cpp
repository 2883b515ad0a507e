#include "covchan/matrix.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <sstream>

namespace covchan {

namespace {

using EMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EMatrix to_eigen(const CMatrix& a) {
  EMatrix m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  return m;
}

template <typename Derived>
CMatrix from_eigen(const Eigen::MatrixBase<Derived>& m) {
  CMatrix a(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a(i, j) = m(i, j);
  return a;
}

void require_same_shape(const CMatrix& a, const CMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

void require_square(const CMatrix& a, const char* what) {
  if (!a.square()) throw ShapeError(std::string(what) + ": matrix is not square");
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

CMatrix::CMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {
  if (rows == 0 || cols == 0) throw ShapeError("CMatrix: dimensions must be positive");
}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows == 0 || cols == 0) throw ShapeError("CMatrix: dimensions must be positive");
  if (data_.size() != rows * cols)
    throw ShapeError("CMatrix: expected " + std::to_string(rows * cols) + " entries, got " +
                     std::to_string(data_.size()));
  for (const auto& z : data_)
    if (!finite(z)) throw DomainError("CMatrix: non-finite entry");
}

CMatrix::CMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  if (rows_ == 0 || cols_ == 0) throw ShapeError("CMatrix: dimensions must be positive");
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("CMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

CMatrix CMatrix::identity(std::size_t d) {
  CMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::zero(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }

CMatrix CMatrix::diag(std::span<const Complex> values) {
  CMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

CMatrix CMatrix::unit(std::size_t d, std::size_t i, std::size_t j) {
  CMatrix m(d, d);
  m(i, j) = 1.0;
  return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(Complex s, CMatrix a) { return a *= s; }
CMatrix operator*(const CMatrix& a, const CMatrix& b) { return matmul(a, b); }

CMatrix matmul(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.rows()) + ")");
  CMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

CMatrix dagger(const CMatrix& a) {
  CMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = std::conj(a(i, j));
  return t;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return k;
}

Complex trace(const CMatrix& a) {
  require_square(a, "trace");
  Complex t{};
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

double frobenius_norm(const CMatrix& a) {
  double s = 0.0;
  for (const auto& z : a.entries()) s += std::norm(z);
  return std::sqrt(s);
}

double frobenius_distance(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "frobenius_distance");
  double s = 0.0;
  const auto ea = a.entries();
  const auto eb = b.entries();
  for (std::size_t k = 0; k < ea.size(); ++k) s += std::norm(ea[k] - eb[k]);
  return std::sqrt(s);
}

Complex hs_inner(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "hs_inner");
  Complex s{};
  const auto ea = a.entries();
  const auto eb = b.entries();
  for (std::size_t k = 0; k < ea.size(); ++k) s += std::conj(ea[k]) * eb[k];
  return s;
}

double unitarity_defect(const CMatrix& a) {
  require_square(a, "unitarity_defect");
  return frobenius_distance(matmul(dagger(a), a), CMatrix::identity(a.rows()));
}

double hermiticity_defect(const CMatrix& a) {
  require_square(a, "hermiticity_defect");
  return frobenius_distance(a, dagger(a));
}

std::vector<double> hermitian_eigenvalues(const CMatrix& a) {
  require_square(a, "hermitian_eigenvalues");
  const EMatrix m = to_eigen(a);
  const EMatrix h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<EMatrix> solver(h, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

CMatrix unitary_exp(const CMatrix& h) {
  require_square(h, "unitary_exp");
  const EMatrix m = to_eigen(h);
  Eigen::SelfAdjointEigenSolver<EMatrix> solver((m + m.adjoint()) / 2.0);
  const auto& vecs = solver.eigenvectors();
  Eigen::VectorXcd phases(vecs.cols());
  for (Eigen::Index k = 0; k < phases.size(); ++k)
    phases(k) = std::polar(1.0, solver.eigenvalues()(k));
  return from_eigen(vecs * phases.asDiagonal() * vecs.adjoint());
}

CMatrix inverse_sqrt_psd(const CMatrix& a) {
  require_square(a, "inverse_sqrt_psd");
  const EMatrix m = to_eigen(a);
  Eigen::SelfAdjointEigenSolver<EMatrix> solver((m + m.adjoint()) / 2.0);
  const auto& vals = solver.eigenvalues();
  if (vals.minCoeff() <= 0.0) throw DomainError("inverse_sqrt_psd: matrix is not positive definite");
  Eigen::VectorXd scale = vals.cwiseSqrt().cwiseInverse();
  const auto& vecs = solver.eigenvectors();
  return from_eigen(vecs * scale.cast<Complex>().asDiagonal() * vecs.adjoint());
}

Complex determinant(const CMatrix& a) {
  require_square(a, "determinant");
  return to_eigen(a).determinant();
}

CMatrix solve_linear(const CMatrix& a, const CMatrix& b) {
  require_square(a, "solve_linear");
  if (a.rows() != b.rows()) throw ShapeError("solve_linear: right-hand side has wrong row count");
  return from_eigen(to_eigen(a).partialPivLu().solve(to_eigen(b)));
}

// ---------------------------------------------------------------------------

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(mix64(master) ^ stream) ^ index);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) {
    x = mix64(x);
    s = x;
  }
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

CMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  CMatrix g(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
  return g;
}

CMatrix random_unitary(std::size_t d, Rng& rng) {
  if (d == 0) throw DomainError("random_unitary: dimension must be positive");
  const EMatrix g = to_eigen(ginibre(d, d, rng));
  Eigen::HouseholderQR<EMatrix> qr(g);
  EMatrix q = qr.householderQ();
  const EMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t k = 0; k < d; ++k) {
    const Complex rkk = r(k, k);
    const double mag = std::abs(rkk);
    const Complex phase = mag > 0.0 ? rkk / mag : Complex{1.0, 0.0};
    q.col(k) *= phase;
  }
  return from_eigen(q);
}

CMatrix random_unitary(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return random_unitary(d, rng);
}

CMatrix random_density(std::size_t d, Rng& rng) {
  if (d == 0) throw DomainError("random_density: dimension must be positive");
  const CMatrix g = ginibre(d, d, rng);
  CMatrix rho = matmul(g, dagger(g));
  const double tr = trace(rho).real();
  rho *= 1.0 / tr;
  // Exact Hermiticity: average with the adjoint so dagger(rho) == rho bitwise.
  for (std::size_t i = 0; i < d; ++i) {
    rho(i, i) = rho(i, i).real();
    for (std::size_t j = i + 1; j < d; ++j) {
      const Complex v = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
      rho(i, j) = v;
      rho(j, i) = std::conj(v);
    }
  }
  return rho;
}

CMatrix random_density(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return random_density(d, rng);
}

std::string to_string(const CMatrix& a) {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    os << (i == 0 ? "[[" : " [");
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) os << ", ";
      os << a(i, j).real() << (a(i, j).imag() < 0 ? "-" : "+") << std::abs(a(i, j).imag()) << "i";
    }
    os << (i + 1 == a.rows() ? "]]" : "]\n");
  }
  return os.str();
}

}  // namespace covchan
