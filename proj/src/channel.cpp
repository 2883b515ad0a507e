#include "covchan/channel.hpp"

#include <algorithm>
#include <cmath>

namespace covchan {

namespace {

void require_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw ShapeError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
}

}  // namespace

DensityMatrix::DensityMatrix(CMatrix mat, double tol) : mat_(std::move(mat)) {
  if (!mat_.square()) throw ShapeError("DensityMatrix: matrix is not square");
  const double herm = hermiticity_defect(mat_);
  if (herm > tol) throw DomainError("DensityMatrix: not Hermitian (defect " + std::to_string(herm) + ")");
  const double tr = trace(mat_).real();
  if (std::abs(tr - 1.0) > tol)
    throw DomainError("DensityMatrix: trace " + std::to_string(tr) + " differs from 1");
  const auto ev = hermitian_eigenvalues(mat_);
  if (ev.front() < -tol)
    throw DomainError("DensityMatrix: negative eigenvalue " + std::to_string(ev.front()));
}

DensityMatrix DensityMatrix::pure(std::span<const Complex> amplitudes) {
  CMatrix psi(amplitudes.size(), 1, {amplitudes.begin(), amplitudes.end()});
  return DensityMatrix(matmul(psi, dagger(psi)));
}

KrausSet::KrausSet(std::vector<CMatrix> ops, bool trace_preserving)
    : ops_(std::move(ops)), trace_preserving_(trace_preserving) {
  if (ops_.empty()) throw ShapeError("KrausSet: at least one operator is required");
  const std::size_t d = ops_.front().rows();
  for (const auto& k : ops_) {
    if (!k.square() || k.rows() != d) throw ShapeError("KrausSet: operators must all be square and " +
                                                       std::to_string(d) + "x" + std::to_string(d));
  }
  if (trace_preserving_) {
    const double defect = completeness_defect(*this);
    if (defect > kCompletenessTolerance)
      throw DomainError("KrausSet: completeness defect " + std::to_string(defect) +
                        " exceeds tolerance for a trace-preserving set");
  }
}

CMatrix vec(const CMatrix& k) {
  const std::size_t r = k.rows();
  CMatrix v(r * k.cols(), 1);
  for (std::size_t j = 0; j < k.cols(); ++j)
    for (std::size_t i = 0; i < r; ++i) v(i + j * r, 0) = k(i, j);
  return v;
}

CMatrix apply_kraus(const KrausSet& k, const CMatrix& m) {
  if (!m.square()) throw ShapeError("apply_kraus: operand is not square");
  require_dim(k.dim(), m.rows(), "apply_kraus");
  CMatrix out(m.rows(), m.cols());
  for (const auto& op : k.ops()) out += matmul(matmul(op, m), dagger(op));
  return out;
}

DensityMatrix apply_channel(const KrausSet& k, const DensityMatrix& rho) {
  require_dim(k.dim(), rho.dim(), "apply_channel");
  if (!k.trace_preserving())
    throw DomainError("apply_channel: Kraus set is not flagged trace-preserving; use apply_kraus");
  // Output of a CPTP map on a valid state; the looser check absorbs roundoff.
  return DensityMatrix(apply_kraus(k, rho.mat()), 1e-8);
}

double completeness_defect(const KrausSet& k) {
  CMatrix sum(k.dim(), k.dim());
  for (const auto& op : k.ops()) sum += matmul(dagger(op), op);
  return frobenius_distance(sum, CMatrix::identity(k.dim()));
}

ChoiMatrix choi_matrix(const KrausSet& k) {
  const std::size_t d = k.dim();
  CMatrix choi(d * d, d * d);
  for (const auto& op : k.ops()) choi += matmul(vec(op), dagger(vec(op)));
  return {std::move(choi), d};
}

double choi_distance(const KrausSet& k, const KrausSet& l) {
  require_dim(k.dim(), l.dim(), "channels_equal");
  return frobenius_distance(choi_matrix(k).mat(), choi_matrix(l).mat());
}

bool channels_equal(const KrausSet& k, const KrausSet& l, double tol) {
  return choi_distance(k, l) <= tol;
}

std::vector<CMatrix> apply_to_matrix_units(const KrausSet& k) {
  const std::size_t d = k.dim();
  std::vector<CMatrix> images;
  images.reserve(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) images.push_back(apply_kraus(k, CMatrix::unit(d, i, j)));
  return images;
}

double max_entry_difference(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  if (a.size() != b.size()) throw ShapeError("max_entry_difference: list lengths differ");
  double worst = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (a[n].rows() != b[n].rows() || a[n].cols() != b[n].cols())
      throw ShapeError("max_entry_difference: shape mismatch");
    const auto ea = a[n].entries();
    const auto eb = b[n].entries();
    for (std::size_t e = 0; e < ea.size(); ++e) worst = std::max(worst, std::abs(ea[e] - eb[e]));
  }
  return worst;
}

KrausSet random_kraus(std::size_t d, std::size_t n, Rng& rng) {
  if (d == 0 || n == 0) throw DomainError("random_kraus: dimension and rank must be positive");
  std::vector<CMatrix> ops;
  ops.reserve(n);
  CMatrix s(d, d);
  for (std::size_t a = 0; a < n; ++a) {
    ops.push_back(ginibre(d, d, rng));
    s += matmul(dagger(ops.back()), ops.back());
  }
  const CMatrix scale = inverse_sqrt_psd(s);
  for (auto& op : ops) op = matmul(op, scale);
  return KrausSet(std::move(ops), true);
}

KrausSet random_kraus(std::size_t d, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return random_kraus(d, n, rng);
}

CMatrix gram_matrix(const KrausSet& k) {
  const std::size_t n = k.rank();
  CMatrix g(n, n);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t c = 0; c < n; ++c) g(b, c) = hs_inner(k[b], k[c]);
  return g;
}

}  // namespace covchan
