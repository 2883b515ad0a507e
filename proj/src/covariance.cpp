#include "covchan/covariance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace covchan {

namespace {

void require_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw ShapeError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
}

CMatrix conjugate(const CMatrix& u, const CMatrix& m) { return matmul(matmul(u, m), dagger(u)); }

/// Hermitian basis of d×d matrices: E_ii, E_ij + E_ji, i(E_ji − E_ij).
std::vector<CMatrix> hermitian_generators(std::size_t d) {
  std::vector<CMatrix> gens;
  gens.reserve(d * d);
  for (std::size_t i = 0; i < d; ++i) gens.push_back(CMatrix::unit(d, i, i));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      CMatrix sym(d, d);
      sym(i, j) = 1.0;
      sym(j, i) = 1.0;
      gens.push_back(std::move(sym));
      CMatrix asym(d, d);
      asym(i, j) = Complex{0.0, -1.0};
      asym(j, i) = Complex{0.0, 1.0};
      gens.push_back(std::move(asym));
    }
  }
  return gens;
}

}  // namespace

FrameTransform::FrameTransform(CMatrix lambda, double tol) : lambda_(std::move(lambda)) {
  if (!lambda_.square()) throw ShapeError("FrameTransform: matrix is not square");
  const double defect = unitarity_defect(lambda_);
  if (defect > tol)
    throw DomainError("FrameTransform: not unitary (defect " + std::to_string(defect) + ")");
}

MixingUnitary::MixingUnitary(CMatrix v, double tol) : v_(std::move(v)) {
  if (!v_.square()) throw ShapeError("MixingUnitary: matrix is not square");
  const double defect = unitarity_defect(v_);
  if (defect > tol)
    throw DomainError("MixingUnitary: not unitary (defect " + std::to_string(defect) + ")");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kCovariant:
      return "COVARIANT";
    case Verdict::kNoncovariantCompatible:
      return "NONCOVARIANT_COMPATIBLE";
    case Verdict::kIncompatible:
      return "INCOMPATIBLE";
  }
  return "?";
}

std::string_view to_string(N1Verdict v) {
  return v == N1Verdict::kEqualUpToPhase ? "EQUAL_UP_TO_PHASE" : "DIFFERENT";
}

DensityMatrix transform_state(const DensityMatrix& rho, const FrameTransform& f) {
  require_dim(rho.dim(), f.dim(), "transform_state");
  return DensityMatrix(conjugate(f.matrix(), rho.mat()));
}

KrausSet conjugate_kraus(const KrausSet& k, const FrameTransform& f) {
  require_dim(k.dim(), f.dim(), "conjugate_kraus");
  std::vector<CMatrix> ops;
  ops.reserve(k.rank());
  for (const auto& op : k.ops()) ops.push_back(conjugate(f.matrix(), op));
  return KrausSet(std::move(ops), k.trace_preserving());
}

KrausSet conjugate_kraus_inverse(const KrausSet& lprime, const FrameTransform& f) {
  require_dim(lprime.dim(), f.dim(), "conjugate_kraus_inverse");
  const CMatrix inv = dagger(f.matrix());
  std::vector<CMatrix> ops;
  ops.reserve(lprime.rank());
  for (const auto& op : lprime.ops()) ops.push_back(conjugate(inv, op));
  return KrausSet(std::move(ops), lprime.trace_preserving());
}

double compatibility_residual(const KrausSet& k, const KrausSet& lprime, const FrameTransform& f) {
  require_dim(k.dim(), lprime.dim(), "compatibility_residual");
  require_dim(k.dim(), f.dim(), "compatibility_residual");
  return choi_distance(k, conjugate_kraus_inverse(lprime, f));
}

double covariant_distance(const KrausSet& k, const KrausSet& lprime, const FrameTransform& f) {
  require_dim(k.dim(), lprime.dim(), "covariant_distance");
  if (k.rank() != lprime.rank()) return std::numeric_limits<double>::infinity();
  const KrausSet covariant = conjugate_kraus(k, f);
  double worst = 0.0;
  for (std::size_t a = 0; a < k.rank(); ++a)
    worst = std::max(worst, frobenius_distance(lprime[a], covariant[a]));
  return worst;
}

KrausSet mix_kraus(const KrausSet& k, const MixingUnitary& v) {
  if (v.rank() != k.rank())
    throw ShapeError("mix_kraus: mixing rank " + std::to_string(v.rank()) + " differs from Kraus rank " +
                     std::to_string(k.rank()));
  const CMatrix& m = v.matrix();
  std::vector<CMatrix> ops;
  ops.reserve(k.rank());
  for (std::size_t a = 0; a < k.rank(); ++a) {
    CMatrix sum(k.dim(), k.dim());
    for (std::size_t b = 0; b < k.rank(); ++b) sum += m(a, b) * k[b];
    ops.push_back(std::move(sum));
  }
  return KrausSet(std::move(ops), k.trace_preserving());
}

KrausSet make_noncovariant_solution(const KrausSet& k, const FrameTransform& f, const MixingUnitary& v) {
  if (v.rank() != k.rank()) throw ShapeError("make_noncovariant_solution: rank mismatch");
  return mix_kraus(conjugate_kraus(k, f), v);
}

CovarianceReport analyze(const KrausSet& k, const KrausSet& lprime, const FrameTransform& f, double tol) {
  CovarianceReport report;
  report.dim = k.dim();
  report.rank = k.rank();
  report.residual = compatibility_residual(k, lprime, f);
  if (k.rank() == 1 && lprime.rank() == 1) {
    report.covariant_distance = align_phase(conjugate(f.matrix(), k[0]), lprime[0]).distance;
    report.phase_aligned = true;
  } else {
    report.covariant_distance = covariant_distance(k, lprime, f);
  }
  if (report.residual > tol)
    report.verdict = Verdict::kIncompatible;
  else if (report.covariant_distance <= tol)
    report.verdict = Verdict::kCovariant;
  else
    report.verdict = Verdict::kNoncovariantCompatible;
  return report;
}

PhaseAlignment align_phase(const CMatrix& a, const CMatrix& b) {
  const Complex overlap = hs_inner(a, b);
  const double mag = std::abs(overlap);
  PhaseAlignment out;
  out.phase = mag > 0.0 ? overlap / mag : Complex{1.0, 0.0};
  out.distance = frobenius_distance(b, out.phase * a);
  return out;
}

double distance_to_phase_permutation(const CMatrix& v) {
  if (!v.square()) throw ShapeError("distance_to_phase_permutation: matrix is not square");
  const std::size_t n = v.rows();
  // ‖V − DP‖² = ‖V‖² + n − 2·Σ_r |V_{r,π(r)}| once each phase is matched.
  double best_assignment = 0.0;
  if (n <= 16) {
    const std::size_t full = std::size_t{1} << n;
    std::vector<double> best(full, -1.0);
    best[0] = 0.0;
    for (std::size_t mask = 0; mask < full; ++mask) {
      if (best[mask] < 0.0) continue;
      const auto row = static_cast<std::size_t>(std::popcount(mask));
      if (row == n) continue;
      for (std::size_t col = 0; col < n; ++col) {
        if (mask & (std::size_t{1} << col)) continue;
        const std::size_t next = mask | (std::size_t{1} << col);
        best[next] = std::max(best[next], best[mask] + std::abs(v(row, col)));
      }
    }
    best_assignment = best[full - 1];
  } else {
    for (std::size_t r = 0; r < n; ++r) {
      double m = 0.0;
      for (std::size_t c = 0; c < n; ++c) m = std::max(m, std::abs(v(r, c)));
      best_assignment += m;
    }
  }
  const double norm = frobenius_norm(v);
  return std::sqrt(std::max(0.0, norm * norm + static_cast<double>(n) - 2.0 * best_assignment));
}

std::vector<DensityMatrix> witness_candidates(std::size_t d) {
  std::vector<DensityMatrix> out;
  out.reserve(d * d);
  const double h = std::numbers::sqrt2 / 2.0;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<Complex> amp(d);
    amp[i] = 1.0;
    out.push_back(DensityMatrix::pure(amp));
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      std::vector<Complex> plus(d), plus_i(d);
      plus[i] = h;
      plus[j] = h;
      plus_i[i] = h;
      plus_i[j] = Complex{0.0, h};
      out.push_back(DensityMatrix::pure(plus));
      out.push_back(DensityMatrix::pure(plus_i));
    }
  }
  return out;
}

N1Check n1_uniqueness_check(const CMatrix& k1, const CMatrix& l1, double tol) {
  if (!k1.square() || !l1.square()) throw ShapeError("n1_uniqueness_check: operators must be square");
  require_dim(k1.rows(), l1.rows(), "n1_uniqueness_check");
  for (const CMatrix* op : {&k1, &l1}) {
    const double defect = unitarity_defect(*op);
    if (defect > tol)
      throw DomainError("n1_uniqueness_check: single Kraus operator violates completeness (defect " +
                        std::to_string(defect) + ")");
  }
  N1Check out;
  out.alignment = align_phase(k1, l1);
  if (out.alignment.distance <= tol) {
    out.verdict = N1Verdict::kEqualUpToPhase;
    return out;
  }
  out.verdict = N1Verdict::kDifferent;
  for (auto& rho : witness_candidates(k1.rows())) {
    const double dist = frobenius_distance(conjugate(k1, rho.mat()), conjugate(l1, rho.mat()));
    // Near-ties keep the earlier (basis-state) candidate.
    if (!out.witness || dist > out.witness_distance * (1.0 + 1e-12)) {
      out.witness_distance = dist;
      out.witness = std::move(rho);
    }
  }
  return out;
}

N1SearchReport n1_covariance_search(const CMatrix& k1, const FrameTransform& f,
                                    const N1SearchOptions& options) {
  if (!k1.square()) throw ShapeError("n1_covariance_search: K1 must be square");
  require_dim(k1.rows(), f.dim(), "n1_covariance_search");
  const double defect = unitarity_defect(k1);
  if (defect > KrausSet::kCompletenessTolerance)
    throw DomainError("n1_covariance_search: K1 violates completeness (defect " + std::to_string(defect) +
                      ")");

  const std::size_t d = k1.rows();
  const KrausSet k({k1});
  const CMatrix target = conjugate(f.matrix(), k1);
  N1SearchReport report;

  auto evaluate = [&](const CMatrix& candidate) {
    ++report.evaluations;
    const double residual = compatibility_residual(k, KrausSet({candidate}), f);
    const double phase_distance = align_phase(target, candidate).distance;
    report.min_residual = std::min(report.min_residual, residual);
    if (phase_distance > options.phase_threshold)
      report.min_noncovariant_residual = std::min(report.min_noncovariant_residual, residual);
    if (residual <= options.tol) {
      ++report.compatible;
      if (phase_distance > options.phase_threshold) ++report.violations;
      const N1Check check = n1_uniqueness_check(target, candidate, options.phase_threshold);
      if (check.verdict != N1Verdict::kEqualUpToPhase) ++report.cross_check_failures;
    }
    return residual;
  };

  for (std::size_t t = 0; t < options.trials; ++t) {
    evaluate(random_unitary(d, derive_seed(options.seed, 1, t)));
    ++report.sampled;
  }

  const auto generators = hermitian_generators(d);
  for (std::size_t r = 0; r < options.restarts; ++r) {
    ++report.restarts;
    CMatrix current = random_unitary(d, derive_seed(options.seed, 2, r));
    double value = evaluate(current);
    double step = 0.5;
    for (std::size_t sweep = 0; sweep < options.max_sweeps && step > 1e-12; ++sweep) {
      bool improved = false;
      for (const auto& g : generators) {
        for (const double sign : {1.0, -1.0}) {
          CMatrix candidate = matmul(unitary_exp(Complex{sign * step} * g), current);
          const double v = evaluate(candidate);
          if (v < value) {
            value = v;
            current = std::move(candidate);
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    report.best_minimized_residual = std::min(report.best_minimized_residual, value);
  }
  return report;
}

std::optional<MixingUnitary> extract_mixing(const KrausSet& k, const KrausSet& l, double tol) {
  if (k.rank() != l.rank())
    throw ShapeError("extract_mixing: rank mismatch (" + std::to_string(k.rank()) + " vs " +
                     std::to_string(l.rank()) + ")");
  require_dim(k.dim(), l.dim(), "extract_mixing");
  if (!channels_equal(k, l, tol)) throw DomainError("extract_mixing: the Kraus sets define different channels");

  const std::size_t n = k.rank();
  const CMatrix gram = gram_matrix(k);
  if (hermitian_eigenvalues(gram).front() <= kGramSingularity) return std::nullopt;

  // Tr(K_B† L_A) = Σ_C V_AC G_BC, i.e. M = V·Gᵀ, solved as G·Vᵀ = Mᵀ.
  CMatrix overlaps_t(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) overlaps_t(b, a) = hs_inner(k[b], l[a]);
  const CMatrix vt = solve_linear(gram, overlaps_t);
  CMatrix v(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) v(a, b) = vt(b, a);

  if (unitarity_defect(v) > tol) return std::nullopt;
  for (std::size_t a = 0; a < n; ++a) {
    CMatrix rebuilt(k.dim(), k.dim());
    for (std::size_t b = 0; b < n; ++b) rebuilt += v(a, b) * k[b];
    if (frobenius_distance(l[a], rebuilt) > tol * static_cast<double>(n)) return std::nullopt;
  }
  return MixingUnitary(std::move(v), tol);
}

}  // namespace covchan
