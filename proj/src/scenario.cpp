#include "covchan/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace covchan {

namespace {

constexpr std::size_t kMaxOutcomes = 1 << 16;

std::size_t local_dim(Target t, std::size_t dim_a, std::size_t dim_b) {
  switch (t) {
    case Target::kSubsystemA:
      return dim_a;
    case Target::kSubsystemB:
      return dim_b;
    case Target::kJoint:
      return dim_a * dim_b;
  }
  return 0;
}

std::vector<std::vector<std::size_t>> resolve_branches(const Intervention& iv) {
  if (iv.branches.empty()) {
    std::vector<std::vector<std::size_t>> singletons;
    for (std::size_t a = 0; a < iv.kraus.rank(); ++a) singletons.push_back({a});
    return singletons;
  }
  std::vector<int> seen(iv.kraus.rank(), 0);
  for (const auto& b : iv.branches) {
    if (b.empty()) throw DomainError("intervention '" + iv.label + "': empty branch");
    for (auto a : b) {
      if (a >= seen.size())
        throw DomainError("intervention '" + iv.label + "': branch index " + std::to_string(a) + " out of range");
      ++seen[a];
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
    throw DomainError("intervention '" + iv.label + "': branches must partition the Kraus indices");
  return iv.branches;
}

void require_complete(const KrausSet& k, const std::string& what) {
  const double defect = completeness_defect(k);
  if (defect > KrausSet::kCompletenessTolerance)
    throw DomainError(what + ": branches violate completeness (defect " + std::to_string(defect) + ")");
}

CMatrix apply_branch(const KrausSet& k, const std::vector<std::size_t>& branch, const CMatrix& m) {
  CMatrix out(m.rows(), m.cols());
  for (auto a : branch) out += matmul(matmul(k[a], m), dagger(k[a]));
  return out;
}

std::optional<DensityMatrix> renormalized(const CMatrix& m, double p) {
  if (p <= kNullBranchProbability) return std::nullopt;
  return DensityMatrix((1.0 / p) * m, 1e-8);
}

struct Partial {
  std::vector<std::size_t> outcome;
  CMatrix state_s;
  CMatrix state_sprime;
};

}  // namespace

std::string_view to_string(Target t) {
  switch (t) {
    case Target::kSubsystemA:
      return "A";
    case Target::kSubsystemB:
      return "B";
    case Target::kJoint:
      return "joint";
  }
  return "?";
}

KrausSet embed_local(const KrausSet& k, Target target, std::size_t dim_a, std::size_t dim_b) {
  const std::size_t expected = local_dim(target, dim_a, dim_b);
  if (k.dim() != expected)
    throw ShapeError("embed_local: operator dimension " + std::to_string(k.dim()) + " does not match target '" +
                     std::string(to_string(target)) + "' dimension " + std::to_string(expected));
  if (target == Target::kJoint) return k;
  std::vector<CMatrix> ops;
  ops.reserve(k.rank());
  for (const auto& op : k.ops()) {
    ops.push_back(target == Target::kSubsystemA ? kron(op, CMatrix::identity(dim_b))
                                                : kron(CMatrix::identity(dim_a), op));
  }
  return KrausSet(std::move(ops), k.trace_preserving());
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  const std::size_t d = cfg.dim_a * cfg.dim_b;
  if (cfg.initial_state.dim() != d)
    throw ShapeError("run_scenario: initial state has dimension " + std::to_string(cfg.initial_state.dim()) +
                     ", expected " + std::to_string(d));
  if (cfg.frame.dim() != d)
    throw ShapeError("run_scenario: frame has dimension " + std::to_string(cfg.frame.dim()) + ", expected " +
                     std::to_string(d));

  const CMatrix& lambda = cfg.frame.matrix();
  std::vector<Partial> partials;
  partials.push_back({{}, cfg.initial_state.mat(), transform_state(cfg.initial_state, cfg.frame).mat()});

  std::vector<InterventionRecord> records;
  for (const auto& iv : cfg.interventions) {
    require_complete(iv.kraus, "intervention '" + iv.label + "'");
    const auto branches = resolve_branches(iv);
    const KrausSet joint_s = embed_local(iv.kraus, iv.target, cfg.dim_a, cfg.dim_b);

    const KrausSet joint_sprime = std::visit(
        [&](const auto& choice) -> KrausSet {
          using T = std::decay_t<decltype(choice)>;
          if constexpr (std::is_same_v<T, CovariantChoice>) {
            return conjugate_kraus(joint_s, cfg.frame);
          } else if constexpr (std::is_same_v<T, MixingUnitary>) {
            return make_noncovariant_solution(joint_s, cfg.frame, choice);
          } else {
            if (choice.rank() != iv.kraus.rank())
              throw ShapeError("intervention '" + iv.label + "': explicit frame-S' set must have rank " +
                               std::to_string(iv.kraus.rank()));
            require_complete(choice, "intervention '" + iv.label + "' (frame S')");
            return embed_local(choice, iv.target, cfg.dim_a, cfg.dim_b);
          }
        },
        iv.frame_choice);

    InterventionRecord rec;
    rec.label = iv.label;
    rec.report = analyze(joint_s, joint_sprime, cfg.frame, cfg.tol);

    CMatrix prior_s(d, d), prior_sprime(d, d);
    for (const auto& p : partials) {
      prior_s += p.state_s;
      prior_sprime += p.state_sprime;
    }
    for (const auto& b : branches) {
      const CMatrix out_s = apply_branch(joint_s, b, prior_s);
      const CMatrix out_sprime = apply_branch(joint_sprime, b, prior_sprime);
      BranchRecord br;
      br.prob_s = trace(out_s).real();
      br.prob_sprime = trace(out_sprime).real();
      br.state_s = renormalized(out_s, br.prob_s);
      br.state_sprime = renormalized(out_sprime, br.prob_sprime);
      rec.branches.push_back(std::move(br));
    }
    records.push_back(std::move(rec));

    if (partials.size() * branches.size() > kMaxOutcomes)
      throw DomainError("run_scenario: more than " + std::to_string(kMaxOutcomes) + " joint outcomes");
    std::vector<Partial> next;
    next.reserve(partials.size() * branches.size());
    for (const auto& p : partials) {
      for (std::size_t bi = 0; bi < branches.size(); ++bi) {
        Partial q{p.outcome, apply_branch(joint_s, branches[bi], p.state_s),
                  apply_branch(joint_sprime, branches[bi], p.state_sprime)};
        q.outcome.push_back(bi);
        next.push_back(std::move(q));
      }
    }
    partials = std::move(next);
  }

  CMatrix final_s(d, d), final_sprime(d, d);
  std::vector<OutcomeRecord> joint;
  joint.reserve(partials.size());
  for (const auto& p : partials) {
    final_s += p.state_s;
    final_sprime += p.state_sprime;
    joint.push_back({p.outcome, trace(p.state_s).real(), trace(p.state_sprime).real()});
  }

  ScenarioResult result{std::move(records), std::move(joint), DensityMatrix(final_s, 1e-8),
                        DensityMatrix(final_sprime, 1e-8)};
  for (const auto& rec : result.interventions)
    for (const auto& br : rec.branches)
      result.probability_defect = std::max(result.probability_defect, std::abs(br.prob_s - br.prob_sprime));
  for (const auto& o : result.joint)
    result.probability_defect = std::max(result.probability_defect, std::abs(o.prob_s - o.prob_sprime));
  result.state_defect =
      frobenius_distance(result.final_sprime.mat(), matmul(matmul(lambda, result.final_s.mat()), dagger(lambda)));
  result.covariance_defect = std::max(result.probability_defect, result.state_defect);
  result.covariant = result.covariance_defect <= cfg.tol;
  return result;
}

}  // namespace covchan
