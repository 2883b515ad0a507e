#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "covchan/covariance.hpp"

namespace covchan {

enum class Target { kSubsystemA, kSubsystemB, kJoint };
std::string_view to_string(Target t);

/// K ⊗ I_B, I_A ⊗ K, or K itself, as a set on the joint d_A·d_B space.
KrausSet embed_local(const KrausSet& k, Target target, std::size_t dim_a, std::size_t dim_b);

/// How the frame-S' account represents an intervention.
struct CovariantChoice {};
using FrameChoice = std::variant<CovariantChoice, MixingUnitary, KrausSet>;

/// One selective intervention. `kraus` is the full trace-preserving set;
/// `branches` partitions its indices into outcomes (singletons by default).
/// An explicit frame-S' set is given at the same local level as `kraus` and
/// shares its branch partition.
struct Intervention {
  std::string label;
  KrausSet kraus;
  Target target = Target::kJoint;
  std::vector<std::vector<std::size_t>> branches;
  FrameChoice frame_choice = CovariantChoice{};
};

struct ScenarioConfig {
  std::size_t dim_a = 2;
  std::size_t dim_b = 2;
  DensityMatrix initial_state;
  std::vector<Intervention> interventions;
  FrameTransform frame;
  double tol = kDefaultTolerance;
};

/// Probabilities below this report a null post-measurement state.
inline constexpr double kNullBranchProbability = 1e-12;

struct BranchRecord {
  double prob_s = 0.0;
  double prob_sprime = 0.0;
  /// Post-measurement state given this outcome, renormalized; nullopt when
  /// the branch probability is ≤ kNullBranchProbability.
  std::optional<DensityMatrix> state_s;
  std::optional<DensityMatrix> state_sprime;
};

struct InterventionRecord {
  std::string label;
  std::vector<BranchRecord> branches;
  /// Embedded frame-S set against the frame-S' set actually used.
  CovarianceReport report;
};

/// Probability of one full outcome sequence (one branch per intervention).
struct OutcomeRecord {
  std::vector<std::size_t> outcome;
  double prob_s = 0.0;
  double prob_sprime = 0.0;
};

struct ScenarioResult {
  std::vector<InterventionRecord> interventions;
  std::vector<OutcomeRecord> joint;
  DensityMatrix final_s;
  DensityMatrix final_sprime;
  /// max |p_S − p_S'| over every branch and every joint outcome.
  double probability_defect = 0.0;
  /// ‖ρ'_f − Λρ_fΛ†‖_F.
  double state_defect = 0.0;
  double covariance_defect = 0.0;
  bool covariant = true;
};

/// Runs both frame accounts. Frame S evolves ρ through the interventions;
/// frame S' evolves ΛρΛ† through each intervention's frame-S' set. Throws
/// ShapeError on inconsistent dimensions and DomainError when an
/// intervention's branches are not a complete partition.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

}  // namespace covchan
