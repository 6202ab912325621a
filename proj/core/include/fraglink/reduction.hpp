#pragma once

// Elimination of non-decision states (states with a single action) from an
// SSP model. The eliminated states are folded into the transitions and costs
// of the remaining ones through the fundamental matrix of the eliminated
// block.

#include <optional>
#include <vector>

#include "fraglink/chain.hpp"
#include "fraglink/graph.hpp"
#include "fraglink/ssp.hpp"

namespace fraglink {

struct ReducedSsp {
  /// Model over the decision states; the target stays last.
  SspModel model;
  /// The model that was reduced.
  SspModel original;
  /// Reduced index -> original state.
  std::vector<StateId> decision;
  /// Original state -> reduced index, npos for eliminated states.
  std::vector<StateId> reduced_index;
  /// Eliminated original states, in the row order of the blocks below.
  std::vector<StateId> eliminated;

  // Row-oriented blocks: row k is eliminated state eliminated[k].
  /// Transitions among eliminated states (R0).
  Matrix transient_block;
  /// Transitions from eliminated to decision states (Q0).
  Matrix exit_block;
  /// (I - R0)^{-1} Q0: where a walk started in an eliminated state first
  /// lands among the decision states. Rows sum to one.
  Matrix absorption;
  /// (I - R0)^{-1} g: expected cost collected before that landing.
  Vector folded_cost;

  /// Values on every original state from values on the decision states.
  ValueFunction lift(const ValueFunction& reduced_values) const;
  /// Original policy agreeing with `reduced` on decision states.
  Policy lift_policy(const Policy& reduced) const;
  Policy restrict_policy(const Policy& full) const;
  /// Return time of the optimized node, read through the original model.
  double return_time(const ValueFunction& reduced_values) const;
};

/// Replaces every transition cost by the expected cost of its action.
SspModel cost_to_state_action(const SspModel& m);

/// Throws ImproperStructureError when some eliminated state never reaches a
/// decision state.
ReducedSsp reduce(const SspModel& m);

/// Reduction of the refined model of (g, v). Without fragile nodes only the
/// fragile-link states and the target remain (d + 1 states).
ReducedSsp reduce_max_pagerank(const DiGraph& g, NodeId v,
                               const std::optional<Personalization>& pers = std::nullopt,
                               DanglingRule rule = DanglingRule::None);

}  // namespace fraglink
