#pragma once

// Linear programs whose optimum is the optimal cost-to-go of an SSP model:
// x_s <= sum_j p(j|s,u) [g(s,u,j) + x_j] for every state s and action u,
// maximizing sum_s x_s. The target value is substituted by zero.
//
// Variable names: x_<label> for graph nodes, the start state and generic
// states, xf_<i>_<j> for fragile-link states, xh_<i> for damping states and
// x_q for the teleportation state.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fraglink/chain.hpp"
#include "fraglink/graph.hpp"
#include "fraglink/ssp.hpp"

namespace fraglink {

struct LpVariable {
  std::string name;
  /// Pinned value (an equality bound); free otherwise.
  std::optional<double> fixed;
  /// SSP state the variable stands for, npos when unknown (parsed models).
  StateId state = npos;
};

using LpTerms = std::vector<std::pair<std::size_t, double>>;

/// sum terms <= rhs. Terms are sorted by variable index, merged, non-zero.
struct LpConstraint {
  std::string name;
  std::size_t owner = npos;  // variable of the state this constraint bounds
  LpTerms terms;
  double rhs = 0.0;

  friend bool operator==(const LpConstraint&, const LpConstraint&) = default;
};

class LpModel {
 public:
  std::size_t add_variable(std::string name, std::optional<double> fixed = std::nullopt,
                           StateId state = npos);
  /// `terms` may repeat variables and contain zeros; they are normalized.
  void add_constraint(std::string name, std::size_t owner, LpTerms terms, double rhs);
  void set_objective(LpTerms terms);
  void set_title(std::string title) { title_ = std::move(title); }

  const std::vector<LpVariable>& variables() const noexcept { return variables_; }
  const std::vector<LpConstraint>& constraints() const noexcept { return constraints_; }
  const LpTerms& objective() const noexcept { return objective_; }
  const std::string& title() const noexcept { return title_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  /// Compares names, pinned values, constraints and objective.
  friend bool operator==(const LpModel& a, const LpModel& b);

 private:
  std::vector<LpVariable> variables_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::vector<LpConstraint> constraints_;
  LpTerms objective_;
  std::string title_;
};

/// One variable per non-target state, one constraint per (state, action).
LpModel build_generic_ssp_lp(const SspModel& m);

/// LP over node and fragile-link variables of the undamped refined model.
/// Dangling nodes are rejected; fragile nodes keep at most one link.
LpModel build_max_pagerank_lp(const DiGraph& g, NodeId v, DanglingRule rule = DanglingRule::None);

/// LP over node, damping, fragile-link and teleportation variables of the
/// damped refined model; the damping variable of the target is pinned to 0.
LpModel build_damped_lp(const DiGraph& g, NodeId v, const Personalization& pers,
                        DanglingRule rule = DanglingRule::None);

/// LP file text (Maximize / Subject To / Bounds / End). Deterministic; terms
/// appear in variable declaration order and numbers round-trip exactly.
std::string emit_lp(const LpModel& lp);
/// Parses text produced by emit_lp.
LpModel parse_lp(std::string_view text);

using LpPoint = std::map<std::string, double, std::less<>>;

/// Maps a value function onto the variables that carry a state index.
LpPoint lp_point(const LpModel& lp, const ValueFunction& j);

double objective_value(const LpModel& lp, const LpPoint& point);

struct LpCheckReport {
  bool feasible = true;
  /// Names of violated constraints (and "bound:<var>" for pinned variables).
  std::vector<std::string> violated;
  double max_violation = 0.0;
  /// Every variable owning constraints has at least one tight constraint.
  bool tight_per_state = true;
  std::vector<std::string> slack_variables;
};

/// Feasibility within `eps` and per-state tightness within `tight_eps`.
/// Pinned variables may be omitted from `point`; others must be present.
LpCheckReport check_point(const LpModel& lp, const LpPoint& point, double eps = 1e-9,
                          double tight_eps = 1e-8);

}  // namespace fraglink
