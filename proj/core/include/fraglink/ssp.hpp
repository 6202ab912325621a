#pragma once

// Stochastic shortest path models: construction from a Max-PageRank
// instance, and the generic solvers (policy evaluation, value iteration,
// policy iteration).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraglink/chain.hpp"
#include "fraglink/graph.hpp"

namespace fraglink {

using StateId = std::size_t;

enum class StateKind { Node, Start, Target, FragileLink, Damping, Teleport, Generic };

std::string_view to_string(StateKind kind);

/// Provenance of a state. `name` is unique within a model and drives the LP
/// variable names.
struct StateLabel {
  StateKind kind = StateKind::Generic;
  std::string name;
  NodeId node = npos;          // graph node (for FragileLink: the source node)
  FragileId fragile = npos;    // FragileLink only
  bool fragile_node = false;   // node whose out-links are all fragile
};

struct Transition {
  StateId to = 0;
  double probability = 0.0;
  double cost = 0.0;
};

struct Action {
  std::string name;
  std::vector<Transition> transitions;
};

enum class Formulation { Generic, Simple, Refined };

/// How a model relates to the graph it was built from.
struct SspOrigin {
  Formulation formulation = Formulation::Generic;
  NodeId node = npos;  // the node whose PageRank is optimized
  std::size_t graph_nodes = 0;
  std::size_t fragile_count = 0;
  double damping = 0.0;
  StateId start = npos;
  StateId teleport = npos;
};

/// Finite SSP. The target is the last state; it is absorbing and cost-free.
class SspModel {
 public:
  SspModel(std::vector<std::vector<Action>> actions, std::vector<StateLabel> labels,
           SspOrigin origin = {});

  std::size_t state_count() const noexcept { return actions_.size(); }
  StateId target() const noexcept { return actions_.size() - 1; }
  std::span<const Action> actions(StateId s) const { return actions_.at(s); }
  const Action& action(StateId s, std::size_t u) const { return actions_.at(s).at(u); }
  const StateLabel& label(StateId s) const { return labels_.at(s); }
  const SspOrigin& origin() const noexcept { return origin_; }

  std::size_t max_actions() const;
  /// Smallest positive transition probability.
  double min_positive_probability() const;

 private:
  std::vector<std::vector<Action>> actions_;
  std::vector<StateLabel> labels_;
  SspOrigin origin_;
};

/// Deterministic stationary policy: one action index per state.
class Policy {
 public:
  Policy() = default;
  explicit Policy(std::vector<std::size_t> actions) : actions_(std::move(actions)) {}

  std::size_t size() const noexcept { return actions_.size(); }
  std::size_t operator[](StateId s) const { return actions_.at(s); }
  void set(StateId s, std::size_t u) { actions_.at(s) = u; }
  std::span<const std::size_t> actions() const noexcept { return actions_; }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::vector<std::size_t> actions_;
};

using ValueFunction = std::vector<double>;

enum class Sense { Minimize, Maximize };

/// Nodes keep their ids, v becomes the start state, and the target v_t is
/// appended. Each node chooses any subset of its fragile links.
SspModel build_simple_ssp(const DiGraph& g, NodeId v, DanglingRule rule);

/// One auxiliary on/off state per fragile link; at most two actions per state
/// unless fragile nodes are present. With `pers`, damping and teleportation
/// states are added as well.
SspModel build_refined_ssp(const DiGraph& g, NodeId v, DanglingRule rule,
                           const std::optional<Personalization>& pers = std::nullopt);

/// Expected first return time to the optimized node under values `j`.
double return_time(const SspModel& m, const ValueFunction& j);

Policy policy_for_configuration(const SspModel& m, const DiGraph& g, const Configuration& cfg);
Configuration configuration_for_policy(const SspModel& m, const DiGraph& g, const Policy& mu);
/// Every fragile link on; fragile nodes take their first link.
Policy all_on_policy(const SspModel& m, const DiGraph& g);

/// States from which the target is not reached with probability one.
std::vector<StateId> improper_states(const SspModel& m, const Policy& mu);
bool is_proper(const SspModel& m, const Policy& mu);

/// A proper policy, if any exists (every state reaches the target with
/// probability one).
std::optional<Policy> find_proper_policy(const SspModel& m);

/// Solves T_mu J = J. Throws ImproperPolicyError for improper policies.
ValueFunction evaluate_policy(const SspModel& m, const Policy& mu);

/// Expected one-step cost plus continuation, sum_j p(j|s,u) [g(s,u,j) + J(j)].
double q_value(const SspModel& m, StateId s, std::size_t u, const ValueFunction& j);

/// Greedy policy w.r.t. `j`; ties go to the lowest action index.
Policy greedy_policy(const SspModel& m, const ValueFunction& j, Sense sense = Sense::Minimize);

struct SolveResult {
  ValueFunction values;
  Policy policy;
  std::size_t iterations = 0;
  /// Value function after each evaluation (policy iteration only).
  std::vector<ValueFunction> history;
};

struct ValueIterationOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 10'000'000;
};

SolveResult value_iteration(const SspModel& m, const ValueIterationOptions& options = {});

struct PolicyIterationOptions {
  Sense sense = Sense::Minimize;
  /// An action replaces the current one only if it improves the Q-value by
  /// more than tie_tolerance * max(1, |Q|).
  double tie_tolerance = 1e-9;
  std::size_t max_iterations = 100'000;
  /// Solve only on the states reachable from this state under some policy.
  /// Values elsewhere are NaN. Used when maximizing, where improper policies
  /// would otherwise be evaluated.
  std::optional<StateId> restrict_to_reachable_from;
};

SolveResult policy_iteration(const SspModel& m, const Policy& initial,
                             const PolicyIterationOptions& options = {});

/// A policy under which `from` avoids the target forever with positive
/// probability, if one exists.
std::optional<Policy> find_target_avoiding_policy(const SspModel& m, StateId from);

/// JSON document with states, labels, actions, transitions and costs.
std::string ssp_to_json(const SspModel& m, int indent = 2);

}  // namespace fraglink
