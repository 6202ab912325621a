#pragma once

// Maximum and minimum PageRank of a node over all fragile-link
// configurations. The undamped problem is solved by PageRank Iteration:
// evaluate the mean hitting times H_k to v under the current configuration,
// then switch link (i, j) on exactly when H_k(i) >= H_k(j) + 1. Damped
// instances go through policy iteration on the refined SSP model.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fraglink/chain.hpp"
#include "fraglink/graph.hpp"

namespace fraglink {

struct PriStep {
  std::size_t iteration = 0;
  Configuration configuration;
  /// Mean hitting times to v, indexed by node; entry v is the return time.
  /// NaN for nodes that cannot influence the walk from v.
  std::vector<double> hitting_times;
  double return_time = 0.0;
};

struct PriTrace {
  std::vector<PriStep> steps;
};

enum class Objective { Maximize, Minimize };

struct OptimizationResult {
  /// 0 when v can be made transient (infinite return time).
  double pagerank = 0.0;
  double return_time = 0.0;
  Configuration configuration;
  std::size_t iterations = 0;
  PriTrace trace;
  /// "pri", "policy-iteration" or "transient".
  std::string method;
};

struct PriOptions {
  /// Differences within tie_tolerance * max(1, |H(i)|) keep the link as is.
  double tie_tolerance = 1e-9;
};

/// Starting configuration: every link on; a node whose links are all fragile
/// takes the option closest to v (fewest hops, lowest index on ties).
Configuration initial_configuration(const DiGraph& g, NodeId v, DanglingRule rule);

/// Undamped maximum. Throws UnreachableError when even the starting
/// configuration leaves some node unable to reach v.
OptimizationResult pagerank_iteration(const DiGraph& g, NodeId v, DanglingRule rule,
                                      const PriOptions& options = {});

/// Undamped minimum, 0 with a witness configuration when v can be made
/// transient.
OptimizationResult min_pagerank_iteration(const DiGraph& g, NodeId v, DanglingRule rule,
                                          const PriOptions& options = {});

/// A configuration under which v is transient, if one exists.
std::optional<Configuration> transient_witness(const DiGraph& g, NodeId v, DanglingRule rule);

/// Policy iteration on the refined model, damped when `pers` is given.
OptimizationResult optimize_pagerank_ssp(const DiGraph& g, NodeId v, DanglingRule rule,
                                         const std::optional<Personalization>& pers,
                                         Objective objective);

}  // namespace fraglink
