#include "fraglink/pri.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "fraglink/errors.hpp"
#include "fraglink/ssp.hpp"
#include "reachability.hpp"

namespace fraglink {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_node(const DiGraph& g, NodeId v) {
  if (v >= g.node_count()) {
    throw RangeError("node " + std::to_string(v) + " out of range [0, " +
                     std::to_string(g.node_count()) + ")");
  }
}

/// Successors of every node over every possible configuration, including the
/// dangling option of fragile nodes.
detail::Adjacency union_adjacency(const DiGraph& g, DanglingRule rule) {
  detail::Adjacency adj(g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    for (std::size_t k : g.out_edges(i)) adj[i].push_back(g.edges()[k].target);
    if (g.is_fragile_node(i)) {
      if (rule == DanglingRule::SelfLoop) adj[i].push_back(i);
      if (rule == DanglingRule::UniformToAll) {
        for (NodeId k = 0; k < g.node_count(); ++k) adj[i].push_back(k);
      }
    }
  }
  return adj;
}

/// Index of the active link of fragile node i, or the link count for the
/// dangling option.
std::size_t fragile_choice(const DiGraph& g, NodeId i, const Configuration& cfg) {
  const auto local = g.fragile_out(i);
  for (std::size_t k = 0; k < local.size(); ++k) {
    if (cfg.active(local[k])) return k;
  }
  return local.size();
}

void set_fragile_choice(const DiGraph& g, NodeId i, std::size_t choice, Configuration& cfg) {
  const auto local = g.fragile_out(i);
  for (std::size_t k = 0; k < local.size(); ++k) cfg.set(local[k], k == choice);
}

std::vector<double> to_std(const Vector& x) { return {x.data(), x.data() + x.size()}; }

/// PageRank Iteration on a graph whose dangling nodes are already handled.
/// Maximizing PageRank minimizes the return time and vice versa.
OptimizationResult run_pri(const DiGraph& g, NodeId v, DanglingRule rule, Objective objective,
                           Configuration cfg, const PriOptions& options) {
  const bool maximize = objective == Objective::Maximize;
  const std::size_t d = g.fragile_count();
  const std::size_t limit = d >= 63 ? std::numeric_limits<std::size_t>::max() : (std::size_t{1} << d);
  OptimizationResult result;
  result.method = "pri";

  for (std::size_t k = 0;; ++k) {
    const DiGraph walk = handle_dangling(apply_configuration(g, cfg), rule);
    const Vector h = hitting_times(walk, v);
    result.trace.steps.push_back({k, cfg, to_std(h), h(static_cast<Eigen::Index>(v))});

    auto arrival = [&](NodeId j) { return j == v ? 0.0 : h(static_cast<Eigen::Index>(j)); };
    // Cost difference "current minus candidate" counts as a gain when it
    // moves the return time the wanted way.
    auto gain = [&](double current, double candidate) {
      return maximize ? current - candidate : candidate - current;
    };

    Configuration next = cfg;
    for (NodeId i = 0; i < g.node_count(); ++i) {
      const auto local = g.fragile_out(i);
      if (local.empty()) continue;
      const double hi = h(static_cast<Eigen::Index>(i));
      if (!g.is_fragile_node(i)) {
        const double band = options.tie_tolerance * std::max(1.0, std::abs(hi));
        for (FragileId f : local) {
          const double on = 1.0 + arrival(g.fragile_edge(f).target);
          if (gain(hi, on) > band) next.set(f, true);
          if (gain(on, hi) > band) next.set(f, false);
        }
        continue;
      }
      std::vector<double> q;
      for (FragileId f : local) q.push_back(1.0 + arrival(g.fragile_edge(f).target));
      if (rule == DanglingRule::SelfLoop) q.push_back(1.0 + arrival(i));
      if (rule == DanglingRule::UniformToAll) {
        double mean = 0.0;
        for (NodeId j = 0; j < g.node_count(); ++j) mean += arrival(j);
        q.push_back(1.0 + mean / static_cast<double>(g.node_count()));
      }
      const std::size_t current = fragile_choice(g, i, cfg);
      std::size_t best = current;
      for (std::size_t u = 0; u < q.size(); ++u) {
        if (u == current) continue;
        if (best == current || gain(q[best], q[u]) > 0.0) best = u;
      }
      if (best != current &&
          gain(q[current], q[best]) > options.tie_tolerance * std::max(1.0, std::abs(q[current]))) {
        set_fragile_choice(g, i, best, next);
      }
    }

    if (next == cfg) {
      result.configuration = cfg;
      result.return_time = result.trace.steps.back().return_time;
      result.pagerank = 1.0 / result.return_time;
      result.iterations = k + 1;
      return result;
    }
    if (k + 1 >= limit) {
      throw NonConvergenceError(to_std(h), k + 1,
                                "PageRank Iteration exceeded 2^d evaluations; cycling suspected");
    }
    cfg = std::move(next);
  }
}

}  // namespace

Configuration initial_configuration(const DiGraph& g0, NodeId v, DanglingRule rule) {
  check_node(g0, v);
  const DiGraph g = handle_dangling(g0, rule);
  const std::size_t n = g.node_count();
  // Hop distance to v over every option.
  const auto rev = detail::reverse(union_adjacency(g, rule));
  std::vector<std::size_t> dist(n, npos);
  std::deque<NodeId> queue{v};
  dist[v] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId w : rev[u]) {
      if (dist[w] == npos) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  auto arrival = [&](NodeId j) { return j == v ? 0 : dist[j]; };

  Configuration cfg = Configuration::full(g.fragile_count());
  for (NodeId i = 0; i < n; ++i) {
    if (!g.is_fragile_node(i)) continue;
    const auto local = g.fragile_out(i);
    std::size_t best = 0;
    std::size_t best_dist = arrival(g.fragile_edge(local[0]).target);
    for (std::size_t k = 1; k < local.size(); ++k) {
      const std::size_t dk = arrival(g.fragile_edge(local[k]).target);
      if (dk < best_dist) {
        best = k;
        best_dist = dk;
      }
    }
    // Uniform teleport from a fragile node hits v in one step with positive
    // probability, which no link can beat unless it points at v.
    if (rule == DanglingRule::UniformToAll && best_dist > 0) best = local.size();
    set_fragile_choice(g, i, best, cfg);
  }
  return cfg;
}

OptimizationResult pagerank_iteration(const DiGraph& g0, NodeId v, DanglingRule rule,
                                      const PriOptions& options) {
  check_node(g0, v);
  const DiGraph g = handle_dangling(g0, rule);
  return run_pri(g, v, rule, Objective::Maximize, initial_configuration(g, v, rule), options);
}

std::optional<Configuration> transient_witness(const DiGraph& g0, NodeId v, DanglingRule rule) {
  check_node(g0, v);
  const DiGraph g = handle_dangling(g0, rule);
  const std::size_t n = g.node_count();

  // Trap: nodes that can keep the walk away from v forever. An ordinary node
  // needs all fixed successors inside; a fragile node needs one option inside.
  std::vector<bool> trap(n, true);
  trap[v] = false;
  bool shrunk = true;
  while (shrunk) {
    shrunk = false;
    for (NodeId i = 0; i < n; ++i) {
      if (!trap[i]) continue;
      bool ok = true;
      if (g.is_fragile_node(i)) {
        ok = rule == DanglingRule::SelfLoop;
        for (FragileId f : g.fragile_out(i)) ok = ok || trap[g.fragile_edge(f).target];
      } else {
        for (std::size_t k : g.out_edges(i)) {
          const Edge& e = g.edges()[k];
          if (e.kind == EdgeKind::Fixed && !trap[e.target]) ok = false;
        }
      }
      if (!ok) {
        trap[i] = false;
        shrunk = true;
      }
    }
  }

  // Shortest path from v into the trap over every option.
  const auto adj = union_adjacency(g, rule);
  std::vector<NodeId> parent(n, npos);
  std::vector<bool> seen(n, false);
  std::deque<NodeId> queue{v};
  seen[v] = true;
  NodeId hit = npos;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    if (trap[u]) {
      hit = u;
      break;
    }
    for (NodeId w : adj[u]) {
      if (!seen[w]) {
        seen[w] = true;
        parent[w] = u;
        queue.push_back(w);
      }
    }
  }
  if (hit == npos) return std::nullopt;

  Configuration cfg = initial_configuration(g, v, rule);
  for (NodeId i = 0; i < n; ++i) {
    if (!trap[i]) continue;
    const auto local = g.fragile_out(i);
    if (g.is_fragile_node(i)) {
      std::size_t choice = local.size();
      for (std::size_t k = 0; k < local.size(); ++k) {
        if (trap[g.fragile_edge(local[k]).target]) {
          choice = k;
          break;
        }
      }
      set_fragile_choice(g, i, choice, cfg);
    } else {
      for (FragileId f : local) cfg.set(f, trap[g.fragile_edge(f).target]);
    }
  }
  // Path nodes sit outside the trap; make sure each keeps its path edge.
  for (NodeId w = hit; parent[w] != npos; w = parent[w]) {
    const NodeId u = parent[w];
    if (g.is_fragile_node(u)) {
      const auto local = g.fragile_out(u);
      std::size_t choice = local.size();
      for (std::size_t k = 0; k < local.size(); ++k) {
        if (g.fragile_edge(local[k]).target == w) {
          choice = k;
          break;
        }
      }
      set_fragile_choice(g, u, choice, cfg);
    } else {
      for (FragileId f : g.fragile_out(u)) {
        if (g.fragile_edge(f).target == w) cfg.set(f, true);
      }
    }
  }
  return cfg;
}

OptimizationResult min_pagerank_iteration(const DiGraph& g0, NodeId v, DanglingRule rule,
                                          const PriOptions& options) {
  check_node(g0, v);
  const DiGraph g = handle_dangling(g0, rule);
  if (auto witness = transient_witness(g, v, rule)) {
    OptimizationResult result;
    result.pagerank = 0.0;
    result.return_time = std::numeric_limits<double>::infinity();
    result.configuration = std::move(*witness);
    result.method = "transient";
    return result;
  }

  // Every configuration now returns to v almost surely; only nodes reachable
  // from v matter.
  const auto keep = detail::reachable_from(union_adjacency(g, rule), {v});
  const InducedSubgraph sub = induced_subgraph(g, keep);
  std::vector<FragileId> original_id;
  for (FragileId f = 0; f < g.fragile_count(); ++f) {
    const Edge& e = g.fragile_edge(f);
    if (keep[e.source] && keep[e.target]) original_id.push_back(f);
  }
  if (original_id.size() != sub.graph.fragile_count()) {
    throw NumericError("fragile links were renumbered unexpectedly in the reachable subgraph");
  }

  const NodeId local_v = sub.renumbered[v];
  OptimizationResult local = run_pri(sub.graph, local_v, rule, Objective::Minimize,
                                     initial_configuration(sub.graph, local_v, rule), options);

  auto lift = [&](const Configuration& c) {
    Configuration full = initial_configuration(g, v, rule);
    for (FragileId f = 0; f < c.size(); ++f) full.set(original_id[f], c.active(f));
    return full;
  };
  OptimizationResult result;
  result.pagerank = local.pagerank;
  result.return_time = local.return_time;
  result.configuration = lift(local.configuration);
  result.iterations = local.iterations;
  result.method = "pri";
  for (const PriStep& step : local.trace.steps) {
    std::vector<double> h(g.node_count(), kNaN);
    for (NodeId i = 0; i < sub.original.size(); ++i) h[sub.original[i]] = step.hitting_times[i];
    result.trace.steps.push_back({step.iteration, lift(step.configuration), std::move(h), step.return_time});
  }
  return result;
}

OptimizationResult optimize_pagerank_ssp(const DiGraph& g0, NodeId v, DanglingRule rule,
                                         const std::optional<Personalization>& pers,
                                         Objective objective) {
  check_node(g0, v);
  const DiGraph g = handle_dangling(g0, rule);
  const SspModel m = build_refined_ssp(g, v, rule, pers);

  OptimizationResult result;
  result.method = "policy-iteration";
  PolicyIterationOptions options;
  if (objective == Objective::Minimize) {
    options.sense = Sense::Maximize;
    if (auto trap = find_target_avoiding_policy(m, m.origin().start)) {
      result.pagerank = 0.0;
      result.return_time = std::numeric_limits<double>::infinity();
      result.configuration = configuration_for_policy(m, g, *trap);
      result.method = "transient";
      return result;
    }
    options.restrict_to_reachable_from = m.origin().start;
  }

  const Policy initial = policy_for_configuration(m, g, initial_configuration(g, v, rule));
  SolveResult solved;
  try {
    solved = policy_iteration(m, initial, options);
  } catch (const ImproperPolicyError& e) {
    throw UnreachableError(
        {}, std::string("no configuration lets every node reach the target: ") + e.what());
  }
  result.return_time = return_time(m, solved.values);
  result.pagerank = 1.0 / result.return_time;
  result.configuration = configuration_for_policy(m, g, solved.policy);
  result.iterations = solved.iterations;
  return result;
}

}  // namespace fraglink
