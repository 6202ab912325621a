#include "fraglink/ssp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "fraglink/errors.hpp"
#include "linalg.hpp"
#include "reachability.hpp"

namespace fraglink {

namespace {

constexpr double kRowSumTolerance = 1e-10;

std::string node_name(NodeId i) { return std::to_string(i); }

/// Successor adjacency of the chain induced by `mu` (positive probabilities).
detail::Adjacency policy_graph(const SspModel& m, const Policy& mu) {
  detail::Adjacency adj(m.state_count());
  for (StateId s = 0; s < m.state_count(); ++s) {
    for (const Transition& t : m.action(s, mu[s]).transitions) {
      if (t.probability > 0.0) adj[s].push_back(t.to);
    }
  }
  return adj;
}

/// Successors over every action.
detail::Adjacency union_graph(const SspModel& m) {
  detail::Adjacency adj(m.state_count());
  for (StateId s = 0; s < m.state_count(); ++s) {
    for (const Action& a : m.actions(s)) {
      for (const Transition& t : a.transitions) {
        if (t.probability > 0.0) adj[s].push_back(t.to);
      }
    }
  }
  return adj;
}

void check_policy(const SspModel& m, const Policy& mu) {
  if (mu.size() != m.state_count()) {
    throw DomainError("policy covers " + std::to_string(mu.size()) + " states, model has " +
                      std::to_string(m.state_count()));
  }
  for (StateId s = 0; s < m.state_count(); ++s) {
    if (mu[s] >= m.actions(s).size()) {
      throw DomainError("policy picks action " + std::to_string(mu[s]) + " in state " +
                        std::to_string(s) + " which has " + std::to_string(m.actions(s).size()));
    }
  }
}

/// Evaluates `mu` on the states flagged in `include` (a set closed under the
/// policy's transitions, target excluded). Other entries are NaN.
ValueFunction evaluate_subset(const SspModel& m, const Policy& mu, const std::vector<bool>& include) {
  const StateId target = m.target();
  const auto reach = detail::reaching(policy_graph(m, mu), target);
  std::vector<StateId> stuck;
  std::vector<std::size_t> index(m.state_count(), npos);
  std::size_t r = 0;
  for (StateId s = 0; s < target; ++s) {
    if (!include[s]) continue;
    if (!reach[s]) stuck.push_back(s);
    index[s] = r++;
  }
  if (!stuck.empty()) {
    throw ImproperPolicyError(stuck, "policy is improper: " + std::to_string(stuck.size()) +
                                         " state(s) never reach the target, first is state " +
                                         std::to_string(stuck.front()) + " (" +
                                         m.label(stuck.front()).name + ")");
  }

  const auto size = static_cast<Eigen::Index>(r);
  Matrix a = Matrix::Identity(size, size);
  Vector b = Vector::Zero(size);
  for (StateId s = 0; s < target; ++s) {
    if (!include[s]) continue;
    const auto row = static_cast<Eigen::Index>(index[s]);
    for (const Transition& t : m.action(s, mu[s]).transitions) {
      b(row) += t.probability * t.cost;
      if (t.to == target) continue;
      if (index[t.to] == npos) {
        throw DomainError("state " + std::to_string(s) + " leaves the evaluated state set");
      }
      a(row, static_cast<Eigen::Index>(index[t.to])) -= t.probability;
    }
  }
  const Vector x = detail::solve_checked(a, b, "policy evaluation");
  ValueFunction j(m.state_count(), std::numeric_limits<double>::quiet_NaN());
  for (StateId s = 0; s < target; ++s) {
    if (include[s]) j[s] = x(static_cast<Eigen::Index>(index[s]));
  }
  j[target] = 0.0;
  return j;
}

bool better(double candidate, double incumbent, Sense sense) {
  return sense == Sense::Minimize ? candidate < incumbent : candidate > incumbent;
}

/// Helper for the graph-derived formulations.
struct ModelBuilder {
  std::vector<std::vector<Action>> actions;
  std::vector<StateLabel> labels;

  explicit ModelBuilder(std::size_t states) : actions(states), labels(states) {}
};

Action dangling_action(const DiGraph& g, NodeId i, DanglingRule rule, auto&& arrive) {
  Action a{"dangling", {}};
  const double n = static_cast<double>(g.node_count());
  if (rule == DanglingRule::SelfLoop) {
    a.transitions.push_back({arrive(i), 1.0, 1.0});
  } else {
    for (NodeId k = 0; k < g.node_count(); ++k) a.transitions.push_back({arrive(k), 1.0 / n, 1.0});
  }
  return a;
}

void check_node(const DiGraph& g, NodeId v) {
  if (v >= g.node_count()) {
    throw RangeError("node " + std::to_string(v) + " out of range [0, " +
                     std::to_string(g.node_count()) + ")");
  }
}

/// Names "f_i_j", with "_r" appended for the r-th further parallel record.
std::vector<std::string> fragile_names(const DiGraph& g) {
  std::map<std::pair<NodeId, NodeId>, std::size_t> seen;
  std::vector<std::string> names;
  for (FragileId f = 0; f < g.fragile_count(); ++f) {
    const Edge& e = g.fragile_edge(f);
    const std::size_t r = seen[{e.source, e.target}]++;
    std::string name = "f_" + node_name(e.source) + "_" + node_name(e.target);
    if (r > 0) name += "_" + std::to_string(r);
    names.push_back(std::move(name));
  }
  return names;
}

}  // namespace

std::string_view to_string(StateKind kind) {
  switch (kind) {
    case StateKind::Node: return "node";
    case StateKind::Start: return "start";
    case StateKind::Target: return "target";
    case StateKind::FragileLink: return "fragile-link";
    case StateKind::Damping: return "damping";
    case StateKind::Teleport: return "teleport";
    case StateKind::Generic: return "generic";
  }
  return "generic";
}

SspModel::SspModel(std::vector<std::vector<Action>> actions, std::vector<StateLabel> labels,
                   SspOrigin origin)
    : actions_(std::move(actions)), labels_(std::move(labels)), origin_(origin) {
  if (actions_.empty()) throw ValidationError("SSP model needs at least the target state");
  if (labels_.size() != actions_.size()) throw ValidationError("one label per state required");
  const std::size_t n = actions_.size();
  for (StateId s = 0; s < n; ++s) {
    if (actions_[s].empty()) throw ValidationError("state " + std::to_string(s) + " has no action");
    for (const Action& a : actions_[s]) {
      double total = 0.0;
      for (const Transition& t : a.transitions) {
        if (t.to >= n) throw ValidationError("transition to unknown state " + std::to_string(t.to));
        if (!(t.probability >= 0.0)) throw ValidationError("negative transition probability");
        if (!std::isfinite(t.cost)) throw ValidationError("non-finite transition cost");
        total += t.probability;
      }
      if (std::abs(total - 1.0) > kRowSumTolerance) {
        throw ValidationError("state " + std::to_string(s) + " action '" + a.name +
                              "' probabilities sum to " + std::to_string(total));
      }
    }
  }
  for (const Action& a : actions_[n - 1]) {
    for (const Transition& t : a.transitions) {
      if (t.probability > 0.0 && (t.to != n - 1 || t.cost != 0.0)) {
        throw ValidationError("target state must be absorbing and cost-free");
      }
    }
  }
}

std::size_t SspModel::max_actions() const {
  std::size_t best = 0;
  for (const auto& a : actions_) best = std::max(best, a.size());
  return best;
}

double SspModel::min_positive_probability() const {
  double eta = 1.0;
  for (const auto& acts : actions_) {
    for (const Action& a : acts) {
      for (const Transition& t : a.transitions) {
        if (t.probability > 0.0) eta = std::min(eta, t.probability);
      }
    }
  }
  return eta;
}

SspModel build_simple_ssp(const DiGraph& g0, NodeId v, DanglingRule rule) {
  check_node(g0, v);
  const DiGraph g = handle_dangling(g0, rule);
  const std::size_t n = g.node_count();
  const StateId target = n;
  auto arrive = [&](NodeId j) -> StateId { return j == v ? target : j; };

  ModelBuilder b(n + 1);
  for (NodeId i = 0; i < n; ++i) {
    b.labels[i] = {i == v ? StateKind::Start : StateKind::Node, node_name(i), i, npos,
                   g.is_fragile_node(i)};
    const auto local = g.fragile_out(i);
    if (local.size() > 16) {
      throw ValidationError("node " + std::to_string(i) + " has " + std::to_string(local.size()) +
                            " fragile links; the power-set formulation allows at most 16");
    }
    const std::size_t masks = std::size_t{1} << local.size();
    for (std::size_t mask = 0; mask < masks; ++mask) {
      std::vector<std::pair<NodeId, std::size_t>> succ;
      std::size_t total = 0;
      std::string name = "on:";
      for (std::size_t k : g.out_edges(i)) {
        const Edge& e = g.edges()[k];
        if (e.kind == EdgeKind::Fragile) {
          const auto pos = static_cast<std::size_t>(
              std::find(local.begin(), local.end(), g.fragile_id(k)) - local.begin());
          if (((mask >> pos) & 1U) == 0) continue;
          if (name.size() > 3) name += ',';
          name += std::to_string(g.fragile_id(k));
        }
        succ.emplace_back(e.target, e.multiplicity);
        total += e.multiplicity;
      }
      if (total == 0) {
        if (rule == DanglingRule::None) {
          throw FragileNodeError(i, "node " + std::to_string(i) +
                                        " only has fragile links and switching them all off "
                                        "leaves it dangling; use the refined formulation or a "
                                        "dangling rule");
        }
        b.actions[i].push_back(dangling_action(g, i, rule, arrive));
        continue;
      }
      Action a{name, {}};
      for (auto [j, mult] : succ) {
        a.transitions.push_back(
            {arrive(j), static_cast<double>(mult) / static_cast<double>(total), 1.0});
      }
      b.actions[i].push_back(std::move(a));
    }
  }
  b.labels[target] = {StateKind::Target, node_name(v) + "t", v, npos, false};
  b.actions[target].push_back({"stay", {{target, 1.0, 0.0}}});

  SspOrigin origin{Formulation::Simple, v, n, g.fragile_count(), 0.0, v, npos};
  return SspModel(std::move(b.actions), std::move(b.labels), origin);
}

SspModel build_refined_ssp(const DiGraph& g0, NodeId v, DanglingRule rule,
                           const std::optional<Personalization>& pers) {
  check_node(g0, v);
  const DiGraph g = handle_dangling(g0, rule);
  const std::size_t n = g.node_count();
  const bool damped = pers.has_value();
  if (damped && pers->size() != n) {
    throw ValidationError("personalization has " + std::to_string(pers->size()) +
                          " entries, graph has " + std::to_string(n) + " nodes");
  }

  // Auxiliary states for fragile links of ordinary nodes. Fragile nodes
  // choose their single active link directly.
  std::vector<StateId> aux(g.fragile_count(), npos);
  std::size_t aux_count = 0;
  for (FragileId f = 0; f < g.fragile_count(); ++f) {
    if (!g.is_fragile_node(g.fragile_edge(f).source)) aux[f] = n + aux_count++;
  }
  const StateId h_base = n + aux_count;
  const StateId teleport = damped ? h_base + n : npos;
  const StateId target = damped ? h_base + n + 1 : n + aux_count;
  auto arrive = [&](NodeId j) -> StateId {
    if (damped) return h_base + j;
    return j == v ? target : j;
  };

  const auto names = fragile_names(g);
  ModelBuilder b(target + 1);

  for (NodeId i = 0; i < n; ++i) {
    const bool fragile_node = g.is_fragile_node(i);
    b.labels[i] = {i == v ? StateKind::Start : StateKind::Node, node_name(i), i, npos, fragile_node};
    if (!fragile_node) {
      const double deg = static_cast<double>(g.out_degree(i));
      Action a{"step", {}};
      for (std::size_t k : g.out_edges(i)) {
        const Edge& e = g.edges()[k];
        const double p = static_cast<double>(e.multiplicity) / deg;
        if (e.kind == EdgeKind::Fixed) {
          a.transitions.push_back({arrive(e.target), p, 1.0});
        } else {
          a.transitions.push_back({aux[g.fragile_id(k)], p, 0.0});
        }
      }
      b.actions[i].push_back(std::move(a));
      continue;
    }
    for (FragileId f : g.fragile_out(i)) {
      b.actions[i].push_back(
          {"link:" + std::to_string(f), {{arrive(g.fragile_edge(f).target), 1.0, 1.0}}});
    }
    if (rule != DanglingRule::None) b.actions[i].push_back(dangling_action(g, i, rule, arrive));
  }

  for (FragileId f = 0; f < g.fragile_count(); ++f) {
    if (aux[f] == npos) continue;
    const Edge& e = g.fragile_edge(f);
    b.labels[aux[f]] = {StateKind::FragileLink, names[f], e.source, f, false};
    b.actions[aux[f]].push_back({"on", {{arrive(e.target), 1.0, 1.0}}});
    b.actions[aux[f]].push_back({"off", {{e.source, 1.0, 0.0}}});
  }

  if (damped) {
    const double c = pers->damping();
    for (NodeId i = 0; i < n; ++i) {
      const StateId h = h_base + i;
      b.labels[h] = {StateKind::Damping, "h_" + node_name(i), i, npos, false};
      if (i == v) {
        b.actions[h].push_back({"nop", {{target, 1.0, 0.0}}});
      } else {
        b.actions[h].push_back({"nop", {{i, 1.0 - c, 0.0}, {teleport, c, 0.0}}});
      }
    }
    b.labels[teleport] = {StateKind::Teleport, "q", npos, npos, false};
    Action a{"teleport", {}};
    for (NodeId i = 0; i < n; ++i) {
      a.transitions.push_back({h_base + i, pers->z()(static_cast<Eigen::Index>(i)), 1.0});
    }
    b.actions[teleport].push_back(std::move(a));
  }

  b.labels[target] = {StateKind::Target, node_name(v) + "t", v, npos, false};
  b.actions[target].push_back({"stay", {{target, 1.0, 0.0}}});

  SspOrigin origin{Formulation::Refined, v, n, g.fragile_count(),
                   damped ? pers->damping() : 0.0, v, teleport};
  return SspModel(std::move(b.actions), std::move(b.labels), origin);
}

double return_time(const SspModel& m, const ValueFunction& j) {
  const SspOrigin& o = m.origin();
  if (o.start == npos) throw DomainError("model has no start state");
  if (j.size() != m.state_count()) throw DomainError("value function size does not match model");
  if (o.damping > 0.0) {
    // The start state never teleports on its first step, so weigh in the
    // teleport branch explicitly.
    return (1.0 - o.damping) * j[o.start] + o.damping * j[o.teleport];
  }
  return j[o.start];
}

Policy policy_for_configuration(const SspModel& m, const DiGraph& g, const Configuration& cfg) {
  if (cfg.size() != g.fragile_count() || g.fragile_count() != m.origin().fragile_count) {
    throw DomainError("configuration does not match the graph or model");
  }
  std::vector<std::size_t> actions(m.state_count(), 0);
  switch (m.origin().formulation) {
    case Formulation::Generic:
      throw DomainError("generic models carry no configuration mapping");
    case Formulation::Simple:
      for (NodeId i = 0; i < m.origin().graph_nodes; ++i) {
        const auto local = g.fragile_out(i);
        std::size_t mask = 0;
        for (std::size_t k = 0; k < local.size(); ++k) {
          if (cfg.active(local[k])) mask |= std::size_t{1} << k;
        }
        actions[i] = mask;
      }
      break;
    case Formulation::Refined:
      for (StateId s = 0; s < m.state_count(); ++s) {
        const StateLabel& l = m.label(s);
        if (l.kind == StateKind::FragileLink) {
          actions[s] = cfg.active(l.fragile) ? 0 : 1;
        } else if (l.fragile_node) {
          const auto local = g.fragile_out(l.node);
          std::size_t chosen = npos;
          std::size_t active = 0;
          for (std::size_t k = 0; k < local.size(); ++k) {
            if (cfg.active(local[k])) {
              ++active;
              chosen = k;
            }
          }
          if (active > 1) {
            throw DomainError("fragile node " + std::to_string(l.node) +
                              " may activate at most one link in the refined formulation");
          }
          if (active == 0) {
            if (m.actions(s).size() == local.size()) {
              throw DomainError("fragile node " + std::to_string(l.node) +
                                " cannot switch every link off without a dangling rule");
            }
            chosen = local.size();
          }
          actions[s] = chosen;
        }
      }
      break;
  }
  return Policy(std::move(actions));
}

Configuration configuration_for_policy(const SspModel& m, const DiGraph& g, const Policy& mu) {
  check_policy(m, mu);
  Configuration cfg(g.fragile_count());
  switch (m.origin().formulation) {
    case Formulation::Generic:
      throw DomainError("generic models carry no configuration mapping");
    case Formulation::Simple:
      for (NodeId i = 0; i < m.origin().graph_nodes; ++i) {
        const auto local = g.fragile_out(i);
        // The all-off action of a fragile node is the dangling action.
        for (std::size_t k = 0; k < local.size(); ++k) {
          if ((mu[i] >> k) & 1U) cfg.set(local[k], true);
        }
      }
      break;
    case Formulation::Refined:
      for (StateId s = 0; s < m.state_count(); ++s) {
        const StateLabel& l = m.label(s);
        if (l.kind == StateKind::FragileLink) {
          cfg.set(l.fragile, mu[s] == 0);
        } else if (l.fragile_node) {
          const auto local = g.fragile_out(l.node);
          if (mu[s] < local.size()) cfg.set(local[mu[s]], true);
        }
      }
      break;
  }
  return cfg;
}

Policy all_on_policy(const SspModel& m, const DiGraph& g) {
  if (m.origin().formulation == Formulation::Simple) {
    return policy_for_configuration(m, g, Configuration::full(g.fragile_count()));
  }
  return Policy(std::vector<std::size_t>(m.state_count(), 0));
}

std::vector<StateId> improper_states(const SspModel& m, const Policy& mu) {
  check_policy(m, mu);
  const auto reach = detail::reaching(policy_graph(m, mu), m.target());
  std::vector<StateId> stuck;
  for (StateId s = 0; s < m.state_count(); ++s) {
    if (!reach[s]) stuck.push_back(s);
  }
  return stuck;
}

bool is_proper(const SspModel& m, const Policy& mu) { return improper_states(m, mu).empty(); }

std::optional<Policy> find_proper_policy(const SspModel& m) {
  // Greatest set W such that every state in W has an action staying in W that
  // also moves closer to the target; states are layered by that distance.
  const std::size_t n = m.state_count();
  const StateId target = m.target();
  std::vector<bool> in_w(n, true);
  std::vector<std::size_t> choice(n, 0);
  while (true) {
    std::vector<bool> layered(n, false);
    layered[target] = true;
    bool grew = true;
    while (grew) {
      grew = false;
      for (StateId s = 0; s < n; ++s) {
        if (layered[s] || !in_w[s]) continue;
        for (std::size_t u = 0; u < m.actions(s).size(); ++u) {
          bool stays = true;
          bool progresses = false;
          for (const Transition& t : m.action(s, u).transitions) {
            if (t.probability <= 0.0) continue;
            stays = stays && in_w[t.to];
            progresses = progresses || layered[t.to];
          }
          if (stays && progresses) {
            layered[s] = true;
            choice[s] = u;
            grew = true;
            break;
          }
        }
      }
    }
    if (layered == in_w) break;
    in_w = layered;
  }
  for (StateId s = 0; s < n; ++s) {
    if (!in_w[s]) return std::nullopt;
  }
  return Policy(std::move(choice));
}

ValueFunction evaluate_policy(const SspModel& m, const Policy& mu) {
  check_policy(m, mu);
  std::vector<bool> all(m.state_count(), true);
  return evaluate_subset(m, mu, all);
}

double q_value(const SspModel& m, StateId s, std::size_t u, const ValueFunction& j) {
  double q = 0.0;
  for (const Transition& t : m.action(s, u).transitions) q += t.probability * (t.cost + j[t.to]);
  return q;
}

Policy greedy_policy(const SspModel& m, const ValueFunction& j, Sense sense) {
  std::vector<std::size_t> actions(m.state_count(), 0);
  for (StateId s = 0; s < m.state_count(); ++s) {
    double best = q_value(m, s, 0, j);
    for (std::size_t u = 1; u < m.actions(s).size(); ++u) {
      const double q = q_value(m, s, u, j);
      const double slack = 1e-12 * std::max(1.0, std::abs(best));
      if (sense == Sense::Minimize ? q < best - slack : q > best + slack) {
        best = q;
        actions[s] = u;
      }
    }
  }
  return Policy(std::move(actions));
}

SolveResult value_iteration(const SspModel& m, const ValueIterationOptions& options) {
  if (!(options.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  if (!find_proper_policy(m)) {
    throw ImproperPolicyError({}, "value iteration needs at least one proper policy");
  }
  const std::size_t n = m.state_count();
  double gmax = 0.0;
  for (StateId s = 0; s < n; ++s) {
    for (const Action& a : m.actions(s)) {
      for (const Transition& t : a.transitions) gmax = std::max(gmax, std::abs(t.cost));
    }
  }
  // Under a proper policy the target is hit within n steps with probability
  // at least eta^n, which bounds J* by gmax * n / eta^n.
  const double log_bound = std::log(std::max(gmax, 1e-300) * static_cast<double>(n)) -
                           static_cast<double>(n) * std::log(m.min_positive_probability());
  const double bound = log_bound > 700.0 ? std::numeric_limits<double>::infinity()
                                         : std::exp(log_bound) * (1.0 + 1e-9) + 1.0;

  ValueFunction j(n, 0.0);
  ValueFunction next(n, 0.0);
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    double residual = 0.0;
    double largest = 0.0;
    for (StateId s = 0; s < n; ++s) {
      if (s == m.target()) {
        next[s] = 0.0;
        continue;
      }
      double best = q_value(m, s, 0, j);
      for (std::size_t u = 1; u < m.actions(s).size(); ++u) best = std::min(best, q_value(m, s, u, j));
      next[s] = best;
      residual = std::max(residual, std::abs(best - j[s]));
      largest = std::max(largest, std::abs(best));
    }
    j.swap(next);
    if (largest > bound) {
      throw ImproperPolicyError({}, "value iteration diverged past the bound " +
                                        std::to_string(bound));
    }
    if (residual <= options.tolerance) {
      return {j, greedy_policy(m, j, Sense::Minimize), it, {}};
    }
  }
  throw NonConvergenceError(j, options.max_iterations, "value iteration did not converge");
}

SolveResult policy_iteration(const SspModel& m, const Policy& initial,
                             const PolicyIterationOptions& options) {
  check_policy(m, initial);
  std::vector<bool> include(m.state_count(), true);
  if (options.restrict_to_reachable_from) {
    const StateId from = *options.restrict_to_reachable_from;
    if (from >= m.state_count()) throw RangeError("restriction state out of range");
    include = detail::reachable_from(union_graph(m), {from});
  }
  include[m.target()] = false;

  Policy mu = initial;
  SolveResult result;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    ValueFunction j = evaluate_subset(m, mu, include);
    result.history.push_back(j);
    bool changed = false;
    for (StateId s = 0; s < m.state_count(); ++s) {
      if (!include[s] || m.actions(s).size() < 2) continue;
      const std::size_t current = mu[s];
      const double q_current = q_value(m, s, current, j);
      std::size_t alt = npos;
      double q_alt = 0.0;
      for (std::size_t u = 0; u < m.actions(s).size(); ++u) {
        if (u == current) continue;
        const double q = q_value(m, s, u, j);
        if (alt == npos || better(q, q_alt, options.sense)) {
          alt = u;
          q_alt = q;
        }
      }
      const double gain = options.sense == Sense::Minimize ? q_current - q_alt : q_alt - q_current;
      if (gain > options.tie_tolerance * std::max(1.0, std::abs(q_current))) {
        mu.set(s, alt);
        changed = true;
      }
    }
    if (!changed) {
      result.values = std::move(j);
      result.policy = std::move(mu);
      result.iterations = it;
      return result;
    }
  }
  throw NonConvergenceError(result.history.empty() ? ValueFunction{} : result.history.back(),
                            options.max_iterations, "policy iteration did not terminate");
}

std::optional<Policy> find_target_avoiding_policy(const SspModel& m, StateId from) {
  const std::size_t n = m.state_count();
  if (from >= n) throw RangeError("state out of range");
  // Trap: states that can stay away from the target forever.
  std::vector<bool> trap(n, true);
  trap[m.target()] = false;
  std::vector<std::size_t> keep(n, 0);
  bool shrunk = true;
  while (shrunk) {
    shrunk = false;
    for (StateId s = 0; s < n; ++s) {
      if (!trap[s]) continue;
      bool found = false;
      for (std::size_t u = 0; u < m.actions(s).size() && !found; ++u) {
        bool inside = true;
        for (const Transition& t : m.action(s, u).transitions) {
          if (t.probability > 0.0 && !trap[t.to]) inside = false;
        }
        if (inside) {
          keep[s] = u;
          found = true;
        }
      }
      if (!found) {
        trap[s] = false;
        shrunk = true;
      }
    }
  }

  // Breadth-first search from `from` to the trap over every action.
  std::vector<StateId> parent(n, npos);
  std::vector<std::size_t> via(n, 0);
  std::vector<bool> seen(n, false);
  std::deque<StateId> queue{from};
  seen[from] = true;
  StateId hit = npos;
  while (!queue.empty() && hit == npos) {
    const StateId s = queue.front();
    queue.pop_front();
    if (trap[s]) {
      hit = s;
      break;
    }
    for (std::size_t u = 0; u < m.actions(s).size(); ++u) {
      for (const Transition& t : m.action(s, u).transitions) {
        if (t.probability <= 0.0 || seen[t.to]) continue;
        seen[t.to] = true;
        parent[t.to] = s;
        via[t.to] = u;
        queue.push_back(t.to);
      }
    }
  }
  if (hit == npos) return std::nullopt;

  std::vector<std::size_t> actions(n, 0);
  for (StateId s = 0; s < n; ++s) {
    if (trap[s]) actions[s] = keep[s];
  }
  for (StateId s = hit; parent[s] != npos; s = parent[s]) actions[parent[s]] = via[s];
  return Policy(std::move(actions));
}

std::string ssp_to_json(const SspModel& m, int indent) {
  using nlohmann::ordered_json;
  ordered_json doc;
  const SspOrigin& o = m.origin();
  doc["formulation"] = o.formulation == Formulation::Simple    ? "simple"
                       : o.formulation == Formulation::Refined ? "refined"
                                                               : "generic";
  doc["state_count"] = m.state_count();
  doc["target"] = m.target();
  doc["start"] = o.start == npos ? ordered_json(nullptr) : ordered_json(o.start);
  doc["teleport"] = o.teleport == npos ? ordered_json(nullptr) : ordered_json(o.teleport);
  doc["damping"] = o.damping;
  doc["node"] = o.node == npos ? ordered_json(nullptr) : ordered_json(o.node);
  ordered_json states = ordered_json::array();
  for (StateId s = 0; s < m.state_count(); ++s) {
    const StateLabel& l = m.label(s);
    ordered_json st;
    st["index"] = s;
    st["kind"] = to_string(l.kind);
    st["label"] = l.name;
    if (l.node != npos) st["node"] = l.node;
    if (l.fragile != npos) st["fragile"] = l.fragile;
    ordered_json acts = ordered_json::array();
    for (const Action& a : m.actions(s)) {
      ordered_json ja;
      ja["name"] = a.name;
      ordered_json tr = ordered_json::array();
      for (const Transition& t : a.transitions) {
        tr.push_back({{"to", t.to}, {"p", t.probability}, {"cost", t.cost}});
      }
      ja["transitions"] = std::move(tr);
      acts.push_back(std::move(ja));
    }
    st["actions"] = std::move(acts);
    states.push_back(std::move(st));
  }
  doc["states"] = std::move(states);
  return doc.dump(indent);
}

}  // namespace fraglink
