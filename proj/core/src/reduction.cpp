#include "fraglink/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fraglink/errors.hpp"

namespace fraglink {

namespace {

double expected_cost(const Action& a) {
  double g = 0.0;
  for (const Transition& t : a.transitions) g += t.probability * t.cost;
  return g;
}

std::vector<StateLabel> all_labels(const SspModel& m) {
  std::vector<StateLabel> labels;
  labels.reserve(m.state_count());
  for (StateId s = 0; s < m.state_count(); ++s) labels.push_back(m.label(s));
  return labels;
}

}  // namespace

SspModel cost_to_state_action(const SspModel& m) {
  std::vector<std::vector<Action>> actions(m.state_count());
  for (StateId s = 0; s < m.state_count(); ++s) {
    for (const Action& a : m.actions(s)) {
      Action b = a;
      const double g = expected_cost(a);
      for (Transition& t : b.transitions) t.cost = g;
      actions[s].push_back(std::move(b));
    }
  }
  return SspModel(std::move(actions), all_labels(m), m.origin());
}

ReducedSsp reduce(const SspModel& m) {
  const std::size_t n = m.state_count();
  const StateId target = m.target();

  std::vector<StateId> decision;
  std::vector<StateId> eliminated;
  std::vector<StateId> reduced_index(n, npos);
  std::vector<std::size_t> row(n, npos);
  for (StateId s = 0; s < n; ++s) {
    if (s == target || m.actions(s).size() >= 2) {
      reduced_index[s] = decision.size();
      decision.push_back(s);
    } else {
      row[s] = eliminated.size();
      eliminated.push_back(s);
    }
  }

  const auto r = static_cast<Eigen::Index>(eliminated.size());
  const auto k = static_cast<Eigen::Index>(decision.size());
  Matrix r0 = Matrix::Zero(r, r);
  Matrix q0 = Matrix::Zero(r, k);
  Vector g = Vector::Zero(r);
  for (std::size_t e = 0; e < eliminated.size(); ++e) {
    const Action& a = m.action(eliminated[e], 0);
    const auto i = static_cast<Eigen::Index>(e);
    g(i) = expected_cost(a);
    for (const Transition& t : a.transitions) {
      if (row[t.to] != npos) {
        r0(i, static_cast<Eigen::Index>(row[t.to])) += t.probability;
      } else {
        q0(i, static_cast<Eigen::Index>(reduced_index[t.to])) += t.probability;
      }
    }
  }

  const Matrix f = fundamental_matrix(r0);
  Matrix absorption = f * q0;
  const Vector folded = f * g;
  absorption = absorption.cwiseMax(0.0);

  std::vector<std::vector<Action>> actions(decision.size());
  std::vector<StateLabel> labels;
  for (std::size_t d = 0; d < decision.size(); ++d) {
    const StateId s = decision[d];
    labels.push_back(m.label(s));
    for (const Action& a : m.actions(s)) {
      std::vector<double> p(decision.size(), 0.0);
      double cost = expected_cost(a);
      for (const Transition& t : a.transitions) {
        if (row[t.to] == npos) {
          p[reduced_index[t.to]] += t.probability;
          continue;
        }
        const auto i = static_cast<Eigen::Index>(row[t.to]);
        cost += t.probability * folded(i);
        for (Eigen::Index j = 0; j < k; ++j) {
          p[static_cast<std::size_t>(j)] += t.probability * absorption(i, j);
        }
      }
      Action b{a.name, {}};
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] > 0.0) b.transitions.push_back({j, p[j], cost});
      }
      actions[d].push_back(std::move(b));
    }
  }

  SspOrigin origin = m.origin();
  origin.formulation = Formulation::Generic;
  origin.start = origin.start == npos ? npos : reduced_index[origin.start];
  origin.teleport = origin.teleport == npos ? npos : reduced_index[origin.teleport];

  return ReducedSsp{SspModel(std::move(actions), std::move(labels), origin),
                    m,
                    std::move(decision),
                    std::move(reduced_index),
                    std::move(eliminated),
                    std::move(r0),
                    std::move(q0),
                    std::move(absorption),
                    folded};
}

ValueFunction ReducedSsp::lift(const ValueFunction& reduced_values) const {
  if (reduced_values.size() != decision.size()) {
    throw DomainError("value function does not match the reduced model");
  }
  ValueFunction j(original.state_count(), 0.0);
  for (std::size_t d = 0; d < decision.size(); ++d) j[decision[d]] = reduced_values[d];
  for (std::size_t e = 0; e < eliminated.size(); ++e) {
    const auto i = static_cast<Eigen::Index>(e);
    double value = folded_cost(i);
    for (std::size_t d = 0; d < decision.size(); ++d) {
      value += absorption(i, static_cast<Eigen::Index>(d)) * reduced_values[d];
    }
    j[eliminated[e]] = value;
  }
  return j;
}

Policy ReducedSsp::lift_policy(const Policy& reduced) const {
  if (reduced.size() != decision.size()) throw DomainError("policy does not match the reduced model");
  std::vector<std::size_t> actions(original.state_count(), 0);
  for (std::size_t d = 0; d < decision.size(); ++d) actions[decision[d]] = reduced[d];
  return Policy(std::move(actions));
}

Policy ReducedSsp::restrict_policy(const Policy& full) const {
  if (full.size() != original.state_count()) {
    throw DomainError("policy does not match the original model");
  }
  std::vector<std::size_t> actions(decision.size(), 0);
  for (std::size_t d = 0; d < decision.size(); ++d) actions[d] = full[decision[d]];
  return Policy(std::move(actions));
}

double ReducedSsp::return_time(const ValueFunction& reduced_values) const {
  return fraglink::return_time(original, lift(reduced_values));
}

ReducedSsp reduce_max_pagerank(const DiGraph& g, NodeId v, const std::optional<Personalization>& pers,
                               DanglingRule rule) {
  return reduce(build_refined_ssp(g, v, rule, pers));
}

}  // namespace fraglink
