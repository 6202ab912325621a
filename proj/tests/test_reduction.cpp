#include <gtest/gtest.h>

#include "fraglink/errors.hpp"
#include "fraglink/pri.hpp"
#include "fraglink/reduction.hpp"
#include "fraglink/ssp.hpp"
#include "fraglink/testing/random_instances.hpp"

namespace fraglink {
namespace {

testing::Instance small_instance(testing::Rng& rng, std::size_t max_nodes, std::size_t max_fragile) {
  testing::InstanceOptions opt;
  opt.nodes = 2 + testing::uniform_index(rng, max_nodes - 1);
  opt.fragile = testing::uniform_index(rng, max_fragile + 1);
  opt.extra_fixed = testing::uniform_index(rng, opt.nodes + 1);
  return testing::random_instance(rng, opt);
}

std::vector<StateLabel> generic_labels(std::size_t n) {
  std::vector<StateLabel> labels(n);
  for (std::size_t s = 0; s < n; ++s) labels[s].name = "s" + std::to_string(s);
  return labels;
}

double min_over_policies(const SspModel& m) {
  const auto proper = find_proper_policy(m);
  return return_time(m, policy_iteration(m, *proper).values);
}

TEST(CostToStateAction, ConstantCostsUnchanged) {
  const DiGraph g = load_graph("3\n0 1 fixed\n0 2 fragile\n1 2 fixed\n2 0 fixed\n");
  const SspModel m = build_simple_ssp(g, 0, DanglingRule::None);
  const SspModel c = cost_to_state_action(m);
  for (StateId s = 0; s < m.state_count(); ++s) {
    for (std::size_t u = 0; u < m.actions(s).size(); ++u) {
      for (std::size_t k = 0; k < m.action(s, u).transitions.size(); ++k) {
        EXPECT_DOUBLE_EQ(c.action(s, u).transitions[k].cost, m.action(s, u).transitions[k].cost);
      }
    }
  }
}

TEST(CostToStateAction, LinkStateOnCostsOne) {
  const DiGraph g = load_graph("3\n0 1 fixed\n0 2 fragile\n1 2 fixed\n2 0 fixed\n");
  const SspModel c = cost_to_state_action(build_refined_ssp(g, 0, DanglingRule::None));
  const StateId f = 3;
  ASSERT_EQ(c.label(f).kind, StateKind::FragileLink);
  ASSERT_EQ(c.action(f, 0).transitions.size(), 1u);
  EXPECT_EQ(c.action(f, 0).transitions[0].cost, 1.0);
  // Node 0 steps to 1 (cost 1) or to the link state (cost 0) with equal odds.
  for (const Transition& t : c.action(0, 0).transitions) EXPECT_DOUBLE_EQ(t.cost, 0.5);
}

TEST(CostToStateAction, PolicyValuesPreserved) {
  testing::Rng rng(1);
  int checked = 0;
  while (checked < 20) {
    const auto inst = small_instance(rng, 8, 6);
    const SspModel m = build_refined_ssp(inst.graph, inst.v, DanglingRule::None,
                                         testing::random_personalization(rng, inst.graph.node_count(), 0.2));
    const SspModel c = cost_to_state_action(m);
    const Policy mu = testing::random_policy(rng, m);
    const ValueFunction a = evaluate_policy(m, mu);
    const ValueFunction b = evaluate_policy(c, mu);
    for (StateId s = 0; s < m.state_count(); ++s) EXPECT_NEAR(a[s], b[s], 1e-12 * std::max(1.0, a[s]));
    ++checked;
  }
}

TEST(Reduce, AllDecisionStatesIsIdentity) {
  const SspModel m({{{"a", {{1, 1.0, 1.0}}}, {"b", {{2, 1.0, 3.0}}}},
                    {{"a", {{0, 0.5, 1.0}, {2, 0.5, 1.0}}}, {"b", {{2, 1.0, 4.0}}}},
                    {{"stay", {{2, 1.0, 0.0}}}}},
                   generic_labels(3));
  const ReducedSsp r = reduce(m);
  EXPECT_TRUE(r.eliminated.empty());
  ASSERT_EQ(r.model.state_count(), 3u);
  for (StateId s = 0; s < 3; ++s) {
    ASSERT_EQ(r.model.actions(s).size(), m.actions(s).size());
    for (std::size_t u = 0; u < m.actions(s).size(); ++u) {
      const Policy mu({u % m.actions(0).size(), u % m.actions(1).size(), 0});
      EXPECT_NEAR(evaluate_policy(r.model, mu)[s], evaluate_policy(m, mu)[s], 1e-12);
    }
  }
}

TEST(Reduce, PassThroughStateFoldsItsCost) {
  // State 1 has one action: straight to the target at cost 1.
  const SspModel m({{{"via", {{1, 1.0, 1.0}}}, {"direct", {{2, 1.0, 5.0}}}},
                    {{"pass", {{2, 1.0, 1.0}}}},
                    {{"stay", {{2, 1.0, 0.0}}}}},
                   generic_labels(3));
  const ReducedSsp r = reduce(m);
  ASSERT_EQ(r.model.state_count(), 2u);
  EXPECT_EQ(r.eliminated, (std::vector<StateId>{1}));
  EXPECT_EQ(r.decision, (std::vector<StateId>{0, 2}));
  EXPECT_EQ(r.reduced_index[1], npos);
  const Action& via = r.model.action(0, 0);
  double to_target = 0.0;
  double cost = 0.0;
  for (const Transition& t : via.transitions) {
    if (t.to == 1) to_target += t.probability;
    cost += t.probability * t.cost;
  }
  EXPECT_NEAR(to_target, 1.0, 1e-15);
  EXPECT_NEAR(cost, 2.0, 1e-15);
  const ValueFunction full = r.lift(evaluate_policy(r.model, Policy({0, 0})));
  EXPECT_NEAR(full[0], 2.0, 1e-15);
  EXPECT_NEAR(full[1], 1.0, 1e-15);
  EXPECT_EQ(full[2], 0.0);
  EXPECT_EQ(r.lift_policy(Policy({1, 0})), Policy({1, 0, 0}));
  EXPECT_EQ(r.restrict_policy(Policy({1, 0, 0})), Policy({1, 0}));
}

TEST(Reduce, EliminatedCycleIsImproperStructure) {
  const SspModel m({{{"a", {{1, 1.0, 1.0}}}, {"b", {{3, 1.0, 1.0}}}},
                    {{"next", {{2, 1.0, 1.0}}}},
                    {{"back", {{1, 1.0, 1.0}}}},
                    {{"stay", {{3, 1.0, 0.0}}}}},
                   generic_labels(4));
  EXPECT_THROW(reduce(m), ImproperStructureError);
}

TEST(Reduce, ValuesPreservedForEveryPolicy) {
  testing::Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = small_instance(rng, 8, 8);
    const bool damped = trial % 2 == 1;
    const SspModel m = damped ? build_refined_ssp(inst.graph, inst.v, DanglingRule::None,
                                                  testing::random_personalization(rng, inst.graph.node_count(), 0.15))
                              : build_refined_ssp(inst.graph, inst.v, DanglingRule::None);
    const ReducedSsp r = reduce(m);
    // Blocks: absorption rows and reduced actions are stochastic.
    for (Eigen::Index k = 0; k < r.absorption.rows(); ++k) EXPECT_NEAR(r.absorption.row(k).sum(), 1.0, 1e-10);
    for (StateId s = 0; s < r.model.state_count(); ++s) {
      for (const Action& a : r.model.actions(s)) {
        double total = 0.0;
        for (const Transition& t : a.transitions) total += t.probability;
        EXPECT_NEAR(total, 1.0, 1e-10);
      }
    }
    for (int k = 0; k < 10; ++k) {
      const Policy mu = testing::random_policy(rng, r.model);
      const Policy full = r.lift_policy(mu);
      if (!is_proper(m, full)) {
        EXPECT_FALSE(is_proper(r.model, mu));
        continue;
      }
      const ValueFunction jr = evaluate_policy(r.model, mu);
      const ValueFunction jo = evaluate_policy(m, full);
      for (std::size_t s = 0; s < r.decision.size(); ++s) EXPECT_NEAR(jr[s], jo[r.decision[s]], 1e-9);
      const ValueFunction lifted = r.lift(jr);
      for (StateId s = 0; s < m.state_count(); ++s) EXPECT_NEAR(lifted[s], jo[s], 1e-9);
      EXPECT_NEAR(r.return_time(jr), return_time(m, jo), 1e-9);
    }
    // Optimal values agree.
    const auto start = find_proper_policy(r.model);
    ASSERT_TRUE(start.has_value());
    const SolveResult sr = policy_iteration(r.model, *start);
    EXPECT_NEAR(r.return_time(sr.values), min_over_policies(m), 1e-9);
  }
}

TEST(ReduceMaxPagerank, KeepsLinkStatesAndTarget) {
  const DiGraph g =
      load_graph("5\n0 1 fixed\n1 2 fixed\n2 3 fixed\n3 4 fixed\n4 0 fixed\n0 2 fragile\n3 1 fragile\n4 2 fragile\n");
  const ReducedSsp undamped = reduce_max_pagerank(g, 0);
  EXPECT_EQ(undamped.model.state_count(), 4u);
  const ReducedSsp damped = reduce_max_pagerank(g, 0, Personalization::uniform(5, 0.15));
  EXPECT_EQ(damped.model.state_count(), 4u);
  for (StateId s = 0; s + 1 < damped.model.state_count(); ++s) {
    EXPECT_EQ(damped.model.label(s).kind, StateKind::FragileLink);
  }
}

TEST(ReduceMaxPagerank, NoFragileLinksLeavesTargetOnly) {
  testing::Rng rng(3);
  const DiGraph g = testing::random_strongly_connected(rng, 6, 4);
  const ReducedSsp r = reduce_max_pagerank(g, 4);
  ASSERT_EQ(r.model.state_count(), 1u);
  const ValueFunction j{0.0};
  EXPECT_NEAR(r.return_time(j), hitting_times(g, 4)(4), 1e-9);
}

TEST(ReduceMaxPagerank, OptimumMatchesPageRankIteration) {
  testing::Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = small_instance(rng, 8, 8);
    const ReducedSsp r = reduce_max_pagerank(inst.graph, inst.v);
    EXPECT_EQ(r.model.state_count(), inst.graph.fragile_count() + 1);
    const Policy start = r.restrict_policy(all_on_policy(r.original, inst.graph));
    const SolveResult sr = policy_iteration(r.model, start);
    const OptimizationResult pri = pagerank_iteration(inst.graph, inst.v, DanglingRule::None);
    EXPECT_NEAR(1.0 / r.return_time(sr.values), pri.pagerank, 1e-9);
  }
}

}  // namespace
}  // namespace fraglink
