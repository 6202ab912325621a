#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "fraglink/errors.hpp"
#include "fraglink/hardness.hpp"
#include "fraglink/oracle.hpp"
#include "fraglink/testing/random_instances.hpp"

namespace fraglink {
namespace {

Cnf3 formula(std::size_t variables, std::vector<std::array<int, 3>> clauses) {
  Cnf3 f;
  f.variable_count = variables;
  for (const auto& c : clauses) {
    Clause3 clause;
    for (std::size_t l = 0; l < 3; ++l) {
      clause[l] = Literal{static_cast<std::size_t>(std::abs(c[l]) - 1), c[l] > 0};
    }
    f.clauses.push_back(clause);
  }
  return f;
}

BruteForceOptions raised_cap() {
  BruteForceOptions opt;
  opt.cap = 40;
  return opt;
}

// Choices of one literal per clause with no complementary pair among them.
std::size_t consistent_selections(const Cnf3& f) {
  std::size_t count = 0;
  std::vector<Literal> chosen;
  std::function<void(std::size_t)> walk = [&](std::size_t j) {
    if (j == f.clauses.size()) {
      ++count;
      return;
    }
    for (const Literal& lit : f.clauses[j]) {
      bool clash = false;
      for (const Literal& other : chosen) {
        clash = clash || (other.variable == lit.variable && other.positive != lit.positive);
      }
      if (clash) continue;
      chosen.push_back(lit);
      walk(j + 1);
      chosen.pop_back();
    }
  };
  walk(0);
  return count;
}

TEST(Gadget, SingleClauseCounts) {
  const GadgetInstance g = gadget_from_3sat(formula(3, {{1, 2, -3}}));
  EXPECT_EQ(g.graph.node_count(), 3u);
  EXPECT_EQ(g.graph.fragile_count(), 3u);
  std::size_t fixed = 0;
  for (const Edge& e : g.graph.edges()) fixed += e.kind == EdgeKind::Fixed;
  EXPECT_EQ(fixed, 3u);
  EXPECT_EQ(g.constraints.size(), 3u);
  EXPECT_EQ(g.source, 0u);
  EXPECT_EQ(g.target, 2u);
  for (FragileId f = 0; f < 3; ++f) EXPECT_EQ(g.graph.fragile_edge(f), (Edge{1, 2, 1, EdgeKind::Fragile}));
  EXPECT_EQ(g.literal_of[2], (Literal{2, false}));
  EXPECT_DOUBLE_EQ(g.personalization.damping(), 0.01);
  EXPECT_DOUBLE_EQ(g.threshold, 1.0 / 77.0);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(g.personalization.z()(i), 1.0 / 3.0);
}

TEST(Gadget, ComplementaryLiteralsAcrossClauses) {
  const GadgetInstance g = gadget_from_3sat(formula(3, {{1, 2, 3}, {-1, 2, 3}}));
  EXPECT_TRUE(g.constraints.forbids(0, 3));
  EXPECT_FALSE(g.constraints.forbids(1, 4));
  EXPECT_EQ(g.constraints.size(), 3u + 3u + 1u);
  EXPECT_DOUBLE_EQ(g.personalization.damping(), 1.0 / 200.0);
}

TEST(Gadget, SizeIsLinearInClauses) {
  testing::Rng rng(1);
  for (std::size_t m = 1; m <= 30; ++m) {
    const GadgetInstance g = gadget_from_3sat(testing::random_cnf3(rng, 5, m));
    EXPECT_EQ(g.graph.node_count(), m + 2);
    EXPECT_EQ(g.graph.fragile_count(), 3 * m);
    EXPECT_EQ(g.graph.edges().size(), 5 * m + 1);  // t->s, s->v_j, v_j->v_j, three links
  }
}

TEST(Gadget, RejectsMalformedFormulas) {
  EXPECT_THROW(gadget_from_3sat(Cnf3{2, {}}), ValidationError);
  EXPECT_THROW(gadget_from_3sat(formula(2, {{1, 2, 3}})), ValidationError);
}

TEST(Separation, SatisfiableSingleClause) {
  const Cnf3 f = formula(3, {{1, 2, -3}});
  const SeparationReport r = verify_separation(gadget_from_3sat(f));
  EXPECT_EQ(r.verdict, Verdict::AtMost77);
  EXPECT_LE(r.best_return_time, 77.0);
  ASSERT_TRUE(r.satisfiable_witness.has_value());
  ASSERT_TRUE(r.assignment.has_value());
  EXPECT_TRUE(satisfies(f, *r.assignment));
}

TEST(Separation, UnsatisfiableCorpusIsAtLeast99) {
  for (const Cnf3& f : testing::unsatisfiable_cnf3_corpus()) {
    ASSERT_FALSE(satisfying_assignment(f).has_value()) << emit_dimacs(f);
    const SeparationReport r = verify_separation(gadget_from_3sat(f), raised_cap());
    EXPECT_EQ(r.verdict, Verdict::AtLeast99) << emit_dimacs(f) << r.best_return_time;
    EXPECT_GE(r.best_return_time, 99.0);
    EXPECT_FALSE(r.satisfiable_witness.has_value());
  }
}

TEST(Separation, AllSignPatternsNeedsRaisedCap) {
  const Cnf3 f = testing::unsatisfiable_cnf3_corpus().front();
  ASSERT_EQ(f.clauses.size(), 8u);
  EXPECT_THROW(verify_separation(gadget_from_3sat(f)), CapExceededError);
}

TEST(Separation, VerdictMatchesTruthTable) {
  testing::Rng rng(2);
  int satisfiable = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t vars = 2 + testing::uniform_index(rng, 2);
    const std::size_t clauses = 1 + testing::uniform_index(rng, 7);
    const Cnf3 f = testing::random_cnf3(rng, vars, clauses);
    const bool sat = satisfying_assignment(f).has_value();
    satisfiable += sat;
    const SeparationReport r = verify_separation(gadget_from_3sat(f), raised_cap());
    EXPECT_NE(r.verdict, Verdict::Indeterminate) << emit_dimacs(f) << r.best_return_time;
    EXPECT_EQ(r.verdict == Verdict::AtMost77, sat) << emit_dimacs(f) << r.best_return_time;
    EXPECT_EQ(r.best_pagerank >= 1.0 / 77.0, sat);
    if (sat) {
      ASSERT_TRUE(r.assignment.has_value());
      EXPECT_TRUE(satisfies(f, *r.assignment));
    }
  }
  EXPECT_GT(satisfiable, 0);
  EXPECT_LT(satisfiable, 50);
}

TEST(Separation, PlantedSatisfiableFormulas) {
  testing::Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Cnf3 f = testing::random_satisfiable_cnf3(rng, 4, 2 + testing::uniform_index(rng, 5));
    const SeparationReport r = verify_separation(gadget_from_3sat(f), raised_cap());
    EXPECT_EQ(r.verdict, Verdict::AtMost77);
  }
}

TEST(Gadget, FeasibleConfigurationsMatchLiteralSelections) {
  testing::Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Cnf3 f = testing::random_cnf3(rng, 3, 1 + testing::uniform_index(rng, 5));
    const GadgetInstance g = gadget_from_3sat(f);
    BruteForceOptions opt = raised_cap();
    const BruteForceResult table = brute_force_constrained(g.graph, g.target, g.constraints,
                                                           g.personalization, DanglingRule::None, opt);
    std::size_t full_cover = 0;
    for (const TableEntry& e : table.table) {
      const Configuration cfg = Configuration::from_mask(g.graph.fragile_count(), e.mask);
      std::size_t covered = 0;
      for (std::size_t j = 0; j < f.clauses.size(); ++j) {
        const std::size_t on = cfg.active(3 * j) + cfg.active(3 * j + 1) + cfg.active(3 * j + 2);
        EXPECT_LE(on, 1u);
        covered += on;
      }
      if (covered == f.clauses.size()) {
        ++full_cover;
        std::vector<bool> a(f.variable_count, false);
        for (FragileId id : cfg.active_ids()) a[g.literal_of[id].variable] = g.literal_of[id].positive;
        EXPECT_TRUE(satisfies(f, a));
      }
    }
    EXPECT_EQ(full_cover, consistent_selections(f));
    EXPECT_EQ(full_cover > 0, satisfying_assignment(f).has_value());
  }
}

TEST(Dimacs, RoundTripAndComments) {
  const Cnf3 f = parse_dimacs("c example\np cnf 3 2\n1 -2 3 0\n-1 2\n-3 0\n%\n0\n");
  EXPECT_EQ(f, formula(3, {{1, -2, 3}, {-1, 2, -3}}));
  EXPECT_EQ(parse_dimacs(emit_dimacs(f)), f);
  testing::Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Cnf3 g = testing::random_cnf3(rng, 1 + testing::uniform_index(rng, 6), 1 + testing::uniform_index(rng, 9));
    EXPECT_EQ(parse_dimacs(emit_dimacs(g)), g);
  }
}

TEST(Dimacs, Errors) {
  EXPECT_THROW(parse_dimacs("1 2 3 0\n"), ParseError);
  EXPECT_THROW(parse_dimacs("p cnf 3\n"), ParseError);
  EXPECT_THROW(parse_dimacs("p cnf 3 1\n1 2 0\n"), ValidationError);
  EXPECT_THROW(parse_dimacs("p cnf 3 2\n1 2 3 0\n"), ValidationError);
  EXPECT_THROW(parse_dimacs("p cnf 3 1\n1 2 4 0\n"), ParseError);
  EXPECT_THROW(parse_dimacs("p cnf 3 1\n1 2 3\n"), ParseError);
  EXPECT_THROW(parse_dimacs("p cnf 3 1\n1 x 3 0\n"), ParseError);
}

TEST(TruthTable, SatisfiesAndLimits) {
  const Cnf3 f = formula(2, {{1, 1, 2}, {-1, -1, -1}});
  EXPECT_TRUE(satisfies(f, {false, true}));
  EXPECT_FALSE(satisfies(f, {true, true}));
  EXPECT_THROW(satisfies(f, {true}), DomainError);
  const auto a = satisfying_assignment(f);
  ASSERT_TRUE(a.has_value());
  EXPECT_EQ(*a, (std::vector<bool>{false, true}));
  EXPECT_THROW(satisfying_assignment(Cnf3{21, {}}), CapExceededError);
  EXPECT_EQ(to_string(Verdict::AtMost77), "<=77");
  EXPECT_EQ(to_string(Verdict::AtLeast99), ">=99");
  EXPECT_EQ(to_string(Verdict::Indeterminate), "indeterminate");
}

}  // namespace
}  // namespace fraglink
