#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fraglink/chain.hpp"
#include "fraglink/errors.hpp"
#include "fraglink/oracle.hpp"
#include "fraglink/pri.hpp"
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

TEST(BruteForce, NoFragileLinksSingleEntry) {
  testing::Rng rng(1);
  const DiGraph g = testing::random_strongly_connected(rng, 6, 4);
  const BruteForceResult r = brute_force(g, 2, std::nullopt, DanglingRule::None);
  ASSERT_EQ(r.table.size(), 1u);
  EXPECT_TRUE(r.reachable);
  EXPECT_NEAR(r.best_pagerank, stationary_distribution(g)[2], 1e-12);
}

TEST(BruteForce, TwoLinksFourEntriesInCanonicalOrder) {
  const DiGraph g = load_graph("3\n0 1 fixed\n1 2 fixed\n2 0 fixed\n1 0 fragile\n2 1 fragile\n");
  const BruteForceResult r = brute_force(g, 0, std::nullopt, DanglingRule::None);
  ASSERT_EQ(r.table.size(), 4u);
  EXPECT_EQ(r.evaluated, 4u);
  EXPECT_EQ(r.table[0].mask, 0u);
  EXPECT_EQ(r.table[1].mask, 1u);
  EXPECT_EQ(r.table[2].mask, 2u);
  EXPECT_EQ(r.table[3].mask, 3u);
  EXPECT_EQ(table_to_csv(r).substr(0, 26), "config_bits,pagerank\n00,0.");
  EXPECT_NE(table_to_csv(r).find("\n10,"), std::string::npos);
}

TEST(BruteForce, TableFollowsCanonicalOrderAndBestDominates) {
  testing::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = small_instance(rng, 7, 7);
    const std::size_t d = inst.graph.fragile_count();
    for (Objective objective : {Objective::Maximize, Objective::Minimize}) {
      BruteForceOptions opt;
      opt.objective = objective;
      const BruteForceResult r = brute_force(inst.graph, inst.v, std::nullopt, DanglingRule::None, opt);
      ASSERT_EQ(r.table.size(), std::size_t{1} << d);
      for (std::size_t k = 1; k < r.table.size(); ++k) {
        EXPECT_TRUE(canonical_less(Configuration::from_mask(d, r.table[k - 1].mask),
                                   Configuration::from_mask(d, r.table[k].mask)));
      }
      for (const TableEntry& e : r.table) {
        if (objective == Objective::Maximize) {
          EXPECT_GE(r.best_pagerank, e.pagerank);
        } else {
          EXPECT_LE(r.best_pagerank, e.pagerank);
        }
        EXPECT_NEAR(e.pagerank,
                    configuration_pagerank(inst.graph, inst.v, Configuration::from_mask(d, e.mask),
                                           std::nullopt, DanglingRule::None),
                    1e-15);
      }
      // First entry reaching the best value is the reported one.
      const auto first = std::find_if(r.table.begin(), r.table.end(), [&](const TableEntry& e) {
        return std::abs(e.pagerank - r.best_pagerank) <= 1e-12 * std::max(1.0, r.best_pagerank);
      });
      EXPECT_EQ(r.best.mask(), first->mask);
    }
  }
}

TEST(BruteForce, TiesKeepTheFirstConfiguration) {
  // Node 2 is never visited from 0, so its links change nothing.
  const DiGraph g = load_graph("3\n0 1 fixed\n1 0 fixed\n2 0 fixed\n2 2 fragile\n2 1 fragile\n");
  for (Objective objective : {Objective::Maximize, Objective::Minimize}) {
    BruteForceOptions opt;
    opt.objective = objective;
    const BruteForceResult r = brute_force(g, 0, std::nullopt, DanglingRule::None, opt);
    EXPECT_EQ(r.best, Configuration::empty(2));
    EXPECT_NEAR(r.best_pagerank, 0.5, 1e-12);
  }
}

TEST(BruteForce, AgreesWithPageRankIteration) {
  testing::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = small_instance(rng, 7, 8);
    BruteForceOptions opt;
    opt.keep_table = false;
    const BruteForceResult r = brute_force(inst.graph, inst.v, std::nullopt, DanglingRule::None, opt);
    EXPECT_TRUE(r.table.empty());
    EXPECT_NEAR(r.best_pagerank, pagerank_iteration(inst.graph, inst.v, DanglingRule::None).pagerank, 1e-9);
  }
}

TEST(BruteForce, ResultIndependentOfJobs) {
  testing::Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = small_instance(rng, 8, 9);
    const Personalization pers = testing::random_personalization(rng, inst.graph.node_count(), 0.15);
    BruteForceOptions one;
    BruteForceOptions many;
    many.jobs = 4;
    const BruteForceResult a = brute_force(inst.graph, inst.v, pers, DanglingRule::None, one);
    const BruteForceResult b = brute_force(inst.graph, inst.v, pers, DanglingRule::None, many);
    EXPECT_EQ(a.best, b.best);
    EXPECT_EQ(a.best_pagerank, b.best_pagerank);
    EXPECT_EQ(table_to_csv(a), table_to_csv(b));
  }
}

TEST(BruteForce, CapRefusal) {
  std::string text = "6\n0 1 fixed\n1 2 fixed\n2 3 fixed\n3 4 fixed\n4 5 fixed\n5 0 fixed\n";
  for (int k = 0; k < 5; ++k) text += std::to_string(k) + " " + std::to_string(k + 1 == 5 ? 0 : k + 2) + " fragile\n";
  const DiGraph g = load_graph(text);
  BruteForceOptions opt;
  opt.cap = 4;
  try {
    brute_force(g, 0, std::nullopt, DanglingRule::None, opt);
    FAIL() << "expected a cap refusal";
  } catch (const CapExceededError& e) {
    EXPECT_NE(std::string(e.what()).find("2^5"), std::string::npos);
  }
  opt.cap = 5;
  EXPECT_EQ(brute_force(g, 0, std::nullopt, DanglingRule::None, opt).table.size(), 32u);
}

TEST(BruteForce, DanglingConfigurationsSkippedWithoutRule) {
  // Node 1 keeps at least one link only if one of its fragile links is on.
  const DiGraph g = load_graph("3\n0 1 fixed\n1 0 fragile\n1 2 fragile\n2 0 fixed\n");
  const BruteForceResult none = brute_force(g, 0, std::nullopt, DanglingRule::None);
  EXPECT_EQ(none.skipped, 1u);
  EXPECT_EQ(none.evaluated, 3u);
  const BruteForceResult loop = brute_force(g, 0, std::nullopt, DanglingRule::SelfLoop);
  EXPECT_EQ(loop.skipped, 0u);
  EXPECT_EQ(loop.evaluated, 4u);
}

TEST(BruteForceConstrained, EmptySetMatchesUnconstrained) {
  testing::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = small_instance(rng, 7, 7);
    const BruteForceResult a = brute_force(inst.graph, inst.v, std::nullopt, DanglingRule::None);
    const BruteForceResult b = brute_force_constrained(
        inst.graph, inst.v, ConstraintSet(inst.graph.fragile_count(), {}), std::nullopt, DanglingRule::None);
    EXPECT_EQ(a.best, b.best);
    EXPECT_EQ(a.best_pagerank, b.best_pagerank);
    EXPECT_EQ(a.table.size(), b.table.size());
  }
}

TEST(BruteForceConstrained, ForbiddenPairNeverActiveTogether) {
  // Both shortcuts into 0 help; together they are forbidden.
  const DiGraph g = load_graph("4\n0 1 fixed\n1 2 fixed\n2 3 fixed\n3 0 fixed\n2 0 fragile\n1 0 fragile\n");
  const BruteForceResult free = brute_force(g, 0, std::nullopt, DanglingRule::None);
  EXPECT_EQ(free.best, Configuration::full(2));
  const ConstraintSet c(2, {{1, 0}});
  const BruteForceResult r = brute_force_constrained(g, 0, c, std::nullopt, DanglingRule::None);
  EXPECT_EQ(r.table.size(), 3u);
  EXPECT_EQ(r.best.count(), 1u);
  EXPECT_TRUE(r.best.active(1));
  EXPECT_LT(r.best_pagerank, free.best_pagerank);
}

TEST(BruteForceConstrained, NeverBeatsUnconstrained) {
  testing::Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = small_instance(rng, 7, 8);
    const std::size_t d = inst.graph.fragile_count();
    if (d < 2) continue;
    std::vector<std::pair<FragileId, FragileId>> pairs;
    for (std::size_t k = 0; k < d; ++k) {
      const FragileId a = testing::uniform_index(rng, d);
      const FragileId b = testing::uniform_index(rng, d);
      if (a != b) pairs.emplace_back(a, b);
    }
    const ConstraintSet c(d, pairs);
    const BruteForceResult free = brute_force(inst.graph, inst.v, std::nullopt, DanglingRule::None);
    const BruteForceResult r = brute_force_constrained(inst.graph, inst.v, c, std::nullopt, DanglingRule::None);
    EXPECT_LE(r.best_pagerank, free.best_pagerank + 1e-15);
    EXPECT_TRUE(c.allows(r.best));
    std::size_t admissible = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
      admissible += c.allows(Configuration::from_mask(d, mask));
    }
    EXPECT_EQ(r.table.size(), admissible);
    for (const TableEntry& e : r.table) EXPECT_TRUE(c.allows(Configuration::from_mask(d, e.mask)));
  }
}

TEST(BruteForceConstrained, UnreachableEverywhereIsFlagged) {
  // v = 0 is entered only through fragile link 0; with link 1 instead, the
  // walk from 0 is trapped in {1, 2}.
  const DiGraph g = load_graph("3\n0 1 fixed\n1 2 fixed\n2 0 fragile\n2 1 fragile\n");
  const ConstraintSet c(2, {{0, 1}});
  const BruteForceResult r = brute_force_constrained(g, 0, c, std::nullopt, DanglingRule::None);
  EXPECT_TRUE(r.reachable);
  const DiGraph never = load_graph("3\n0 1 fixed\n1 2 fixed\n2 1 fixed\n1 1 fragile\n");
  const BruteForceResult none = brute_force(never, 0, std::nullopt, DanglingRule::None);
  EXPECT_FALSE(none.reachable);
  EXPECT_EQ(none.best_pagerank, 0.0);
}

TEST(Constraints, ParseNormalizeAndErrors) {
  const ConstraintSet c = load_constraints("# pairs\n3 1\n1 3\n0 2  # trailing\n\n", 4);
  EXPECT_EQ(c.pairs(), (std::vector<std::pair<FragileId, FragileId>>{{0, 2}, {1, 3}}));
  EXPECT_TRUE(c.forbids(3, 1));
  EXPECT_FALSE(c.forbids(0, 1));
  EXPECT_EQ(load_constraints(emit_constraints(c), 4), c);
  EXPECT_THROW(load_constraints("0 4\n", 4), RangeError);
  EXPECT_THROW(load_constraints("2 2\n", 4), ValidationError);
  EXPECT_THROW(load_constraints("0 1 2\n", 4), ParseError);
  EXPECT_THROW(load_constraints("0 -1\n", 4), ParseError);
  EXPECT_THROW(load_constraints("0 x\n", 4), ParseError);
}

TEST(SimulateWalk, TwoCycleHalf) {
  const DiGraph g = load_graph("2\n0 1 fixed\n1 0 fixed\n");
  const WalkEstimate e = simulate_walk(g, 0, std::nullopt, 1'000'000, 42);
  EXPECT_NEAR(e.frequency, 0.5, 0.01);
  EXPECT_NEAR(e.mean_return_time, 2.0, 1e-12);
  EXPECT_EQ(e.seed, 42u);
  EXPECT_EQ(e.steps, 1'000'000u);
}

TEST(SimulateWalk, DampedFrequencyWithinThreeStandardErrors) {
  testing::Rng rng(7);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const DiGraph g = testing::random_instance(rng, {5, 0, 4, testing::Skeleton::Either, true}).graph;
    const Personalization pers = testing::random_personalization(rng, 5, 0.15);
    const double exact = pagerank_direct(transition_matrix(g), pers)[0];
    const WalkEstimate e = simulate_walk(g, 0, pers, 1'000'000, seed);
    EXPECT_GT(e.standard_error, 0.0);
    EXPECT_LE(std::abs(e.frequency - exact), 3 * e.standard_error) << "seed " << seed;
  }
}

TEST(SimulateWalk, LongerWalksGetCloser) {
  testing::Rng rng(8);
  const DiGraph g = testing::random_strongly_connected(rng, 6, 5);
  const double exact = 1.0 / hitting_times(g, 0)(0);
  const WalkEstimate shorter = simulate_walk(g, 0, std::nullopt, 10'000, 9);
  const WalkEstimate longer = simulate_walk(g, 0, std::nullopt, 2'000'000, 9);
  EXPECT_LE(std::abs(longer.frequency - exact), 3 * longer.standard_error);
  EXPECT_LT(longer.standard_error, shorter.standard_error);
  EXPECT_NEAR(longer.mean_return_time, 1.0 / exact, 0.05 / exact);
}

TEST(SimulateWalk, FixedSeedIsBitwiseReproducible) {
  testing::Rng rng(9);
  const DiGraph g = testing::random_strongly_connected(rng, 8, 6);
  const Personalization pers = Personalization::uniform(8, 0.15);
  const WalkEstimate a = simulate_walk(g, 3, pers, 200'000, 123);
  const WalkEstimate b = simulate_walk(g, 3, pers, 200'000, 123);
  EXPECT_EQ(a.frequency, b.frequency);
  EXPECT_EQ(a.standard_error, b.standard_error);
  EXPECT_EQ(a.returns, b.returns);
  EXPECT_EQ(a.mean_return_time, b.mean_return_time);
  const WalkEstimate c = simulate_walk(g, 3, pers, 200'000, 124);
  EXPECT_NE(a.frequency, c.frequency);
  EXPECT_THROW(simulate_walk(g, 3, pers, 0, 1), ValidationError);
  EXPECT_THROW(simulate_walk(g, 8, pers, 10, 1), RangeError);
}

}  // namespace
}  // namespace fraglink
