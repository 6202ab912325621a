#include <gtest/gtest.h>

#include <random>

#include "fraglink/errors.hpp"
#include "fraglink/graph.hpp"
#include "fraglink/testing/random_instances.hpp"

namespace fraglink {
namespace {

TEST(LoadGraph, TwoCycle) {
  const DiGraph g = load_graph("2\n0 1 fixed\n1 0 fixed\n");
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.edges().size(), 2u);
  EXPECT_EQ(g.fragile_count(), 0u);
}

TEST(LoadGraph, FragileEdgeReadBack) {
  const DiGraph g = load_graph("3\n0 1 fixed\n1 2 fragile\n2 0 fixed\n");
  ASSERT_EQ(g.fragile_count(), 1u);
  EXPECT_EQ(g.fragile_edge(0), (Edge{1, 2, 1, EdgeKind::Fragile}));
}

TEST(LoadGraph, NodeCountWithoutHeaderIsOnePlusMaxId) {
  const DiGraph g = load_graph("# comment only\n0 4 fixed  # trailing\n4 0 fixed\n");
  EXPECT_EQ(g.node_count(), 5u);
}

TEST(LoadGraph, ParallelRecordsMergeIntoMultiplicity) {
  const DiGraph g = load_graph("2\n0 1 fixed\n0 1 fixed 2\n1 0 fragile\n1 0 fragile\n");
  ASSERT_EQ(g.edges().size(), 2u);
  EXPECT_EQ(g.edges()[0].multiplicity, 3u);
  EXPECT_EQ(g.out_degree(0), 3u);
  EXPECT_EQ(g.fragile_count(), 1u);
  EXPECT_EQ(g.fragile_edge(0).multiplicity, 2u);
}

TEST(LoadGraph, KeepDistinctFragileRecords) {
  const DiGraph g = load_graph("2\n0 1 fixed\n1 0 fragile\n1 0 fragile\n", ParallelFragile::KeepDistinct);
  EXPECT_EQ(g.fragile_count(), 2u);
  EXPECT_EQ(g.out_degree(1), 2u);
}

TEST(LoadGraph, MalformedLineReportsLineNumber) {
  try {
    load_graph("3\n0 1 fixed\n1 2 sometimes\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(load_graph("3\n0 x fixed\n"), ParseError);
  EXPECT_THROW(load_graph("3\n0 1 fixed 0\n"), ParseError);
  EXPECT_THROW(load_graph("3\n0 1\n"), ParseError);
  EXPECT_THROW(load_graph(""), ParseError);
}

TEST(LoadGraph, IdOutsideHeaderIsRangeError) {
  EXPECT_THROW(load_graph("2\n0 2 fixed\n"), RangeError);
}

TEST(LoadGraph, RoundTripOnRandomGraphs) {
  testing::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    testing::InstanceOptions opt;
    opt.nodes = 1 + testing::uniform_index(rng, 20);
    opt.fragile = testing::uniform_index(rng, 15);
    opt.extra_fixed = testing::uniform_index(rng, 30);
    const DiGraph g = testing::random_instance(rng, opt).graph;
    EXPECT_EQ(load_graph(emit_graph(g)), g) << emit_graph(g);
  }
}

TEST(ApplyConfiguration, FullKeepsEverythingAsFixed) {
  const DiGraph g = load_graph("3\n0 1 fixed\n1 2 fragile\n2 0 fixed\n");
  const DiGraph full = apply_configuration(g, Configuration::full(1));
  EXPECT_EQ(full.edges().size(), 3u);
  EXPECT_EQ(full.fragile_count(), 0u);
  EXPECT_EQ(full.out_degree(1), 1u);
  EXPECT_EQ(full.edges()[1], (Edge{1, 2, 1, EdgeKind::Fixed}));
}

TEST(ApplyConfiguration, EmptyKeepsOnlyFixed) {
  const DiGraph g = load_graph("3\n0 1 fixed\n1 2 fragile\n2 0 fixed\n");
  const DiGraph bare = apply_configuration(g, Configuration::empty(1));
  EXPECT_EQ(bare.edges().size(), 2u);
  EXPECT_TRUE(bare.is_dangling(1));
}

TEST(ApplyConfiguration, WrongSizeIsDomainError) {
  const DiGraph g = load_graph("3\n0 1 fixed\n1 2 fragile\n2 0 fixed\n");
  EXPECT_THROW(apply_configuration(g, Configuration(2)), DomainError);
  EXPECT_THROW(g.fragile_edge(1), DomainError);
}

TEST(ApplyConfiguration, DegreeIsFixedPlusActiveFragile) {
  testing::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    testing::InstanceOptions opt;
    opt.nodes = 2 + testing::uniform_index(rng, 8);
    opt.fragile = testing::uniform_index(rng, 10);
    const DiGraph g = testing::random_instance(rng, opt).graph;
    const std::uint64_t mask = rng() & ((std::uint64_t{1} << g.fragile_count()) - 1);
    const Configuration cfg = Configuration::from_mask(g.fragile_count(), mask);
    const DiGraph h = apply_configuration(g, cfg);
    for (NodeId i = 0; i < g.node_count(); ++i) {
      std::size_t expected = g.fixed_out_degree(i);
      for (FragileId f : g.fragile_out(i)) {
        if (cfg.active(f)) expected += g.fragile_edge(f).multiplicity;
      }
      EXPECT_EQ(h.out_degree(i), expected);
    }
  }
}

TEST(HandleDangling, SelfLoop) {
  const DiGraph g = load_graph("2\n0 1 fixed\n");
  const DiGraph h = handle_dangling(g, DanglingRule::SelfLoop);
  ASSERT_EQ(h.out_edges(1).size(), 1u);
  EXPECT_EQ(h.edges()[h.out_edges(1)[0]].target, 1u);
  EXPECT_EQ(h.out_degree(0), 1u);
}

TEST(HandleDangling, UniformToAll) {
  const DiGraph g = load_graph("2\n0 1 fixed\n");
  const DiGraph h = handle_dangling(g, DanglingRule::UniformToAll);
  EXPECT_EQ(h.out_degree(1), 2u);
  EXPECT_EQ(h.fixed_out_degree(1), 2u);
}

TEST(HandleDangling, NoneNamesTheNode) {
  const DiGraph g = load_graph("3\n0 1 fixed\n1 0 fixed\n");
  try {
    handle_dangling(g, DanglingRule::None);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("node 2"), std::string::npos);
  }
}

TEST(HandleDangling, StronglyConnectedUnchangedAndIdempotent) {
  testing::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const DiGraph g = testing::random_strongly_connected(rng, 2 + testing::uniform_index(rng, 8), 4);
    for (DanglingRule rule : {DanglingRule::SelfLoop, DanglingRule::UniformToAll, DanglingRule::None}) {
      EXPECT_EQ(handle_dangling(g, rule), g);
    }
    const DiGraph bare = apply_configuration(
        load_graph("4\n0 1 fixed\n1 2 fragile\n2 3 fixed\n"), Configuration::empty(1));
    for (DanglingRule rule : {DanglingRule::SelfLoop, DanglingRule::UniformToAll}) {
      const DiGraph once = handle_dangling(bare, rule);
      EXPECT_EQ(handle_dangling(once, rule), once);
      for (NodeId i = 0; i < once.node_count(); ++i) EXPECT_GE(once.out_degree(i), 1u);
    }
  }
}

TEST(Configuration, MaskBitsAndCanonicalOrder) {
  const Configuration a = Configuration::from_mask(4, 0b0101);
  EXPECT_EQ(a.bits(), "1010");
  EXPECT_EQ(a.active_ids(), (std::vector<FragileId>{0, 2}));
  EXPECT_EQ(a.mask(), 0b0101u);
  const Configuration b = Configuration::from_mask(4, 0b0011);
  const Configuration c = Configuration::from_mask(4, 0b1000);
  EXPECT_TRUE(canonical_less(c, b));   // fewer active links first
  EXPECT_TRUE(canonical_less(b, a));   // {0,1} before {0,2}
  EXPECT_FALSE(canonical_less(a, a));
  EXPECT_THROW(Configuration::from_mask(2, 0b100), DomainError);
}

TEST(DanglingRule, ParseAndPrint) {
  for (DanglingRule r : {DanglingRule::SelfLoop, DanglingRule::UniformToAll, DanglingRule::None}) {
    EXPECT_EQ(parse_dangling_rule(to_string(r)), r);
  }
  EXPECT_THROW(parse_dangling_rule("teleport"), ValidationError);
}

TEST(Reachability, ClosedComponentMissingTarget) {
  // 0 -> 1 -> 2 <-> 3; nodes 2 and 3 never reach 0.
  const DiGraph g = load_graph("4\n0 1 fixed\n1 2 fixed\n2 3 fixed\n3 2 fixed\n");
  EXPECT_EQ(closed_component_missing(g, 0), (std::vector<NodeId>{2, 3}));
  EXPECT_TRUE(closed_component_missing(g, 2).empty());
}

TEST(InducedSubgraph, RenumbersAndDropsLeavingEdges) {
  const DiGraph g = load_graph("4\n0 1 fixed\n1 2 fragile\n2 0 fixed\n3 0 fixed\n");
  const InducedSubgraph sub = induced_subgraph(g, {false, true, true, false});
  EXPECT_EQ(sub.graph.node_count(), 2u);
  EXPECT_EQ(sub.original, (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(sub.renumbered[3], npos);
  EXPECT_EQ(sub.graph.fragile_count(), 1u);
  EXPECT_EQ(sub.graph.edges().size(), 1u);
}

}  // namespace
}  // namespace fraglink
