#pragma once

// Directed multigraphs with fixed and fragile (switchable) edges.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fraglink {

using NodeId = std::size_t;
using FragileId = std::size_t;

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

enum class EdgeKind : std::uint8_t { Fixed, Fragile };

struct Edge {
  NodeId source = 0;
  NodeId target = 0;
  std::size_t multiplicity = 1;
  EdgeKind kind = EdgeKind::Fixed;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// How parallel fragile records with the same endpoints are stored. Fixed
/// records are always merged into one record with summed multiplicity.
enum class ParallelFragile { Merge, KeepDistinct };

/// Immutable directed multigraph. Edge records keep their order of first
/// appearance; fragile edges are numbered 0..d-1 in that order.
class DiGraph {
 public:
  DiGraph(std::size_t node_count, std::vector<Edge> edges,
          ParallelFragile parallel = ParallelFragile::Merge);

  std::size_t node_count() const noexcept { return node_count_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::size_t fragile_count() const noexcept { return fragile_edges_.size(); }
  const Edge& fragile_edge(FragileId id) const;
  /// Index into edges() of fragile edge `id`.
  std::size_t fragile_edge_index(FragileId id) const { return fragile_edges_.at(id); }
  /// Fragile id of edge record `edge_index`, or npos for a fixed record.
  FragileId fragile_id(std::size_t edge_index) const { return fragile_id_of_edge_.at(edge_index); }

  /// Indices into edges() of the records leaving `node`, in record order.
  std::span<const std::size_t> out_edges(NodeId node) const;
  /// Fragile ids leaving `node`, ascending.
  std::span<const FragileId> fragile_out(NodeId node) const;

  /// Sum of multiplicities over all records leaving `node`, fixed and fragile.
  std::size_t out_degree(NodeId node) const;
  std::size_t fixed_out_degree(NodeId node) const;

  ParallelFragile parallel_fragile() const noexcept { return parallel_; }

  bool is_dangling(NodeId node) const { return out_edges(node).empty(); }
  /// Only fragile records leave the node.
  bool is_fragile_node(NodeId node) const {
    return !fragile_out(node).empty() && fixed_out_degree(node) == 0;
  }

  friend bool operator==(const DiGraph& a, const DiGraph& b) {
    return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t node_count_;
  ParallelFragile parallel_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> fragile_edges_;
  std::vector<FragileId> fragile_id_of_edge_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<FragileId>> fragile_out_;
};

/// A subset F+ of the fragile edges marked active.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::size_t fragile_count, bool all_active = false)
      : active_(fragile_count, all_active) {}

  static Configuration full(std::size_t fragile_count) { return Configuration(fragile_count, true); }
  static Configuration empty(std::size_t fragile_count) { return Configuration(fragile_count, false); }
  /// Bit k of `mask` activates fragile edge k. Requires fragile_count <= 64.
  static Configuration from_mask(std::size_t fragile_count, std::uint64_t mask);
  static Configuration from_ids(std::size_t fragile_count, std::span<const FragileId> ids);

  std::size_t size() const noexcept { return active_.size(); }
  bool active(FragileId id) const { return active_.at(id); }
  void set(FragileId id, bool on) { active_.at(id) = on; }
  std::size_t count() const;

  std::vector<FragileId> active_ids() const;
  std::uint64_t mask() const;
  /// One character per fragile id, '1' when active, id 0 first.
  std::string bits() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<bool> active_;
};

/// Canonical order used for deterministic tie-breaking: fewer active edges
/// first, then lexicographic on the ascending id lists.
bool canonical_less(const Configuration& a, const Configuration& b);

enum class DanglingRule { SelfLoop, UniformToAll, None };

DanglingRule parse_dangling_rule(std::string_view text);
std::string_view to_string(DanglingRule rule);

/// Parses the edge-list text format. Parallel records of the same kind are
/// merged unless `parallel` keeps fragile ones apart.
DiGraph load_graph(std::string_view text, ParallelFragile parallel = ParallelFragile::Merge);
DiGraph load_graph_file(const std::filesystem::path& path,
                        ParallelFragile parallel = ParallelFragile::Merge);
std::string emit_graph(const DiGraph& g);

/// All fixed edges of `g` plus the active fragile ones, every record fixed.
DiGraph apply_configuration(const DiGraph& g, const Configuration& cfg);

/// Gives every node without out-edges (fixed or fragile) the edges of `rule`.
DiGraph handle_dangling(const DiGraph& g, DanglingRule rule);

/// Whether each node can reach `target` along edge records of `g`.
std::vector<bool> nodes_reaching(const DiGraph& g, NodeId target);
/// Whether each node is reachable from `source` (source itself included).
std::vector<bool> nodes_reachable_from(const DiGraph& g, NodeId source);

/// A closed strongly connected component made of nodes that cannot reach
/// `target`; empty when every node reaches it.
std::vector<NodeId> closed_component_missing(const DiGraph& g, NodeId target);

struct InducedSubgraph {
  DiGraph graph;
  std::vector<NodeId> original;      // new id -> old id
  std::vector<NodeId> renumbered;    // old id -> new id, npos if dropped
};

/// Restriction of `g` to `keep`. Edges leaving the kept set are dropped.
InducedSubgraph induced_subgraph(const DiGraph& g, const std::vector<bool>& keep);

}  // namespace fraglink
