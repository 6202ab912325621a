#include "fraglink/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "fraglink/errors.hpp"
#include "reachability.hpp"

namespace fraglink {

namespace {

detail::Adjacency adjacency(const DiGraph& g) {
  detail::Adjacency adj(g.node_count());
  for (const Edge& e : g.edges()) adj[e.source].push_back(e.target);
  return adj;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

bool parse_size(std::string_view token, std::size_t& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

DiGraph::DiGraph(std::size_t node_count, std::vector<Edge> edges, ParallelFragile parallel)
    : node_count_(node_count), parallel_(parallel) {
  if (node_count_ == 0) throw ValidationError("graph must have at least one node");

  std::map<std::tuple<NodeId, NodeId, EdgeKind>, std::size_t> slot;
  for (const Edge& e : edges) {
    if (e.source >= node_count_ || e.target >= node_count_) {
      throw RangeError("edge " + std::to_string(e.source) + "->" + std::to_string(e.target) +
                       " outside node range [0, " + std::to_string(node_count_) + ")");
    }
    if (e.multiplicity == 0) throw ValidationError("edge multiplicity must be at least 1");
    const bool distinct = e.kind == EdgeKind::Fragile && parallel == ParallelFragile::KeepDistinct;
    if (!distinct) {
      auto key = std::make_tuple(e.source, e.target, e.kind);
      auto it = slot.find(key);
      if (it != slot.end()) {
        edges_[it->second].multiplicity += e.multiplicity;
        continue;
      }
      slot.emplace(key, edges_.size());
    }
    edges_.push_back(e);
  }

  out_.resize(node_count_);
  fragile_out_.resize(node_count_);
  fragile_id_of_edge_.assign(edges_.size(), npos);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    out_[e.source].push_back(k);
    if (e.kind == EdgeKind::Fragile) {
      fragile_id_of_edge_[k] = fragile_edges_.size();
      fragile_out_[e.source].push_back(fragile_edges_.size());
      fragile_edges_.push_back(k);
    }
  }
}

const Edge& DiGraph::fragile_edge(FragileId id) const {
  if (id >= fragile_edges_.size()) {
    throw DomainError("unknown fragile edge id " + std::to_string(id));
  }
  return edges_[fragile_edges_[id]];
}

std::span<const std::size_t> DiGraph::out_edges(NodeId node) const { return out_.at(node); }

std::span<const FragileId> DiGraph::fragile_out(NodeId node) const { return fragile_out_.at(node); }

std::size_t DiGraph::out_degree(NodeId node) const {
  std::size_t deg = 0;
  for (std::size_t k : out_.at(node)) deg += edges_[k].multiplicity;
  return deg;
}

std::size_t DiGraph::fixed_out_degree(NodeId node) const {
  std::size_t deg = 0;
  for (std::size_t k : out_.at(node)) {
    if (edges_[k].kind == EdgeKind::Fixed) deg += edges_[k].multiplicity;
  }
  return deg;
}

Configuration Configuration::from_mask(std::size_t fragile_count, std::uint64_t mask) {
  if (fragile_count > 64) throw DomainError("mask form supports at most 64 fragile edges");
  if (fragile_count < 64 && (mask >> fragile_count) != 0) {
    throw DomainError("mask references fragile ids beyond " + std::to_string(fragile_count));
  }
  Configuration cfg(fragile_count);
  for (std::size_t k = 0; k < fragile_count; ++k) cfg.active_[k] = ((mask >> k) & 1U) != 0;
  return cfg;
}

Configuration Configuration::from_ids(std::size_t fragile_count, std::span<const FragileId> ids) {
  Configuration cfg(fragile_count);
  for (FragileId id : ids) {
    if (id >= fragile_count) throw DomainError("unknown fragile edge id " + std::to_string(id));
    cfg.active_[id] = true;
  }
  return cfg;
}

std::size_t Configuration::count() const {
  return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), true));
}

std::vector<FragileId> Configuration::active_ids() const {
  std::vector<FragileId> ids;
  for (std::size_t k = 0; k < active_.size(); ++k) {
    if (active_[k]) ids.push_back(k);
  }
  return ids;
}

std::uint64_t Configuration::mask() const {
  if (active_.size() > 64) throw DomainError("mask form supports at most 64 fragile edges");
  std::uint64_t m = 0;
  for (std::size_t k = 0; k < active_.size(); ++k) {
    if (active_[k]) m |= std::uint64_t{1} << k;
  }
  return m;
}

std::string Configuration::bits() const {
  std::string s(active_.size(), '0');
  for (std::size_t k = 0; k < active_.size(); ++k) {
    if (active_[k]) s[k] = '1';
  }
  return s;
}

bool canonical_less(const Configuration& a, const Configuration& b) {
  const std::size_t ca = a.count();
  const std::size_t cb = b.count();
  if (ca != cb) return ca < cb;
  const auto ia = a.active_ids();
  const auto ib = b.active_ids();
  return std::lexicographical_compare(ia.begin(), ia.end(), ib.begin(), ib.end());
}

DanglingRule parse_dangling_rule(std::string_view text) {
  if (text == "self-loop") return DanglingRule::SelfLoop;
  if (text == "uniform") return DanglingRule::UniformToAll;
  if (text == "error" || text == "none") return DanglingRule::None;
  throw ValidationError("unknown dangling rule '" + std::string(text) + "'");
}

std::string_view to_string(DanglingRule rule) {
  switch (rule) {
    case DanglingRule::SelfLoop: return "self-loop";
    case DanglingRule::UniformToAll: return "uniform";
    case DanglingRule::None: return "error";
  }
  return "error";
}

DiGraph load_graph(std::string_view text, ParallelFragile parallel) {
  std::vector<Edge> edges;
  std::size_t header = 0;
  bool have_header = false;
  bool seen_content = false;
  std::size_t max_id = 0;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) {
      if (nl == text.size()) break;
      continue;
    }

    if (!seen_content && tok.size() == 1) {
      seen_content = true;
      if (!parse_size(tok[0], header) || header == 0) {
        throw ParseError(line_no, "node count must be a positive integer");
      }
      have_header = true;
      continue;
    }
    seen_content = true;

    if (tok.size() < 3 || tok.size() > 4) {
      throw ParseError(line_no, "expected '<src> <dst> <fixed|fragile> [multiplicity]'");
    }
    Edge e;
    if (!parse_size(tok[0], e.source) || !parse_size(tok[1], e.target)) {
      throw ParseError(line_no, "node ids must be non-negative integers");
    }
    if (tok[2] == "fixed") {
      e.kind = EdgeKind::Fixed;
    } else if (tok[2] == "fragile") {
      e.kind = EdgeKind::Fragile;
    } else {
      throw ParseError(line_no, "edge kind must be 'fixed' or 'fragile'");
    }
    if (tok.size() == 4 && (!parse_size(tok[3], e.multiplicity) || e.multiplicity == 0)) {
      throw ParseError(line_no, "multiplicity must be a positive integer");
    }
    if (have_header && (e.source >= header || e.target >= header)) {
      throw RangeError("line " + std::to_string(line_no) + ": node id out of range [0, " +
                       std::to_string(header) + ")");
    }
    max_id = std::max({max_id, e.source, e.target});
    edges.push_back(e);
    if (nl == text.size()) break;
  }

  if (!have_header && edges.empty()) throw ParseError(line_no, "empty graph document");
  const std::size_t n = have_header ? header : max_id + 1;
  return DiGraph(n, std::move(edges), parallel);
}

DiGraph load_graph_file(const std::filesystem::path& path, ParallelFragile parallel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open graph file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_graph(buf.str(), parallel);
}

std::string emit_graph(const DiGraph& g) {
  std::ostringstream out;
  out << g.node_count() << '\n';
  for (const Edge& e : g.edges()) {
    out << e.source << ' ' << e.target << ' ' << (e.kind == EdgeKind::Fixed ? "fixed" : "fragile");
    if (e.multiplicity != 1) out << ' ' << e.multiplicity;
    out << '\n';
  }
  return out.str();
}

DiGraph apply_configuration(const DiGraph& g, const Configuration& cfg) {
  if (cfg.size() != g.fragile_count()) {
    throw DomainError("configuration covers " + std::to_string(cfg.size()) +
                      " fragile edges, graph has " + std::to_string(g.fragile_count()));
  }
  std::vector<Edge> edges;
  edges.reserve(g.edges().size());
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    Edge e = g.edges()[k];
    if (e.kind == EdgeKind::Fragile) {
      if (!cfg.active(g.fragile_id(k))) continue;
      e.kind = EdgeKind::Fixed;
    }
    edges.push_back(e);
  }
  return DiGraph(g.node_count(), std::move(edges));
}

DiGraph handle_dangling(const DiGraph& g, DanglingRule rule) {
  std::vector<Edge> extra;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (!g.is_dangling(i)) continue;
    switch (rule) {
      case DanglingRule::None:
        throw ValidationError("node " + std::to_string(i) +
                              " has no outgoing edges and no dangling rule was chosen");
      case DanglingRule::SelfLoop:
        extra.push_back({i, i, 1, EdgeKind::Fixed});
        break;
      case DanglingRule::UniformToAll:
        for (NodeId k = 0; k < g.node_count(); ++k) extra.push_back({i, k, 1, EdgeKind::Fixed});
        break;
    }
  }
  if (extra.empty()) return g;
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  edges.insert(edges.end(), extra.begin(), extra.end());
  return DiGraph(g.node_count(), std::move(edges), g.parallel_fragile());
}

std::vector<bool> nodes_reaching(const DiGraph& g, NodeId target) {
  return detail::reaching(adjacency(g), target);
}

std::vector<bool> nodes_reachable_from(const DiGraph& g, NodeId source) {
  return detail::reachable_from(adjacency(g), {source});
}

std::vector<NodeId> closed_component_missing(const DiGraph& g, NodeId target) {
  const auto adj = adjacency(g);
  auto ok = detail::reaching(adj, target);
  ok.flip();
  return detail::closed_component(adj, ok);
}

InducedSubgraph induced_subgraph(const DiGraph& g, const std::vector<bool>& keep) {
  std::vector<NodeId> original;
  std::vector<NodeId> renumbered(g.node_count(), npos);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (keep.at(i)) {
      renumbered[i] = original.size();
      original.push_back(i);
    }
  }
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    if (renumbered[e.source] == npos || renumbered[e.target] == npos) continue;
    edges.push_back({renumbered[e.source], renumbered[e.target], e.multiplicity, e.kind});
  }
  return {DiGraph(original.size(), std::move(edges), g.parallel_fragile()), std::move(original),
          std::move(renumbered)};
}

}  // namespace fraglink
