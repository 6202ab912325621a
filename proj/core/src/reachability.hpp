#pragma once

// Plain adjacency-list reachability shared by the graph and SSP code.

#include <cstddef>
#include <vector>

namespace fraglink::detail {

using Adjacency = std::vector<std::vector<std::size_t>>;

inline Adjacency reverse(const Adjacency& adj) {
  Adjacency rev(adj.size());
  for (std::size_t u = 0; u < adj.size(); ++u) {
    for (std::size_t w : adj[u]) rev[w].push_back(u);
  }
  return rev;
}

inline std::vector<bool> reachable_from(const Adjacency& adj, const std::vector<std::size_t>& sources) {
  std::vector<bool> seen(adj.size(), false);
  std::vector<std::size_t> stack;
  for (std::size_t s : sources) {
    if (!seen[s]) {
      seen[s] = true;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t w : adj[u]) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

inline std::vector<bool> reaching(const Adjacency& adj, std::size_t target) {
  return reachable_from(reverse(adj), {target});
}

/// Bottom strongly connected component among nodes with `bad[u]` set.
/// Assumes the bad set is closed under successors.
inline std::vector<std::size_t> closed_component(const Adjacency& adj, const std::vector<bool>& bad) {
  std::size_t best = adj.size();
  std::size_t best_size = adj.size() + 1;
  std::vector<std::vector<bool>> reach(adj.size());
  for (std::size_t u = 0; u < adj.size(); ++u) {
    if (!bad[u]) continue;
    reach[u] = reachable_from(adj, {u});
    std::size_t size = 0;
    for (bool b : reach[u]) size += b ? 1 : 0;
    if (size < best_size) {
      best_size = size;
      best = u;
    }
  }
  std::vector<std::size_t> component;
  if (best == adj.size()) return component;
  // A node with minimal forward closure lies in a closed component, which is
  // exactly its forward closure.
  for (std::size_t w = 0; w < adj.size(); ++w) {
    if (reach[best][w]) component.push_back(w);
  }
  return component;
}

}  // namespace fraglink::detail
