#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <queue>
#include <vector>

#include "lvsem/model.hpp"

namespace lvsem::detail {

// Kahn's algorithm; ready nodes leave in increasing `key` order (node index
// when no key is given). Returns fewer than adj.size() nodes on a cycle.
inline std::vector<std::size_t> kahn_order(const std::vector<std::vector<std::size_t>>& adj,
                                           const std::vector<std::size_t>& key = {}) {
  const auto n = adj.size();
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& out : adj)
    for (auto v : out) ++indeg[v];
  auto k = [&](std::size_t v) { return key.empty() ? v : key[v]; };
  auto later = [&](std::size_t a, std::size_t b) { return k(a) != k(b) ? k(a) > k(b) : a > b; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const auto u = ready.top();
    ready.pop();
    order.push_back(u);
    for (auto v : adj[u])
      if (--indeg[v] == 0) ready.push(v);
  }
  return order;
}

// Nodes reachable from v along adj, v excluded unless it lies on a cycle.
// Sorted.
inline std::vector<std::size_t> reach(const std::vector<std::vector<std::size_t>>& adj, std::size_t v) {
  std::vector<bool> seen(adj.size(), false);
  std::vector<std::size_t> stack{v}, out;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (auto w : adj[u]) {
      if (seen[w]) continue;
      seen[w] = true;
      out.push_back(w);
      stack.push_back(w);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> possible_parents_unchecked(const CanonicalModel& model, const CausalDiagram& d,
                                                    std::size_t v);

}  // namespace lvsem::detail
