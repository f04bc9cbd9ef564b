#pragma once

// Exhaustive vertex-cut search used as the reference for the flow-based
// bottleneck computation.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "lvsem/model.hpp"

namespace oracle {

struct BottleneckCase {
  lvsem::CausalDiagram diagram;
  std::vector<std::size_t> sources, sinks;
};

inline BottleneckCase random_case(std::mt19937_64& rng, std::size_t max_nodes) {
  BottleneckCase c;
  const std::size_t n = 1 + rng() % max_nodes;
  c.diagram.node_count = n;
  c.diagram.out.assign(n, {});
  c.diagram.in.assign(n, {});
  std::bernoulli_distribution edge(0.15 + 0.1 * static_cast<double>(rng() % 5));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (edge(rng)) {
        c.diagram.out[i].push_back(j);
        c.diagram.in[j].push_back(i);
      }
  std::bernoulli_distribution pick(0.3);
  for (std::size_t v = 0; v < n; ++v) {
    if (pick(rng)) c.sources.push_back(v);
    if (pick(rng)) c.sinks.push_back(v);
  }
  return c;
}

// True when some source reaches some sink with every vertex on the walk
// outside `cut`.
inline bool connected_avoiding(const lvsem::CausalDiagram& d, const std::vector<std::size_t>& sources,
                               const std::vector<std::size_t>& sinks, std::uint32_t cut) {
  std::vector<bool> seen(d.node_count, false);
  std::vector<std::size_t> stack;
  for (auto s : sources)
    if (!(cut >> s & 1u) && !seen[s]) {
      seen[s] = true;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (std::find(sinks.begin(), sinks.end(), v) != sinks.end()) return true;
    for (auto w : d.out[v])
      if (!(cut >> w & 1u) && !seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
  }
  return false;
}

inline std::size_t brute_bottleneck(const lvsem::CausalDiagram& d, const std::vector<std::size_t>& sources,
                                    const std::vector<std::size_t>& sinks) {
  std::size_t best = d.node_count;
  for (std::uint32_t cut = 0; cut < (1u << d.node_count); ++cut) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(cut));
    if (size < best && !connected_avoiding(d, sources, sinks, cut)) best = size;
  }
  return best;
}

}  // namespace oracle
