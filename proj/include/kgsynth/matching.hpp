#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "kgsynth/error.hpp"

namespace kgsynth {

struct Matching {
  static constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();

  std::vector<std::size_t> left_to_right;
  std::vector<std::size_t> right_to_left;
  std::size_t size = 0;
};

// Hopcroft-Karp over an adjacency list (left vertex -> right vertices).
// Neighbours are tried in list order, so callers control tie-breaking by
// ordering the lists.
inline Matching hopcroft_karp(const std::vector<std::vector<std::uint32_t>>& adjacency, std::size_t right_size) {
  constexpr std::size_t kNil = Matching::kUnmatched;
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();
  const std::size_t left_size = adjacency.size();

  Matching m;
  m.left_to_right.assign(left_size, kNil);
  m.right_to_left.assign(right_size, kNil);
  std::vector<std::uint32_t> dist(left_size);
  std::vector<std::size_t> cursor(left_size);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> queue;

  auto layer = [&]() {
    queue.clear();
    for (std::size_t u = 0; u < left_size; ++u) {
      if (m.left_to_right[u] == kNil) {
        dist[u] = 0;
        queue.push_back(u);
      } else {
        dist[u] = kInf;
      }
    }
    bool reachable_free = false;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t u = queue[head];
      for (std::uint32_t v : adjacency[u]) {
        const std::size_t w = m.right_to_left[v];
        if (w == kNil) {
          reachable_free = true;
        } else if (dist[w] == kInf) {
          dist[w] = dist[u] + 1;
          queue.push_back(w);
        }
      }
    }
    return reachable_free;
  };

  // Iterative DFS along the layered graph from a free left vertex.
  auto augment = [&](std::size_t root) {
    stack.clear();
    stack.push_back(root);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      if (cursor[u] == adjacency[u].size()) {
        dist[u] = kInf;
        stack.pop_back();
        continue;
      }
      const std::uint32_t v = adjacency[u][cursor[u]];
      const std::size_t w = m.right_to_left[v];
      if (w == kNil) {
        for (std::size_t k = stack.size(); k-- > 0;) {
          const std::size_t uk = stack[k];
          const std::uint32_t vk = adjacency[uk][cursor[uk]];
          m.left_to_right[uk] = vk;
          m.right_to_left[vk] = uk;
        }
        return true;
      }
      if (dist[w] != kInf && dist[w] == dist[u] + 1) {
        stack.push_back(w);
      } else {
        ++cursor[u];
      }
    }
    return false;
  };

  while (layer()) {
    std::fill(cursor.begin(), cursor.end(), 0);
    for (std::size_t u = 0; u < left_size; ++u) {
      if (m.left_to_right[u] == kNil && augment(u)) ++m.size;
    }
  }
  return m;
}

// Maximum-cardinality matching of an edge list. Indices must be in range.
inline Matching maximum_matching(std::size_t left_size, std::size_t right_size,
                                 std::span<const std::pair<std::size_t, std::size_t>> edges) {
  std::vector<std::vector<std::uint32_t>> adjacency(left_size);
  for (const auto& [l, r] : edges) {
    if (l >= left_size || r >= right_size) throw ValidationError("maximum_matching: edge index out of range");
    adjacency[l].push_back(static_cast<std::uint32_t>(r));
  }
  return hopcroft_karp(adjacency, right_size);
}

}  // namespace kgsynth
