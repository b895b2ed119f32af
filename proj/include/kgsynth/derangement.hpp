#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgsynth/error.hpp"
#include "kgsynth/kg.hpp"
#include "kgsynth/matching.hpp"
#include "kgsynth/rng.hpp"

namespace kgsynth {

// Forbidden value transitions (from, to) for the constrained derangement.
// Self pairs are never stored.
template <typename T>
class RemovedEdges {
 public:
  RemovedEdges() = default;
  RemovedEdges(std::initializer_list<std::pair<T, T>> pairs) {
    for (const auto& [a, b] : pairs) insert(a, b);
  }

  bool insert(const T& from, const T& to) {
    if (from == to) return false;
    return pairs_.emplace(from, to).second;
  }
  bool contains(const T& from, const T& to) const { return pairs_.count({from, to}) != 0; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  auto begin() const noexcept { return pairs_.begin(); }
  auto end() const noexcept { return pairs_.end(); }

  friend bool operator==(const RemovedEdges&, const RemovedEdges&) = default;

 private:
  std::set<std::pair<T, T>> pairs_;
};

template <typename T>
struct DerangementResult {
  std::vector<T> values;                 // values[i] = items[permutation[i]]
  std::vector<std::size_t> permutation;  // position -> source position
};

namespace detail {

// Dense value ids in order of first appearance.
template <typename T>
std::vector<std::size_t> value_classes(std::span<const T> items, std::size_t& n_classes) {
  std::unordered_map<T, std::size_t> ids;
  std::vector<std::size_t> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out[i] = ids.try_emplace(items[i], ids.size()).first->second;
  n_classes = ids.size();
  return out;
}

template <typename T>
DerangementResult<T> apply_permutation(std::span<const T> items, std::vector<std::size_t> perm) {
  DerangementResult<T> r;
  r.values.reserve(items.size());
  for (std::size_t src : perm) r.values.push_back(items[src]);
  r.permutation = std::move(perm);
  return r;
}

}  // namespace detail

// Attempts of rejection sampling before the constructive fallback. For
// distinct items the acceptance rate is ~1/e, so the fallback is reached
// only for heavily repeated values.
inline constexpr std::size_t kRejectionAttempts = 1000;

// Random value-level derangement: res[i] != items[i] for all i.
// Uniform over derangements when found by rejection.
template <typename T>
DerangementResult<T> derange(std::span<const T> items, std::uint64_t seed) {
  const std::size_t n = items.size();
  if (n <= 1) throw InfeasibleError("derange: no derangement of " + std::to_string(n) + " item(s)");

  std::size_t n_classes = 0;
  const auto cls = detail::value_classes(items, n_classes);
  std::vector<std::size_t> multiplicity(n_classes, 0);
  for (std::size_t c : cls) ++multiplicity[c];
  const std::size_t max_mult = *std::max_element(multiplicity.begin(), multiplicity.end());
  if (max_mult > n / 2)
    throw InfeasibleError("derange: a value occupies " + std::to_string(max_mult) + " of " + std::to_string(n) +
                          " positions; no derangement exists");

  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  for (std::size_t attempt = 0; attempt < kRejectionAttempts; ++attempt) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span(perm));
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = cls[perm[i]] != cls[i];
    if (ok) return detail::apply_permutation(items, std::move(perm));
  }

  // Group positions by value in random group order, then rotate by the
  // largest multiplicity: no run is longer than the shift, so no position
  // receives its own value.
  std::vector<std::size_t> group_order(n_classes);
  std::iota(group_order.begin(), group_order.end(), std::size_t{0});
  rng.shuffle(std::span(group_order));
  std::vector<std::size_t> rank(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) rank[group_order[k]] = k;
  std::vector<std::size_t> sorted(n);
  std::iota(sorted.begin(), sorted.end(), std::size_t{0});
  rng.shuffle(std::span(sorted));
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](std::size_t a, std::size_t b) { return rank[cls[a]] < rank[cls[b]]; });
  for (std::size_t i = 0; i < n; ++i) perm[sorted[i]] = sorted[(i + max_mult) % n];
  return detail::apply_permutation(items, std::move(perm));
}

template <typename T>
DerangementResult<T> derange(const std::vector<T>& items, std::uint64_t seed) {
  return derange(std::span<const T>(items), seed);
}

// Derangement by bipartite matching: position i may take the value at
// position j iff arr[i] != arr[j] and (arr[i], arr[j]) is not removed.
// Positions and adjacency lists are shuffled under the seed before the
// matching so that different seeds give different valid results.
template <typename T>
DerangementResult<T> bipartite_derange(std::span<const T> arr, const RemovedEdges<T>& removed, std::uint64_t seed) {
  const std::size_t n = arr.size();
  if (n == 0) throw InfeasibleError("bipartite_derange: empty input");

  std::size_t n_classes = 0;
  const auto cls = detail::value_classes(arr, n_classes);
  std::vector<const T*> class_value(n_classes, nullptr);
  std::vector<std::vector<std::uint32_t>> class_positions(n_classes);
  for (std::size_t i = 0; i < n; ++i) {
    if (!class_value[cls[i]]) class_value[cls[i]] = &arr[i];
    class_positions[cls[i]].push_back(static_cast<std::uint32_t>(i));
  }
  // The constraint depends only on values: evaluate it once per value pair.
  std::vector<std::vector<std::size_t>> allowed(n_classes);
  for (std::size_t a = 0; a < n_classes; ++a)
    for (std::size_t b = 0; b < n_classes; ++b)
      if (a != b && !removed.contains(*class_value[a], *class_value[b])) allowed[a].push_back(b);

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span(order));

  std::vector<std::vector<std::uint32_t>> adjacency(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& adj = adjacency[k];
    for (std::size_t b : allowed[cls[order[k]]])
      adj.insert(adj.end(), class_positions[b].begin(), class_positions[b].end());
    rng.shuffle(std::span(adj));
  }

  const Matching m = hopcroft_karp(adjacency, n);
  if (m.size < n) {
    std::vector<std::size_t> unmatched;
    for (std::size_t k = 0; k < n; ++k)
      if (m.left_to_right[k] == Matching::kUnmatched) unmatched.push_back(order[k]);
    std::sort(unmatched.begin(), unmatched.end());
    std::string list;
    for (std::size_t i = 0; i < unmatched.size() && i < 20; ++i) list += (i ? "," : "") + std::to_string(unmatched[i]);
    if (unmatched.size() > 20) list += ",...";
    throw InfeasibleError("bipartite_derange: no perfect matching (" + std::to_string(unmatched.size()) +
                          " unmatched position(s): " + list + ")");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < n; ++k) perm[order[k]] = m.left_to_right[k];
  return detail::apply_permutation(arr, std::move(perm));
}

template <typename T>
DerangementResult<T> bipartite_derange(const std::vector<T>& arr, const RemovedEdges<T>& removed,
                                       std::uint64_t seed) {
  return bipartite_derange(std::span<const T>(arr), removed, seed);
}

// (a, b) is removed iff some (h, t) pair carries both relation a and
// relation b across train, valid and test. Pairs are over relation ids.
inline RemovedEdges<std::string> build_removed_edges(const KnowledgeGraph& kg) {
  struct Entry {
    EntityIndex head;
    EntityIndex tail;
    RelationIndex relation;
    auto operator<=>(const Entry&) const = default;
  };
  std::vector<Entry> entries;
  entries.reserve(kg.num_triples());
  kg.for_each_triple([&](Split, const Triple& t) { entries.push_back({t.head, t.tail, t.relation}); });
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  std::set<std::pair<RelationIndex, RelationIndex>> pairs;
  for (std::size_t lo = 0; lo < entries.size();) {
    std::size_t hi = lo + 1;
    while (hi < entries.size() && entries[hi].head == entries[lo].head && entries[hi].tail == entries[lo].tail) ++hi;
    for (std::size_t a = lo; a < hi; ++a)
      for (std::size_t b = lo; b < hi; ++b)
        if (a != b) pairs.emplace(entries[a].relation, entries[b].relation);
    lo = hi;
  }
  RemovedEdges<std::string> out;
  for (const auto& [a, b] : pairs) out.insert(kg.relation_id(a), kg.relation_id(b));
  return out;
}

}  // namespace kgsynth
