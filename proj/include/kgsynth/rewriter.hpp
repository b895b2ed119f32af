#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "kgsynth/error.hpp"
#include "kgsynth/kg.hpp"
#include "kgsynth/parallel.hpp"
#include "kgsynth/utf8.hpp"

namespace kgsynth {

// Original surface name -> replacement surface name.
using NameMap = std::map<std::string, std::string>;

// Builds old -> new for parallel name tables. When several items share an
// old name the first one (file order) decides the replacement; empty names
// are skipped.
inline NameMap make_name_map(std::span<const std::string> old_names, std::span<const std::string> new_names) {
  if (old_names.size() != new_names.size()) throw ValidationError("make_name_map: size mismatch");
  NameMap map;
  for (std::size_t i = 0; i < old_names.size(); ++i)
    if (!old_names[i].empty()) map.try_emplace(old_names[i], new_names[i]);
  return map;
}

// Byte-level prefix tree over the NameMap keys, stored breadth-first with
// each node's outgoing edges in one contiguous, label-sorted run.
class PatternIndex {
 public:
  static constexpr std::uint32_t kNoValue = std::numeric_limits<std::uint32_t>::max();

  struct Match {
    std::size_t length;
    const std::string* replacement;
  };

  PatternIndex() : PatternIndex(NameMap{}) {}

  explicit PatternIndex(const NameMap& map) {
    std::vector<std::string_view> keys;
    keys.reserve(map.size());
    replacements_.reserve(map.size());
    for (const auto& [key, value] : map) {
      if (key.empty()) throw ValidationError("pattern index: empty key");
      keys.push_back(key);
      replacements_.push_back(value);
    }
    build(keys);
  }

  std::size_t size() const noexcept { return replacements_.size(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  // Exact lookup, ignoring boundaries.
  const std::string* find(std::string_view key) const {
    std::uint32_t node = 0;
    for (unsigned char c : key) {
      node = child(node, c);
      if (node == kNoValue) return nullptr;
    }
    const auto v = nodes_[node].value;
    return v == kNoValue ? nullptr : &replacements_[v];
  }
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  // Longest key starting at `pos` whose end is a token boundary. The
  // caller is responsible for the boundary before `pos`.
  std::optional<Match> longest_at(std::string_view text, std::size_t pos) const {
    std::optional<Match> best;
    std::uint32_t node = 0;
    for (std::size_t i = pos; i < text.size(); ++i) {
      node = child(node, static_cast<unsigned char>(text[i]));
      if (node == kNoValue) break;
      const auto v = nodes_[node].value;
      if (v != kNoValue && utf8::is_token_span(text, pos, i + 1))
        best = Match{i + 1 - pos, &replacements_[v]};
    }
    return best;
  }

  // Every key starting at `pos` that ends at a token boundary, shortest first.
  template <class Fn>
  void for_each_match_at(std::string_view text, std::size_t pos, Fn&& fn) const {
    std::uint32_t node = 0;
    for (std::size_t i = pos; i < text.size(); ++i) {
      node = child(node, static_cast<unsigned char>(text[i]));
      if (node == kNoValue) return;
      const auto v = nodes_[node].value;
      if (v != kNoValue && utf8::is_token_span(text, pos, i + 1)) fn(Match{i + 1 - pos, &replacements_[v]});
    }
  }

 private:
  struct Node {
    std::uint32_t first_edge = 0;
    std::uint32_t edge_count = 0;
    std::uint32_t value = kNoValue;
  };

  std::uint32_t child(std::uint32_t node, unsigned char label) const {
    const Node& n = nodes_[node];
    const auto first = labels_.begin() + n.first_edge;
    const auto last = first + n.edge_count;
    const auto it = std::lower_bound(first, last, label);
    if (it == last || *it != label) return kNoValue;
    return targets_[static_cast<std::size_t>(it - labels_.begin())];
  }

  // keys are sorted (std::map order compares bytes as unsigned char).
  void build(const std::vector<std::string_view>& keys) {
    struct Task {
      std::uint32_t node;
      std::size_t lo, hi, depth;
    };
    nodes_.emplace_back();
    std::deque<Task> queue{{0, 0, keys.size(), 0}};
    while (!queue.empty()) {
      auto [node, lo, hi, depth] = queue.front();
      queue.pop_front();
      if (lo < hi && keys[lo].size() == depth) {
        nodes_[node].value = static_cast<std::uint32_t>(lo);
        ++lo;
      }
      nodes_[node].first_edge = static_cast<std::uint32_t>(labels_.size());
      std::uint32_t count = 0;
      while (lo < hi) {
        const auto label = static_cast<unsigned char>(keys[lo][depth]);
        std::size_t end = lo + 1;
        while (end < hi && static_cast<unsigned char>(keys[end][depth]) == label) ++end;
        const auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
        labels_.push_back(label);
        targets_.push_back(id);
        queue.push_back({id, lo, end, depth + 1});
        ++count;
        lo = end;
      }
      nodes_[node].edge_count = count;
    }
    nodes_.shrink_to_fit();
    labels_.shrink_to_fit();
    targets_.shrink_to_fit();
  }

  std::vector<Node> nodes_;
  std::vector<unsigned char> labels_;
  std::vector<std::uint32_t> targets_;
  std::vector<std::string> replacements_;
};

inline PatternIndex build_index(const NameMap& map) { return PatternIndex(map); }

// Single left-to-right pass. At every position preceded by a token boundary
// the longest key that also ends at a boundary is replaced and the scan
// resumes after it. Replacement text is never rescanned.
inline std::string rewrite_text(const PatternIndex& index, std::string_view text) {
  if (index.size() == 0) return std::string(text);
  std::string out;
  out.reserve(text.size());
  std::size_t copied = 0;
  std::size_t pos = 0;
  bool prev_is_word = false;
  while (pos < text.size()) {
    const auto byte = static_cast<unsigned char>(text[pos]);
    if (utf8::is_continuation(byte)) {
      ++pos;
      continue;
    }
    if (!prev_is_word) {
      if (auto m = index.longest_at(text, pos)) {
        out.append(text.substr(copied, pos - copied));
        out.append(*m->replacement);
        pos += m->length;
        copied = pos;
        prev_is_word = pos > 0 && utf8::is_word(utf8::decode_before(text, pos));
        continue;
      }
    }
    std::size_t next = pos;
    prev_is_word = utf8::is_word(utf8::decode_at(text, next));
    pos = next;
  }
  out.append(text.substr(copied));
  return out;
}

// Rewrites every description of kg; order and ids are untouched.
inline std::vector<std::string> rewrite_descriptions(const KnowledgeGraph& kg, const PatternIndex& index,
                                                     std::size_t threads = 1) {
  std::vector<std::string> out(kg.num_entities());
  parallel_for(out.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) out[e] = rewrite_text(index, kg.description(static_cast<EntityIndex>(e)));
  });
  return out;
}

inline std::vector<std::string> rewrite_descriptions(const KnowledgeGraph& kg, const NameMap& map,
                                                     std::size_t threads = 1) {
  return rewrite_descriptions(kg, PatternIndex(map), threads);
}

// True if `needle` occurs in `text` as a whole-token span (same rules as the
// rewriter).
inline bool contains_token_span(std::string_view text, std::string_view needle) {
  if (needle.empty()) return false;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) {
    if (utf8::is_token_span(text, pos, pos + needle.size())) return true;
  }
  return false;
}

}  // namespace kgsynth
