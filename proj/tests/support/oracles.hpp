#pragma once

// Slow, obviously-correct reference implementations used as test oracles.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgsynth/kg.hpp"

namespace kgtest::ref {

// Own UTF-8 decoder for well-formed input: (code point, byte offset).
inline std::vector<std::pair<char32_t, std::size_t>> code_points(std::string_view s) {
  std::vector<std::pair<char32_t, std::size_t>> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = b < 0x80 ? 1 : b < 0xE0 ? 2 : b < 0xF0 ? 3 : 4;
    char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.emplace_back(cp, i);
    i += len;
  }
  return out;
}

inline bool word_char(char32_t c) {
  if (c < 128) return std::isalnum(static_cast<int>(c)) != 0;
  const bool punct = (c >= 0xA0 && c <= 0xBF) || c == 0xD7 || c == 0xF7 || (c >= 0x2000 && c <= 0x206F) ||
                     (c >= 0x3000 && c <= 0x303F) || c == 0xFEFF;
  return !punct;
}

// Quadratic longest-match rewriting: at every code point preceded by a
// non-word character, try every key.
inline std::string rewrite(const std::map<std::string, std::string>& map, std::string_view text) {
  const auto cps = code_points(text);
  auto index_of_byte = [&](std::size_t byte) -> std::ptrdiff_t {
    if (byte == text.size()) return static_cast<std::ptrdiff_t>(cps.size());
    for (std::size_t k = 0; k < cps.size(); ++k)
      if (cps[k].second == byte) return static_cast<std::ptrdiff_t>(k);
    return -1;
  };
  std::string out;
  std::size_t i = 0;
  while (i < cps.size()) {
    const bool start_ok = i == 0 || !word_char(cps[i - 1].first);
    const std::string* best_value = nullptr;
    std::size_t best_len = 0;
    std::size_t best_next = 0;
    if (start_ok) {
      for (const auto& [key, value] : map) {
        const std::size_t b = cps[i].second;
        if (key.empty() || text.substr(b, key.size()) != key) continue;
        const auto next = index_of_byte(b + key.size());
        if (next < 0) continue;
        if (static_cast<std::size_t>(next) < cps.size() && word_char(cps[static_cast<std::size_t>(next)].first))
          continue;
        if (key.size() > best_len) {
          best_len = key.size();
          best_value = &value;
          best_next = static_cast<std::size_t>(next);
        }
      }
    }
    if (best_value) {
      out += *best_value;
      i = best_next;
    } else {
      const std::size_t end = i + 1 < cps.size() ? cps[i + 1].second : text.size();
      out += text.substr(cps[i].second, end - cps[i].second);
      ++i;
    }
  }
  return out;
}

// Whole-token occurrence test by trying every start offset.
inline bool mentions(std::string_view text, std::string_view name) {
  if (name.empty()) return false;
  const auto cps = code_points(text);
  for (std::size_t k = 0; k < cps.size(); ++k) {
    const std::size_t b = cps[k].second;
    if (text.substr(b, name.size()) != name) continue;
    if (k > 0 && word_char(cps[k - 1].first)) continue;
    const std::size_t e = b + name.size();
    if (e < text.size()) {
      auto after = code_points(text.substr(e, 4));
      if (!after.empty() && word_char(after[0].first)) continue;
    }
    return true;
  }
  return false;
}

// Does any permutation p of 0..n-1 give arr[p[i]] != arr[i] for all i and
// avoid every removed (arr[i], arr[p[i]]) pair?
template <typename T>
bool derangement_exists(const std::vector<T>& arr, const std::set<std::pair<T, T>>& removed) {
  std::vector<std::size_t> p(arr.size());
  std::iota(p.begin(), p.end(), std::size_t{0});
  if (arr.empty()) return false;
  do {
    bool ok = true;
    for (std::size_t i = 0; i < arr.size() && ok; ++i)
      ok = arr[p[i]] != arr[i] && !removed.count({arr[i], arr[p[i]]});
    if (ok) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

// Maximum matching size by exhaustive assignment of left vertices (small
// graphs only).
inline std::size_t max_matching_size(std::size_t left, std::size_t right,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> adj(left);
  for (auto [l, r] : edges) adj[l].push_back(r);
  std::vector<bool> used(right, false);
  std::size_t best = 0;
  auto go = [&](auto&& self, std::size_t l, std::size_t size) -> void {
    if (l == left) {
      best = std::max(best, size);
      return;
    }
    if (size + (left - l) <= best) return;
    self(self, l + 1, size);
    for (std::size_t r : adj[l]) {
      if (used[r]) continue;
      used[r] = true;
      self(self, l + 1, size + 1);
      used[r] = false;
    }
  };
  go(go, 0, 0);
  return best;
}

// Rank of the gold among all candidates, counting ties against it and
// skipping other true answers when filtered.
inline std::size_t brute_rank(const std::vector<double>& scores, std::size_t gold,
                              const std::set<std::size_t>& other_answers, bool filtered) {
  std::size_t rank = 1;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (e == gold) continue;
    if (filtered && other_answers.count(e)) continue;
    if (scores[e] >= scores[gold]) ++rank;
  }
  return rank;
}

// Percent table [column][bucket] computed by scanning, per entity, every
// triple of the column.
inline std::array<std::array<double, 6>, 4> relation_buckets(const kgsynth::KnowledgeGraph& kg) {
  std::array<std::array<double, 6>, 4> pct{};
  for (std::size_t col = 0; col < 4; ++col) {
    std::array<std::size_t, 6> count{};
    std::size_t present = 0;
    for (kgsynth::EntityIndex e = 0; e < kg.num_entities(); ++e) {
      std::set<kgsynth::RelationIndex> rels;
      for (std::size_t s = 0; s < 3; ++s) {
        if (col != 3 && col != s) continue;
        for (const auto& t : kg.triples(static_cast<kgsynth::Split>(s)))
          if (t.head == e || t.tail == e) rels.insert(t.relation);
      }
      if (rels.empty()) continue;
      ++present;
      ++count[std::min<std::size_t>(rels.size(), 6) - 1];
    }
    for (std::size_t b = 0; b < 6; ++b)
      pct[col][b] = present ? 100.0 * static_cast<double>(count[b]) / static_cast<double>(present) : 0.0;
  }
  return pct;
}

}  // namespace kgtest::ref
