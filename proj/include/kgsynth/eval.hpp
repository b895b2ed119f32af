#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgsynth/error.hpp"
#include "kgsynth/kg.hpp"
#include "kgsynth/tsv.hpp"

namespace kgsynth {

// tail: (h, r, ?) with gold t.  head: (?, r, t) with gold h.
enum class Direction : std::uint8_t { tail = 0, head = 1 };

constexpr std::string_view direction_name(Direction d) noexcept { return d == Direction::tail ? "tail" : "head"; }

struct Query {
  EntityIndex known = 0;
  RelationIndex relation = 0;
  Direction direction = Direction::tail;
  EntityIndex gold = 0;

  static Query tail_of(const Triple& t) { return {t.head, t.relation, Direction::tail, t.tail}; }
  static Query head_of(const Triple& t) { return {t.tail, t.relation, Direction::head, t.head}; }
};

struct RankingRecord {
  Query query;
  std::size_t gold_rank = 1;
};

inline constexpr std::array<int, 3> kHitsAt = {1, 3, 10};

struct MetricsReport {
  std::size_t count = 0;
  std::array<double, 3> hits{};  // at kHitsAt
  double mr = 0.0;
  double mrr = 0.0;
  bool filtered = true;

  double hits_at(int k) const {
    for (std::size_t i = 0; i < kHitsAt.size(); ++i)
      if (kHitsAt[i] == k) return hits[i];
    throw ValidationError("hits@" + std::to_string(k) + " is not reported");
  }

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Known answers per (known entity, relation, direction) across all splits.
class FilterIndex {
 public:
  FilterIndex() = default;

  explicit FilterIndex(const KnowledgeGraph& kg) {
    kg.for_each_triple([&](Split, const Triple& t) {
      answers_[key(t.head, t.relation, Direction::tail)].push_back(t.tail);
      answers_[key(t.tail, t.relation, Direction::head)].push_back(t.head);
    });
    for (auto& [k, v] : answers_) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }

  std::span<const EntityIndex> answers(EntityIndex known, RelationIndex r, Direction d) const {
    auto it = answers_.find(key(known, r, d));
    if (it == answers_.end()) return {};
    return it->second;
  }

  // True if `candidate` is another known answer to q (never the gold).
  bool excludes(const Query& q, EntityIndex candidate) const {
    if (candidate == q.gold) return false;
    const auto a = answers(q.known, q.relation, q.direction);
    return std::binary_search(a.begin(), a.end(), candidate);
  }

 private:
  static std::uint64_t key(EntityIndex known, RelationIndex r, Direction d) {
    return (static_cast<std::uint64_t>(known) << 32) | (static_cast<std::uint64_t>(r) << 1) |
           static_cast<std::uint64_t>(d);
  }

  std::unordered_map<std::uint64_t, std::vector<EntityIndex>> answers_;
};

// Pessimistic rank: 1 + #{candidates e != gold with score(e) >= score(gold)}.
// With a filter, other known answers are removed from the candidates first.
inline RankingRecord rank_gold(std::span<const double> scores, const Query& q, const FilterIndex* filter) {
  if (q.gold >= scores.size()) throw ValidationError("rank_gold: gold entity has no score");
  const double gold = scores[q.gold];
  if (std::isnan(gold)) throw ValidationError("rank_gold: gold score is NaN");
  std::size_t rank = 1;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (e == q.gold || !(scores[e] >= gold)) continue;
    if (filter && filter->excludes(q, static_cast<EntityIndex>(e))) continue;
    ++rank;
  }
  return {q, rank};
}

// Scores keyed by entity id; every entity must be scored.
inline RankingRecord rank_gold(const std::unordered_map<std::string, double>& scores, const Query& q,
                               const KnowledgeGraph& kg, const FilterIndex* filter) {
  std::vector<double> dense(kg.num_entities());
  if (scores.find(kg.entity_id(q.gold)) == scores.end())
    throw ValidationError("rank_gold: gold entity '" + kg.entity_id(q.gold) + "' missing from scores");
  for (EntityIndex e = 0; e < kg.num_entities(); ++e) {
    auto it = scores.find(kg.entity_id(e));
    if (it == scores.end()) throw ValidationError("rank_gold: no score for entity '" + kg.entity_id(e) + "'");
    dense[e] = it->second;
  }
  return rank_gold(dense, q, filter);
}

inline MetricsReport compute_metrics(std::span<const RankingRecord> records, bool filtered = true) {
  if (records.empty()) throw ValidationError("compute_metrics: no ranking records");
  MetricsReport m;
  m.count = records.size();
  m.filtered = filtered;
  std::array<std::size_t, 3> hit_counts{};
  double rank_sum = 0.0;
  double rr_sum = 0.0;
  for (const auto& r : records) {
    if (r.gold_rank < 1) throw ValidationError("compute_metrics: rank must be >= 1");
    for (std::size_t i = 0; i < kHitsAt.size(); ++i)
      if (r.gold_rank <= static_cast<std::size_t>(kHitsAt[i])) ++hit_counts[i];
    rank_sum += static_cast<double>(r.gold_rank);
    rr_sum += 1.0 / static_cast<double>(r.gold_rank);
  }
  const auto n = static_cast<double>(records.size());
  for (std::size_t i = 0; i < kHitsAt.size(); ++i) m.hits[i] = static_cast<double>(hit_counts[i]) / n;
  m.mr = rank_sum / n;
  m.mrr = rr_sum / n;
  return m;
}

inline std::string format_metrics(const MetricsReport& m) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof buf, "queries\t%zu\n", m.count);
  out += buf;
  for (std::size_t i = 0; i < kHitsAt.size(); ++i) {
    std::snprintf(buf, sizeof buf, "hits@%d\t%.6f\n", kHitsAt[i], m.hits[i]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "mr\t%.6f\nmrr\t%.6f\n", m.mr, m.mrr);
  out += buf;
  out += std::string("ranking\t") + (m.filtered ? "filtered" : "raw") + "\n";
  out += "tie_policy\tpessimistic\n";
  return out;
}

// ---------------------------------------------------------------------------
// External predictions

// Lines `head<TAB>relation<TAB>tail<TAB>head|tail<TAB>c1,c2,...` (best
// first). Every test triple needs both directions. The gold's 1-based
// position is its rank; a gold missing from the list ranks |E|.
inline MetricsReport evaluate_predictions(const KnowledgeGraph& kg, std::string_view text, bool filtered = true) {
  struct Key {
    Triple t;
    Direction d;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = k.t.head;
      h = h * 0x9e3779b97f4a7c15ULL ^ k.t.relation;
      h = h * 0x9e3779b97f4a7c15ULL ^ k.t.tail;
      h = h * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(k.d);
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<Key, std::vector<EntityIndex>, KeyHash> predictions;
  std::vector<std::string_view> f;
  tsv::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) return;
    const auto where = "predictions:" + std::to_string(line_no);
    if (!tsv::split_exact(line, 5, f)) throw ValidationError(where + ": expected 5 tab-separated fields");
    auto h = kg.find_entity(f[0]);
    auto r = kg.find_relation(f[1]);
    auto t = kg.find_entity(f[2]);
    if (!h || !t) throw ValidationError(where + ": unknown entity id");
    if (!r) throw ValidationError(where + ": unknown relation id '" + std::string(f[1]) + "'");
    Direction d;
    if (f[3] == "tail") d = Direction::tail;
    else if (f[3] == "head") d = Direction::head;
    else throw ValidationError(where + ": direction must be head or tail");
    std::vector<EntityIndex> candidates;
    if (!f[4].empty()) {
      for (auto c : tsv::split(f[4], ',')) {
        auto e = kg.find_entity(c);
        if (!e) throw ValidationError(where + ": unknown candidate id '" + std::string(c) + "'");
        candidates.push_back(*e);
      }
    }
    if (!predictions.emplace(Key{{*h, *r, *t}, d}, std::move(candidates)).second)
      throw ValidationError(where + ": duplicate prediction for the same query");
  });

  const FilterIndex filter = filtered ? FilterIndex(kg) : FilterIndex();
  std::vector<RankingRecord> records;
  std::vector<std::string> absent;
  std::size_t n_absent = 0;
  for (const Triple& t : kg.triples(Split::test)) {
    for (Direction d : {Direction::tail, Direction::head}) {
      auto it = predictions.find(Key{t, d});
      const Query q = d == Direction::tail ? Query::tail_of(t) : Query::head_of(t);
      if (it == predictions.end()) {
        if (++n_absent <= 20) {
          const auto ids = kg.to_ids(t);
          absent.push_back("(" + ids.head + ", " + ids.relation + ", " + ids.tail + ", " +
                           std::string(direction_name(d)) + ")");
        }
        continue;
      }
      std::size_t rank = kg.num_entities();
      std::size_t position = 0;
      for (EntityIndex c : it->second) {
        if (filtered && filter.excludes(q, c)) continue;
        ++position;
        if (c == q.gold) {
          rank = position;
          break;
        }
      }
      records.push_back({q, rank});
    }
  }
  if (n_absent > 0) {
    std::string msg = "predictions missing for " + std::to_string(n_absent) + " quer" + (n_absent == 1 ? "y" : "ies") + ": ";
    msg += tsv::join(absent, " ");
    if (n_absent > absent.size()) msg += " ...";
    throw ValidationError(msg);
  }
  return compute_metrics(records, filtered);
}

inline MetricsReport evaluate_predictions_file(const KnowledgeGraph& kg, const std::filesystem::path& path,
                                               bool filtered = true) {
  return evaluate_predictions(kg, tsv::read_file(path), filtered);
}

}  // namespace kgsynth
