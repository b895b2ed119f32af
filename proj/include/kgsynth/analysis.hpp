#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "kgsynth/error.hpp"
#include "kgsynth/kg.hpp"
#include "kgsynth/rewriter.hpp"

namespace kgsynth {

// Column order used by the diagnostic tables: train, valid, test, total.
inline constexpr std::array<std::string_view, 4> kTableColumns = {"Train", "Valid", "Test", "Total"};

// Share of entities (in %) by number of distinct relations on incident
// triples; buckets 1..5 and "Over" (> 5). Only entities that occur in a
// column's triples are counted in that column.
struct RelationCountTable {
  static constexpr std::array<std::string_view, 6> kBuckets = {"1", "2", "3", "4", "5", "Over"};

  std::array<std::array<double, 6>, 4> percent{};  // [column][bucket]
  std::array<std::size_t, 4> entities{};           // denominator per column
};

struct LeakageTable {
  std::array<double, 4> percent{};
  std::array<std::size_t, 4> cases{};
  std::array<std::size_t, 4> leaked{};
};

namespace detail {

inline void bucket_column(const std::vector<std::vector<RelationIndex>>& per_entity, std::array<double, 6>& pct,
                          std::size_t& denom) {
  std::array<std::size_t, 6> counts{};
  denom = 0;
  for (const auto& rels : per_entity) {
    if (rels.empty()) continue;
    ++denom;
    counts[std::min<std::size_t>(rels.size(), 6) - 1]++;
  }
  for (std::size_t b = 0; b < 6; ++b)
    pct[b] = denom ? 100.0 * static_cast<double>(counts[b]) / static_cast<double>(denom) : 0.0;
}

}  // namespace detail

inline RelationCountTable relation_distribution(const KnowledgeGraph& kg) {
  RelationCountTable table;
  std::vector<std::vector<RelationIndex>> total(kg.num_entities());
  auto add = [](std::vector<RelationIndex>& v, RelationIndex r) {
    if (std::find(v.begin(), v.end(), r) == v.end()) v.push_back(r);
  };
  for (Split s : kAllSplits) {
    std::vector<std::vector<RelationIndex>> column(kg.num_entities());
    for (const Triple& t : kg.triples(s)) {
      add(column[t.head], t.relation);
      add(column[t.tail], t.relation);
      add(total[t.head], t.relation);
      add(total[t.tail], t.relation);
    }
    const auto c = static_cast<std::size_t>(s);
    detail::bucket_column(column, table.percent[c], table.entities[c]);
  }
  detail::bucket_column(total, table.percent[3], table.entities[3]);
  return table;
}

// Per (triple, direction): does the answer's name occur in the query
// entity's description as a whole-token span?
inline LeakageTable description_leakage(const KnowledgeGraph& kg) {
  LeakageTable table;
  for (Split s : kAllSplits) {
    const auto c = static_cast<std::size_t>(s);
    for (const Triple& t : kg.triples(s)) {
      const bool tail_leak = contains_token_span(kg.description(t.head), kg.entity_name(t.tail));
      const bool head_leak = contains_token_span(kg.description(t.tail), kg.entity_name(t.head));
      table.cases[c] += 2;
      table.leaked[c] += static_cast<std::size_t>(tail_leak) + static_cast<std::size_t>(head_leak);
    }
    table.cases[3] += table.cases[c];
    table.leaked[3] += table.leaked[c];
  }
  for (std::size_t c = 0; c < 4; ++c)
    table.percent[c] =
        table.cases[c] ? 100.0 * static_cast<double>(table.leaked[c]) / static_cast<double>(table.cases[c]) : 0.0;
  return table;
}

inline std::string format_relation_table(const RelationCountTable& t) {
  std::string out = "#relation";
  for (auto c : kTableColumns) out.append("\t").append(c);
  out += "\n";
  char buf[32];
  for (std::size_t b = 0; b < 6; ++b) {
    out.append(RelationCountTable::kBuckets[b]);
    for (std::size_t c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof buf, "\t%.2f", t.percent[c][b]);
      out += buf;
    }
    out += "\n";
  }
  out += "entities";
  for (std::size_t c = 0; c < 4; ++c) out += "\t" + std::to_string(t.entities[c]);
  out += "\n";
  return out;
}

inline std::string format_leakage_table(const LeakageTable& t) {
  std::string out = "metric";
  for (auto c : kTableColumns) out.append("\t").append(c);
  out += "\npercent";
  char buf[32];
  for (std::size_t c = 0; c < 4; ++c) {
    std::snprintf(buf, sizeof buf, "\t%.2f", t.percent[c]);
    out += buf;
  }
  out += "\nleaked";
  for (std::size_t c = 0; c < 4; ++c) out += "\t" + std::to_string(t.leaked[c]);
  out += "\ncases";
  for (std::size_t c = 0; c < 4; ++c) out += "\t" + std::to_string(t.cases[c]);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Correlation

struct NamedSeries {
  std::string name;
  std::vector<double> values;
};

struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> r;
};

// Pearson r = sum(dx*dy) / sqrt(sum(dx^2) * sum(dy^2)), clamped to [-1, 1].
inline CorrelationMatrix pearson_matrix(const std::vector<NamedSeries>& series) {
  if (series.empty()) throw ValidationError("pearson_matrix: no series");
  const std::size_t n = series.front().values.size();
  if (n < 2) throw ValidationError("pearson_matrix: series need at least 2 values");
  std::vector<std::vector<double>> centered;
  std::vector<double> ss;
  for (const auto& s : series) {
    if (s.values.size() != n) throw ValidationError("pearson_matrix: series '" + s.name + "' has a different length");
    double mean = 0.0;
    for (double v : s.values) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> d(n);
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = s.values[i] - mean;
      sum_sq += d[i] * d[i];
    }
    if (!(sum_sq > 0.0)) throw ValidationError("pearson_matrix: series '" + s.name + "' has zero variance");
    centered.push_back(std::move(d));
    ss.push_back(sum_sq);
  }
  CorrelationMatrix out;
  const std::size_t k = series.size();
  out.r.assign(k, std::vector<double>(k, 1.0));
  for (const auto& s : series) out.labels.push_back(s.name);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      double cross = 0.0;
      for (std::size_t i = 0; i < n; ++i) cross += centered[a][i] * centered[b][i];
      const double r = std::clamp(cross / std::sqrt(ss[a] * ss[b]), -1.0, 1.0);
      out.r[a][b] = out.r[b][a] = r;
    }
  }
  return out;
}

inline std::string format_correlation(const CorrelationMatrix& m) {
  std::string out = "label";
  for (const auto& l : m.labels) out += "\t" + l;
  out += "\n";
  char buf[32];
  for (std::size_t a = 0; a < m.labels.size(); ++a) {
    out += m.labels[a];
    for (double v : m.r[a]) {
      std::snprintf(buf, sizeof buf, "\t%.6f", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// IQR outliers

inline constexpr std::string_view kQuartileConvention = "linear interpolation, h = (n-1)p (numpy default)";

struct IqrResult {
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
  std::vector<double> outliers;  // input order
};

// Quantile p of sorted data: x[floor(h)] + (h - floor(h)) * (x[floor(h)+1] - x[floor(h)]).
inline double quantile_linear(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Outlier iff v < Q1 - 1.5 IQR or v > Q3 + 1.5 IQR.
inline IqrResult iqr_outliers(const std::vector<double>& values) {
  if (values.size() < 4) throw ValidationError("iqr_outliers: need at least 4 values");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  IqrResult r;
  r.q1 = quantile_linear(sorted, 0.25);
  r.q3 = quantile_linear(sorted, 0.75);
  r.iqr = r.q3 - r.q1;
  r.lower_fence = r.q1 - 1.5 * r.iqr;
  r.upper_fence = r.q3 + 1.5 * r.iqr;
  for (double v : values)
    if (v < r.lower_fence || v > r.upper_fence) r.outliers.push_back(v);
  return r;
}

}  // namespace kgsynth
