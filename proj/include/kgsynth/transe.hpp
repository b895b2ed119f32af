#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgsynth/error.hpp"
#include "kgsynth/eval.hpp"
#include "kgsynth/kg.hpp"
#include "kgsynth/parallel.hpp"
#include "kgsynth/rng.hpp"
#include "kgsynth/tsv.hpp"

namespace kgsynth {

enum class Norm { l1, l2 };

inline Norm parse_norm(std::string_view s) {
  if (s == "l1" || s == "L1") return Norm::l1;
  if (s == "l2" || s == "L2") return Norm::l2;
  throw ValidationError("norm must be l1 or l2");
}

constexpr std::string_view norm_name(Norm n) noexcept { return n == Norm::l1 ? "l1" : "l2"; }

// Translational embedding: score(h, r, t) = -|| e_h + e_r - e_t ||.
// Vectors are stored row-major, one row per entity / relation.
struct EmbeddingModel {
  std::size_t dim = 0;
  Norm norm = Norm::l1;
  double margin = 1.0;
  std::vector<double> entities;
  std::vector<double> relations;

  std::size_t num_entities() const noexcept { return dim ? entities.size() / dim : 0; }
  std::size_t num_relations() const noexcept { return dim ? relations.size() / dim : 0; }

  std::span<double> entity(EntityIndex e) { return {entities.data() + std::size_t{e} * dim, dim}; }
  std::span<const double> entity(EntityIndex e) const { return {entities.data() + std::size_t{e} * dim, dim}; }
  std::span<double> relation(RelationIndex r) { return {relations.data() + std::size_t{r} * dim, dim}; }
  std::span<const double> relation(RelationIndex r) const {
    return {relations.data() + std::size_t{r} * dim, dim};
  }

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;
};

struct TrainConfig {
  std::size_t dim = 100;
  double margin = 1.0;
  Norm norm = Norm::l1;
  double learning_rate = 0.01;
  std::size_t epochs = 100;
  std::size_t negatives_per_positive = 1;
  std::uint64_t seed = 0;
  // 1 = deterministic. More workers update shared vectors without locks and
  // are only statistically reproducible.
  std::size_t threads = 1;
};

namespace detail {

inline void normalize_l2(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double n = std::sqrt(sq);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

}  // namespace detail

// Uniform in [-6/sqrt(dim), 6/sqrt(dim)], then unit L2 norm for entities
// and relations.
inline EmbeddingModel init_model(const KnowledgeGraph& kg, std::size_t dim, std::uint64_t seed,
                                 Norm norm = Norm::l1, double margin = 1.0) {
  if (dim == 0) throw ValidationError("init_model: dim must be >= 1");
  if (!(margin > 0.0)) throw ValidationError("init_model: margin must be > 0");
  EmbeddingModel m;
  m.dim = dim;
  m.norm = norm;
  m.margin = margin;
  m.entities.resize(kg.num_entities() * dim);
  m.relations.resize(kg.num_relations() * dim);
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  Rng rng(derive_seed(seed, {hash_label("init")}));
  for (double& x : m.entities) x = rng.uniform(-bound, bound);
  for (double& x : m.relations) x = rng.uniform(-bound, bound);
  for (EntityIndex e = 0; e < m.num_entities(); ++e) detail::normalize_l2(m.entity(e));
  for (RelationIndex r = 0; r < m.num_relations(); ++r) detail::normalize_l2(m.relation(r));
  return m;
}

inline double distance(const EmbeddingModel& m, EntityIndex h, RelationIndex r, EntityIndex t) {
  const auto vh = m.entity(h), vr = m.relation(r), vt = m.entity(t);
  double acc = 0.0;
  if (m.norm == Norm::l1) {
    for (std::size_t i = 0; i < m.dim; ++i) acc += std::abs(vh[i] + vr[i] - vt[i]);
    return acc;
  }
  for (std::size_t i = 0; i < m.dim; ++i) {
    const double x = vh[i] + vr[i] - vt[i];
    acc += x * x;
  }
  return std::sqrt(acc);
}

inline double score_triple(const EmbeddingModel& m, EntityIndex h, RelationIndex r, EntityIndex t) {
  if (h >= m.num_entities() || t >= m.num_entities() || r >= m.num_relations())
    throw ValidationError("score_triple: index out of range");
  return -distance(m, h, r, t);
}

inline double score_triple(const EmbeddingModel& m, const KnowledgeGraph& kg, std::string_view h,
                           std::string_view r, std::string_view t) {
  auto hi = kg.find_entity(h), ti = kg.find_entity(t);
  auto ri = kg.find_relation(r);
  if (!hi || !ti) throw ValidationError("score_triple: unknown entity id");
  if (!ri) throw ValidationError("score_triple: unknown relation id");
  return score_triple(m, *hi, *ri, *ti);
}

// max(0, margin + d(pos) - d(neg))
inline double margin_loss(const EmbeddingModel& m, const Triple& pos, const Triple& neg) {
  return std::max(0.0, m.margin + distance(m, pos.head, pos.relation, pos.tail) -
                           distance(m, neg.head, neg.relation, neg.tail));
}

// Gradient of margin_loss with respect to every vector it touches; repeated
// indices are accumulated.
struct SparseGradient {
  std::vector<std::pair<EntityIndex, std::vector<double>>> entities;
  std::vector<std::pair<RelationIndex, std::vector<double>>> relations;

  template <typename Index>
  static std::vector<double>& slot(std::vector<std::pair<Index, std::vector<double>>>& rows, Index idx,
                                   std::size_t dim) {
    for (auto& [i, v] : rows)
      if (i == idx) return v;
    rows.emplace_back(idx, std::vector<double>(dim, 0.0));
    return rows.back().second;
  }
};

namespace detail {

// d||x||/dx with x = h + r - t.
inline void distance_gradient(const EmbeddingModel& m, const Triple& t, std::vector<double>& g) {
  g.resize(m.dim);
  const auto vh = m.entity(t.head), vr = m.relation(t.relation), vt = m.entity(t.tail);
  if (m.norm == Norm::l1) {
    for (std::size_t i = 0; i < m.dim; ++i) {
      const double x = vh[i] + vr[i] - vt[i];
      g[i] = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    }
    return;
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < m.dim; ++i) {
    g[i] = vh[i] + vr[i] - vt[i];
    sq += g[i] * g[i];
  }
  const double n = std::sqrt(sq);
  for (double& x : g) x = n > 0.0 ? x / n : 0.0;
}

}  // namespace detail

inline SparseGradient margin_loss_gradient(const EmbeddingModel& m, const Triple& pos, const Triple& neg) {
  SparseGradient grad;
  if (margin_loss(m, pos, neg) <= 0.0) return grad;
  std::vector<double> gp, gn;
  detail::distance_gradient(m, pos, gp);
  detail::distance_gradient(m, neg, gn);
  auto add = [&](auto& rows, auto idx, const std::vector<double>& g, double sign) {
    auto& v = SparseGradient::slot(rows, idx, m.dim);
    for (std::size_t i = 0; i < m.dim; ++i) v[i] += sign * g[i];
  };
  add(grad.entities, pos.head, gp, +1.0);
  add(grad.relations, pos.relation, gp, +1.0);
  add(grad.entities, pos.tail, gp, -1.0);
  add(grad.entities, neg.head, gn, -1.0);
  add(grad.relations, neg.relation, gn, -1.0);
  add(grad.entities, neg.tail, gn, +1.0);
  return grad;
}

// Corrupts head or tail with a uniformly drawn different entity.
inline Triple corrupt(const Triple& t, std::size_t n_entities, Rng& rng) {
  Triple neg = t;
  const bool head = rng.coin();
  EntityIndex& slot = head ? neg.head : neg.tail;
  const EntityIndex original = slot;
  if (n_entities < 2) return neg;
  do {
    slot = static_cast<EntityIndex>(rng.below(n_entities));
  } while (slot == original);
  return neg;
}

using ProbeBatch = std::vector<std::pair<Triple, Triple>>;

// Fixed (positive, negative) pairs for monitoring the training loss.
inline ProbeBatch make_probe_batch(const KnowledgeGraph& kg, std::size_t size, std::uint64_t seed) {
  const auto train = kg.triples(Split::train);
  ProbeBatch batch;
  if (train.empty()) return batch;
  Rng rng(derive_seed(seed, {hash_label("probe")}));
  for (std::size_t i = 0; i < size; ++i) {
    const Triple& pos = train[rng.below(train.size())];
    batch.emplace_back(pos, corrupt(pos, kg.num_entities(), rng));
  }
  return batch;
}

inline double batch_loss(const EmbeddingModel& m, const ProbeBatch& batch) {
  double total = 0.0;
  for (const auto& [pos, neg] : batch) total += margin_loss(m, pos, neg);
  return total;
}

namespace detail {

struct PlainAccess {
  static double load(const double& x) { return x; }
  static void store(double& x, double v) { x = v; }
  static void mark(std::uint8_t& flag) { flag = 1; }
};

struct RelaxedAccess {
  static double load(const double& x) {
    return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
  }
  static void store(double& x, double v) { std::atomic_ref<double>(x).store(v, std::memory_order_relaxed); }
  static void mark(std::uint8_t& flag) { std::atomic_ref<std::uint8_t>(flag).store(1, std::memory_order_relaxed); }
};

// One SGD pass over order[begin, end).
template <typename Access>
void sgd_range(EmbeddingModel& m, std::span<const Triple> train, std::span<const std::size_t> order,
               const TrainConfig& cfg, Rng& rng, std::vector<std::uint8_t>& touched) {
  const std::size_t dim = m.dim;
  std::vector<double> xp(dim), xn(dim), gp(dim), gn(dim);
  auto residual = [&](const Triple& t, std::vector<double>& x) {
    double* h = m.entities.data() + std::size_t{t.head} * dim;
    double* r = m.relations.data() + std::size_t{t.relation} * dim;
    double* tl = m.entities.data() + std::size_t{t.tail} * dim;
    double d = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      x[i] = Access::load(h[i]) + Access::load(r[i]) - Access::load(tl[i]);
      d += m.norm == Norm::l1 ? std::abs(x[i]) : x[i] * x[i];
    }
    return m.norm == Norm::l1 ? d : std::sqrt(d);
  };
  auto grad_of = [&](const std::vector<double>& x, double d, std::vector<double>& g) {
    for (std::size_t i = 0; i < dim; ++i) {
      if (m.norm == Norm::l1) g[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
      else g[i] = d > 0.0 ? x[i] / d : 0.0;
    }
  };
  auto step = [&](double* v, const std::vector<double>& g, double scale) {
    for (std::size_t i = 0; i < dim; ++i) Access::store(v[i], Access::load(v[i]) - scale * g[i]);
  };
  const double lr = cfg.learning_rate;
  for (std::size_t idx : order) {
    const Triple& pos = train[idx];
    for (std::size_t k = 0; k < cfg.negatives_per_positive; ++k) {
      const Triple neg = corrupt(pos, m.num_entities(), rng);
      const double dp = residual(pos, xp);
      const double dn = residual(neg, xn);
      if (m.margin + dp - dn <= 0.0) continue;
      if (lr == 0.0) continue;
      grad_of(xp, dp, gp);
      grad_of(xn, dn, gn);
      double* ph = m.entities.data() + std::size_t{pos.head} * dim;
      double* pr = m.relations.data() + std::size_t{pos.relation} * dim;
      double* pt = m.entities.data() + std::size_t{pos.tail} * dim;
      double* nh = m.entities.data() + std::size_t{neg.head} * dim;
      double* nr = m.relations.data() + std::size_t{neg.relation} * dim;
      double* nt = m.entities.data() + std::size_t{neg.tail} * dim;
      step(ph, gp, lr);
      step(pr, gp, lr);
      step(pt, gp, -lr);
      step(nh, gn, -lr);
      step(nr, gn, -lr);
      step(nt, gn, lr);
      Access::mark(touched[pos.head]);
      Access::mark(touched[pos.tail]);
      Access::mark(touched[neg.head]);
      Access::mark(touched[neg.tail]);
    }
  }
}

}  // namespace detail

using EpochCallback = std::function<void(std::size_t epoch, const EmbeddingModel&)>;

// Margin-ranking SGD with uniform head/tail corruption. Entity vectors that
// were updated are renormalized to unit length after every epoch.
inline EmbeddingModel train(const KnowledgeGraph& kg, const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  const auto triples = kg.triples(Split::train);
  if (triples.empty()) throw ValidationError("train: empty train split");
  if (cfg.negatives_per_positive == 0) throw ValidationError("train: negatives_per_positive must be >= 1");
  EmbeddingModel m = init_model(kg, cfg.dim, cfg.seed, cfg.norm, cfg.margin);
  const std::size_t workers = std::min(resolve_threads(cfg.threads), triples.size());
  std::vector<std::size_t> order(triples.size());
  std::vector<std::uint8_t> touched(kg.num_entities());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(cfg.seed, {hash_label("order"), epoch}));
    shuffle_rng.shuffle(std::span(order));
    std::fill(touched.begin(), touched.end(), 0);
    if (workers <= 1) {
      Rng rng(derive_seed(cfg.seed, {hash_label("negatives"), epoch, 0}));
      detail::sgd_range<detail::PlainAccess>(m, triples, order, cfg, rng, touched);
    } else {
      const std::size_t chunk = (order.size() + workers - 1) / workers;
      parallel_for(workers, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t w = begin; w < end; ++w) {
          const std::size_t lo = std::min(order.size(), w * chunk);
          const std::size_t hi = std::min(order.size(), lo + chunk);
          Rng rng(derive_seed(cfg.seed, {hash_label("negatives"), epoch, w}));
          detail::sgd_range<detail::RelaxedAccess>(
              m, triples, std::span<const std::size_t>(order).subspan(lo, hi - lo), cfg, rng, touched);
        }
      });
    }
    for (EntityIndex e = 0; e < kg.num_entities(); ++e)
      if (touched[e]) detail::normalize_l2(m.entity(e));
    for (double x : m.entities)
      if (!std::isfinite(x)) throw DivergenceError("train: non-finite entity vector after epoch " + std::to_string(epoch));
    for (double x : m.relations)
      if (!std::isfinite(x))
        throw DivergenceError("train: non-finite relation vector after epoch " + std::to_string(epoch));
    if (on_epoch) on_epoch(epoch, m);
  }
  return m;
}

// Ranks every triple of `split` in both directions against all entities.
inline MetricsReport evaluate_model(const EmbeddingModel& m, const KnowledgeGraph& kg, Split split,
                                    bool filtered = true, std::size_t threads = 1) {
  const auto triples = kg.triples(split);
  if (m.num_entities() != kg.num_entities() || m.num_relations() != kg.num_relations())
    throw ValidationError("evaluate_model: model does not match the graph");
  const FilterIndex filter = filtered ? FilterIndex(kg) : FilterIndex();
  std::vector<RankingRecord> records(triples.size() * 2);
  parallel_for(triples.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> scores(kg.num_entities());
    for (std::size_t i = begin; i < end; ++i) {
      const Triple& t = triples[i];
      for (EntityIndex e = 0; e < kg.num_entities(); ++e) scores[e] = -distance(m, t.head, t.relation, e);
      records[2 * i] = rank_gold(scores, Query::tail_of(t), filtered ? &filter : nullptr);
      for (EntityIndex e = 0; e < kg.num_entities(); ++e) scores[e] = -distance(m, e, t.relation, t.tail);
      records[2 * i + 1] = rank_gold(scores, Query::head_of(t), filtered ? &filter : nullptr);
    }
  });
  return compute_metrics(records, filtered);
}

// ---------------------------------------------------------------------------
// Checkpoints: entities.tsv / relations.tsv as `id<TAB>v1,v2,...` plus
// model.txt with the hyperparameters.

inline void write_checkpoint(const EmbeddingModel& m, const KnowledgeGraph& kg, const std::filesystem::path& dir,
                             const TrainConfig* cfg = nullptr) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());
  char buf[40];
  auto rows = [&](std::size_t n, auto id_of, auto vec_of) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      out += id_of(i);
      out += '\t';
      const auto v = vec_of(i);
      for (std::size_t k = 0; k < v.size(); ++k) {
        std::snprintf(buf, sizeof buf, k ? ",%.17g" : "%.17g", v[k]);
        out += buf;
      }
      out += '\n';
    }
    return out;
  };
  tsv::write_file(dir / "entities.tsv",
                  rows(m.num_entities(), [&](std::size_t i) { return kg.entity_id(static_cast<EntityIndex>(i)); },
                       [&](std::size_t i) { return m.entity(static_cast<EntityIndex>(i)); }));
  tsv::write_file(dir / "relations.tsv",
                  rows(m.num_relations(), [&](std::size_t i) { return kg.relation_id(static_cast<RelationIndex>(i)); },
                       [&](std::size_t i) { return m.relation(static_cast<RelationIndex>(i)); }));
  std::string manifest = "dim=" + std::to_string(m.dim) + "\nnorm=" + std::string(norm_name(m.norm)) + "\n";
  std::snprintf(buf, sizeof buf, "margin=%.17g\n", m.margin);
  manifest += buf;
  if (cfg) {
    std::snprintf(buf, sizeof buf, "learning_rate=%.17g\n", cfg->learning_rate);
    manifest += buf;
    manifest += "epochs=" + std::to_string(cfg->epochs) + "\n";
    manifest += "negatives_per_positive=" + std::to_string(cfg->negatives_per_positive) + "\n";
    manifest += "seed=" + std::to_string(cfg->seed) + "\n";
    manifest += "threads=" + std::to_string(cfg->threads) + "\n";
  }
  tsv::write_file(dir / "model.txt", manifest);
}

inline EmbeddingModel read_checkpoint(const KnowledgeGraph& kg, const std::filesystem::path& dir) {
  EmbeddingModel m;
  tsv::for_each_line(tsv::read_file(dir / "model.txt"), [&](std::size_t, std::string_view line) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) return;
    const auto key = line.substr(0, eq);
    const std::string value(line.substr(eq + 1));
    if (key == "dim") m.dim = std::stoul(value);
    else if (key == "norm") m.norm = parse_norm(value);
    else if (key == "margin") m.margin = std::stod(value);
  });
  if (m.dim == 0) throw ValidationError("checkpoint: missing dim");
  m.entities.assign(kg.num_entities() * m.dim, 0.0);
  m.relations.assign(kg.num_relations() * m.dim, 0.0);
  auto load = [&](std::string_view file, auto find, std::vector<double>& store, std::size_t expected) {
    std::size_t rows = 0;
    tsv::for_each_line(tsv::read_file(dir / file), [&](std::size_t line_no, std::string_view line) {
      if (line.empty()) return;
      const auto tab = line.find('\t');
      const auto idx = find(line.substr(0, tab));
      if (tab == std::string_view::npos || !idx)
        throw ValidationError(std::string(file) + ":" + std::to_string(line_no) + ": unknown id");
      const auto values = tsv::split(line.substr(tab + 1), ',');
      if (values.size() != m.dim)
        throw ValidationError(std::string(file) + ":" + std::to_string(line_no) + ": wrong dimension");
      for (std::size_t k = 0; k < m.dim; ++k) store[std::size_t{*idx} * m.dim + k] = std::stod(std::string(values[k]));
      ++rows;
    });
    if (rows != expected) throw ValidationError(std::string(file) + ": row count mismatch");
  };
  load("entities.tsv", [&](std::string_view id) { return kg.find_entity(id); }, m.entities, kg.num_entities());
  load("relations.tsv", [&](std::string_view id) { return kg.find_relation(id); }, m.relations, kg.num_relations());
  return m;
}

}  // namespace kgsynth
