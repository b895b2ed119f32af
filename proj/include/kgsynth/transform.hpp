#pragma once

#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kgsynth/derangement.hpp"
#include "kgsynth/error.hpp"
#include "kgsynth/kg.hpp"
#include "kgsynth/rewriter.hpp"
#include "kgsynth/rng.hpp"
#include "kgsynth/textgen.hpp"
#include "kgsynth/tsv.hpp"

namespace kgsynth {

enum class RecipeKind { virtual_world, anonymized_entities, inconsistent_descriptions, fully_anonymized };

constexpr std::string_view kind_name(RecipeKind k) noexcept {
  switch (k) {
    case RecipeKind::virtual_world: return "virtual_world";
    case RecipeKind::anonymized_entities: return "anonymized_entities";
    case RecipeKind::inconsistent_descriptions: return "inconsistent_descriptions";
    case RecipeKind::fully_anonymized: return "fully_anonymized";
  }
  return "?";
}

// Accepts both snake_case and kebab-case spellings.
inline RecipeKind parse_kind(std::string_view s) {
  std::string norm(s);
  for (char& c : norm)
    if (c == '-') c = '_';
  for (auto k : {RecipeKind::virtual_world, RecipeKind::anonymized_entities, RecipeKind::inconsistent_descriptions,
                 RecipeKind::fully_anonymized})
    if (norm == kind_name(k)) return k;
  throw ValidationError("unknown recipe '" + std::string(s) + "'");
}

struct TargetSet {
  bool entities = false;
  bool relations = false;
  bool descriptions = false;

  bool empty() const noexcept { return !entities && !relations && !descriptions; }
  friend bool operator==(const TargetSet&, const TargetSet&) = default;
};

inline TargetSet parse_targets(std::string_view s) {
  TargetSet t;
  for (auto part : tsv::split(s, ',')) {
    if (part == "entities" || part == "E" || part == "e") t.entities = true;
    else if (part == "relations" || part == "R" || part == "r") t.relations = true;
    else if (part == "descriptions" || part == "D" || part == "d") t.descriptions = true;
    else if (!part.empty()) throw ValidationError("unknown target '" + std::string(part) + "'");
  }
  return t;
}

inline std::string format_targets(const TargetSet& t) {
  std::vector<std::string> parts;
  if (t.entities) parts.emplace_back("entities");
  if (t.relations) parts.emplace_back("relations");
  if (t.descriptions) parts.emplace_back("descriptions");
  return tsv::join(parts, ",");
}

struct TransformRecipe {
  RecipeKind kind = RecipeKind::virtual_world;
  TargetSet targets;
  std::uint64_t seed = 0;

  void validate() const {
    switch (kind) {
      case RecipeKind::virtual_world:
      case RecipeKind::anonymized_entities:
        if (targets.descriptions || (!targets.entities && !targets.relations))
          throw ValidationError(std::string(kind_name(kind)) +
                                ": targets must be a non-empty subset of {entities, relations}");
        break;
      case RecipeKind::inconsistent_descriptions:
      case RecipeKind::fully_anonymized:
        if (!targets.descriptions)
          throw ValidationError(std::string(kind_name(kind)) + ": targets must include descriptions");
        break;
    }
  }

  friend bool operator==(const TransformRecipe&, const TransformRecipe&) = default;
};

// What a recipe did, indexed by entity / relation position. Empty vectors
// mean the field was not touched (identity).
struct TransformMapping {
  TransformRecipe recipe;
  std::vector<std::string> entity_names;          // new name per entity
  std::vector<std::string> relation_names;        // new name per relation
  std::vector<EntityIndex> description_sources;   // entity whose description moved here
  std::vector<std::string> description_literals;  // replacement description per entity
};

struct TransformOutput {
  KnowledgeGraph kg;
  TransformMapping mapping;
};

namespace detail {

inline std::uint64_t field_seed(std::uint64_t seed, RecipeKind kind, std::string_view field) {
  return derive_seed(seed, {hash_label(kind_name(kind)), hash_label(field)});
}

inline std::vector<std::string> to_vector(std::span<const std::string> s) { return {s.begin(), s.end()}; }

// Entity names deranged by value; returns the permutation too so that
// descriptions can follow their names.
inline DerangementResult<std::string> shuffle_entity_names(const KnowledgeGraph& kg, std::uint64_t seed,
                                                           RecipeKind kind) {
  try {
    return derange(kg.entity_names(), field_seed(seed, kind, "entities"));
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(std::string(kind_name(kind)) + " (entities): " + e.what());
  }
}

// Relation ids deranged under the co-occurrence constraint; pairs of
// relations with equal names are also excluded so no name maps to itself.
inline std::vector<std::string> shuffle_relation_names(const KnowledgeGraph& kg, std::uint64_t seed,
                                                       RecipeKind kind) {
  auto removed = build_removed_edges(kg);
  const auto ids = to_vector(kg.relation_ids());
  for (RelationIndex a = 0; a < kg.num_relations(); ++a)
    for (RelationIndex b = 0; b < kg.num_relations(); ++b)
      if (a != b && kg.relation_name(a) == kg.relation_name(b)) removed.insert(ids[a], ids[b]);
  DerangementResult<std::string> result;
  try {
    result = bipartite_derange(ids, removed, field_seed(seed, kind, "relations"));
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(std::string(kind_name(kind)) + " (relations): " + e.what());
  }
  std::vector<std::string> names(kg.num_relations());
  for (RelationIndex r = 0; r < kg.num_relations(); ++r) names[r] = kg.relation_name(
      static_cast<RelationIndex>(result.permutation[r]));
  return names;
}

inline std::vector<std::string> name_corpus(const KnowledgeGraph& kg) {
  std::vector<std::string> corpus = to_vector(kg.entity_names());
  corpus.insert(corpus.end(), kg.relation_names().begin(), kg.relation_names().end());
  return corpus;
}

// Shared uniqueness scope for one run: original names plus everything
// generated so far.
class AnonymizationContext {
 public:
  explicit AnonymizationContext(const KnowledgeGraph& kg) : model_(fit_unigram(name_corpus(kg))) {
    forbidden_.reserve(kg.num_entities() + kg.num_relations());
    for (const auto& n : kg.entity_names()) forbidden_.insert(n);
    for (const auto& n : kg.relation_names()) forbidden_.insert(n);
  }

  std::vector<std::string> draw(std::size_t n, std::uint64_t seed, std::string_view what) {
    std::vector<std::string> out;
    try {
      out = sample_unique_strings(model_, n, forbidden_, seed);
    } catch (const SamplingError& e) {
      throw UniquenessError(std::string(what) + ": " + e.what());
    }
    for (const auto& s : out) forbidden_.insert(s);
    return out;
  }

  const UnigramModel& model() const noexcept { return model_; }

 private:
  UnigramModel model_;
  std::unordered_set<std::string> forbidden_;
};

}  // namespace detail

// Names shuffled by derangement (relations under the co-occurrence
// constraint); descriptions rewritten to the shuffled entity names.
inline TransformOutput virtual_world(const KnowledgeGraph& kg, const TargetSet& targets, std::uint64_t seed,
                                     std::size_t threads = 1) {
  TransformOutput out{kg, {{RecipeKind::virtual_world, targets, seed}, {}, {}, {}, {}}};
  out.mapping.recipe.validate();
  auto entity_names = detail::to_vector(kg.entity_names());
  auto relation_names = detail::to_vector(kg.relation_names());
  auto descriptions = detail::to_vector(kg.descriptions());
  if (targets.entities) {
    entity_names = detail::shuffle_entity_names(kg, seed, RecipeKind::virtual_world).values;
    descriptions = rewrite_descriptions(kg, make_name_map(kg.entity_names(), entity_names), threads);
    out.mapping.entity_names = entity_names;
  }
  if (targets.relations) {
    relation_names = detail::shuffle_relation_names(kg, seed, RecipeKind::virtual_world);
    out.mapping.relation_names = relation_names;
  }
  out.kg = kg.with_text(std::move(entity_names), std::move(relation_names), std::move(descriptions));
  return out;
}

// Names replaced by unique unigram samples; descriptions rewritten to the
// new entity names.
inline TransformOutput anonymized_entities(const KnowledgeGraph& kg, const TargetSet& targets, std::uint64_t seed,
                                           std::size_t threads = 1) {
  TransformOutput out{kg, {{RecipeKind::anonymized_entities, targets, seed}, {}, {}, {}, {}}};
  out.mapping.recipe.validate();
  detail::AnonymizationContext ctx(kg);
  auto entity_names = detail::to_vector(kg.entity_names());
  auto relation_names = detail::to_vector(kg.relation_names());
  auto descriptions = detail::to_vector(kg.descriptions());
  constexpr auto kind = RecipeKind::anonymized_entities;
  if (targets.entities) {
    entity_names = ctx.draw(kg.num_entities(), detail::field_seed(seed, kind, "entities"), "entities");
    descriptions = rewrite_descriptions(kg, make_name_map(kg.entity_names(), entity_names), threads);
    out.mapping.entity_names = entity_names;
  }
  if (targets.relations) {
    relation_names = ctx.draw(kg.num_relations(), detail::field_seed(seed, kind, "relations"), "relations");
    out.mapping.relation_names = relation_names;
  }
  out.kg = kg.with_text(std::move(entity_names), std::move(relation_names), std::move(descriptions));
  return out;
}

// Without entity/relation shuffling the descriptions are deranged by index.
// With entities shuffled, each description travels with its name and its
// text is left as is.
inline TransformOutput inconsistent_descriptions(const KnowledgeGraph& kg, const TargetSet& also_shuffle,
                                                 std::uint64_t seed) {
  TargetSet targets = also_shuffle;
  targets.descriptions = true;
  TransformOutput out{kg, {{RecipeKind::inconsistent_descriptions, targets, seed}, {}, {}, {}, {}}};
  constexpr auto kind = RecipeKind::inconsistent_descriptions;
  auto entity_names = detail::to_vector(kg.entity_names());
  auto relation_names = detail::to_vector(kg.relation_names());
  std::vector<std::size_t> source;
  if (targets.entities) {
    auto shuffled = detail::shuffle_entity_names(kg, seed, kind);
    entity_names = std::move(shuffled.values);
    source = std::move(shuffled.permutation);
    out.mapping.entity_names = entity_names;
  } else {
    std::vector<std::size_t> positions(kg.num_entities());
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    try {
      source = derange(positions, detail::field_seed(seed, kind, "descriptions")).values;
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(std::string(kind_name(kind)) + " (descriptions): " + e.what());
    }
  }
  std::vector<std::string> descriptions(kg.num_entities());
  out.mapping.description_sources.resize(kg.num_entities());
  for (EntityIndex e = 0; e < kg.num_entities(); ++e) {
    descriptions[e] = kg.description(static_cast<EntityIndex>(source[e]));
    out.mapping.description_sources[e] = static_cast<EntityIndex>(source[e]);
  }
  if (targets.relations) {
    relation_names = detail::shuffle_relation_names(kg, seed, kind);
    out.mapping.relation_names = relation_names;
  }
  out.kg = kg.with_text(std::move(entity_names), std::move(relation_names), std::move(descriptions));
  return out;
}

// Every description becomes a unique unigram sample; names optionally
// anonymized. Entities, relations and descriptions use independent streams
// and share one uniqueness scope.
inline TransformOutput fully_anonymized(const KnowledgeGraph& kg, const TargetSet& also_anonymize,
                                        std::uint64_t seed) {
  TargetSet targets = also_anonymize;
  targets.descriptions = true;
  TransformOutput out{kg, {{RecipeKind::fully_anonymized, targets, seed}, {}, {}, {}, {}}};
  constexpr auto kind = RecipeKind::fully_anonymized;
  detail::AnonymizationContext ctx(kg);
  auto entity_names = detail::to_vector(kg.entity_names());
  auto relation_names = detail::to_vector(kg.relation_names());
  if (targets.entities) {
    entity_names = ctx.draw(kg.num_entities(), detail::field_seed(seed, kind, "entities"), "entities");
    out.mapping.entity_names = entity_names;
  }
  if (targets.relations) {
    relation_names = ctx.draw(kg.num_relations(), detail::field_seed(seed, kind, "relations"), "relations");
    out.mapping.relation_names = relation_names;
  }
  auto descriptions = ctx.draw(kg.num_entities(), detail::field_seed(seed, kind, "descriptions"), "descriptions");
  out.mapping.description_literals = descriptions;
  out.kg = kg.with_text(std::move(entity_names), std::move(relation_names), std::move(descriptions));
  return out;
}

inline TransformOutput apply_recipe(const KnowledgeGraph& kg, const TransformRecipe& recipe,
                                    std::size_t threads = 1) {
  recipe.validate();
  switch (recipe.kind) {
    case RecipeKind::virtual_world: return virtual_world(kg, recipe.targets, recipe.seed, threads);
    case RecipeKind::anonymized_entities: return anonymized_entities(kg, recipe.targets, recipe.seed, threads);
    case RecipeKind::inconsistent_descriptions: return inconsistent_descriptions(kg, recipe.targets, recipe.seed);
    case RecipeKind::fully_anonymized: return fully_anonymized(kg, recipe.targets, recipe.seed);
  }
  throw ValidationError("apply_recipe: unknown kind");
}

// ---------------------------------------------------------------------------
// Mapping and recipe files

namespace files {
inline constexpr std::string_view kMapping = "mapping.tsv";
inline constexpr std::string_view kRecipe = "recipe.txt";
}  // namespace files

// Rows `kind<TAB>id<TAB>old_text<TAB>new_text`; kinds are entity, relation,
// description (literal replacement) and description_source (old = own id,
// new = id of the entity whose description was assigned).
inline std::string format_mapping(const KnowledgeGraph& original, const TransformMapping& m) {
  std::string out;
  auto row = [&](std::string_view kind, std::string_view id, std::string_view old_text, std::string_view new_text) {
    out.append(kind).append("\t").append(id).append("\t").append(old_text).append("\t").append(new_text).append("\n");
  };
  for (EntityIndex e = 0; e < m.entity_names.size(); ++e)
    row("entity", original.entity_id(e), original.entity_name(e), m.entity_names[e]);
  for (RelationIndex r = 0; r < m.relation_names.size(); ++r)
    row("relation", original.relation_id(r), original.relation_name(r), m.relation_names[r]);
  for (EntityIndex e = 0; e < m.description_sources.size(); ++e)
    row("description_source", original.entity_id(e), original.entity_id(e),
        original.entity_id(m.description_sources[e]));
  for (EntityIndex e = 0; e < m.description_literals.size(); ++e)
    row("description", original.entity_id(e), original.description(e), m.description_literals[e]);
  return out;
}

// Reads a mapping file back against the original graph.
inline TransformMapping parse_mapping(const KnowledgeGraph& original, std::string_view text) {
  TransformMapping m;
  std::vector<std::string_view> f;
  auto fill = [](auto& vec, std::size_t n, std::size_t idx, auto value) {
    if (vec.empty()) vec.resize(n);
    vec[idx] = std::move(value);
  };
  tsv::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) return;
    if (!tsv::split_exact(line, 4, f))
      throw ValidationError("mapping.tsv:" + std::to_string(line_no) + ": expected 4 fields");
    const auto where = "mapping.tsv:" + std::to_string(line_no);
    if (f[0] == "relation") {
      auto r = original.find_relation(f[1]);
      if (!r) throw ValidationError(where + ": unknown relation id");
      fill(m.relation_names, original.num_relations(), *r, std::string(f[3]));
      return;
    }
    auto e = original.find_entity(f[1]);
    if (!e) throw ValidationError(where + ": unknown entity id");
    if (f[0] == "entity") {
      fill(m.entity_names, original.num_entities(), *e, std::string(f[3]));
    } else if (f[0] == "description") {
      fill(m.description_literals, original.num_entities(), *e, std::string(f[3]));
    } else if (f[0] == "description_source") {
      auto src = original.find_entity(f[3]);
      if (!src) throw ValidationError(where + ": unknown source entity id");
      fill(m.description_sources, original.num_entities(), *e, *src);
    } else {
      throw ValidationError(where + ": unknown row kind '" + std::string(f[0]) + "'");
    }
  });
  return m;
}

inline std::string format_recipe(const std::optional<TransformRecipe>& recipe, std::uint64_t seed) {
  if (!recipe) return "kind=base\ntargets=\nseed=" + std::to_string(seed) + "\n";
  return "kind=" + std::string(kind_name(recipe->kind)) + "\ntargets=" + format_targets(recipe->targets) +
         "\nseed=" + std::to_string(recipe->seed) + "\n";
}

// ---------------------------------------------------------------------------
// Suite

struct VariantSpec {
  std::string label;
  std::optional<TransformRecipe> recipe;  // nullopt = base copy
};

enum class FailureKind { none, data, infeasible, internal };

struct VariantOutcome {
  std::string label;
  bool ok = false;
  std::string error;
  FailureKind failure = FailureKind::none;
};

// base, {vw, anon} x {e, r, er}, {incons, fullanon} x {d, ed, erd}.
inline std::vector<VariantSpec> default_suite(std::uint64_t seed) {
  std::vector<VariantSpec> out;
  out.push_back({"base", std::nullopt});
  const std::pair<std::string_view, TargetSet> name_targets[] = {
      {"e", {true, false, false}}, {"r", {false, true, false}}, {"er", {true, true, false}}};
  const std::pair<std::string_view, TargetSet> desc_targets[] = {
      {"d", {false, false, true}}, {"ed", {true, false, true}}, {"erd", {true, true, true}}};
  for (auto [prefix, kind] : {std::pair{"vw-", RecipeKind::virtual_world},
                              std::pair{"anon-", RecipeKind::anonymized_entities}})
    for (const auto& [suffix, t] : name_targets)
      out.push_back({std::string(prefix) + std::string(suffix), TransformRecipe{kind, t, seed}});
  for (auto [prefix, kind] : {std::pair{"incons-", RecipeKind::inconsistent_descriptions},
                              std::pair{"fullanon-", RecipeKind::fully_anonymized}})
    for (const auto& [suffix, t] : desc_targets)
      out.push_back({std::string(prefix) + std::string(suffix), TransformRecipe{kind, t, seed}});
  return out;
}

// Writes one variant directory: the dataset files, mapping.tsv, recipe.txt.
inline void write_variant(const KnowledgeGraph& original, const TransformOutput& result,
                          const std::filesystem::path& dir) {
  write_dataset(result.kg, dir);
  tsv::write_file(dir / files::kMapping, format_mapping(original, result.mapping));
  tsv::write_file(dir / files::kRecipe, format_recipe(result.mapping.recipe, result.mapping.recipe.seed));
}

// Runs each variant into out/<label>/. A failing variant is reported and
// the others still run.
inline std::vector<VariantOutcome> generate_suite(const KnowledgeGraph& kg, const std::filesystem::path& out,
                                                  const std::vector<VariantSpec>& variants, std::uint64_t seed,
                                                  std::size_t threads = 1) {
  std::vector<VariantOutcome> outcomes;
  for (const auto& v : variants) {
    VariantOutcome o{v.label, false, {}};
    try {
      const auto dir = out / v.label;
      if (!v.recipe) {
        write_dataset(kg, dir);
        tsv::write_file(dir / files::kMapping, "");
        tsv::write_file(dir / files::kRecipe, format_recipe(std::nullopt, seed));
      } else {
        write_variant(kg, apply_recipe(kg, *v.recipe, threads), dir);
      }
      o.ok = true;
    } catch (const InfeasibleError& e) {
      o.error = e.what();
      o.failure = FailureKind::infeasible;
    } catch (const SamplingError& e) {
      o.error = e.what();
      o.failure = FailureKind::infeasible;
    } catch (const IoError& e) {
      o.error = e.what();
      o.failure = FailureKind::data;
    } catch (const ValidationError& e) {
      o.error = e.what();
      o.failure = FailureKind::data;
    } catch (const std::exception& e) {
      o.error = e.what();
      o.failure = FailureKind::internal;
    }
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

inline std::vector<VariantOutcome> generate_suite(const KnowledgeGraph& kg, const std::filesystem::path& out,
                                                  std::uint64_t seed, std::size_t threads = 1) {
  return generate_suite(kg, out, default_suite(seed), seed, threads);
}

// ---------------------------------------------------------------------------
// Structure check

// Maps every original triple through the recorded name maps and compares
// with the variant's name-level triples, split by split and in order. Also
// checks that the variant keeps the id-level structure.
inline bool mapping_reproduces_variant(const KnowledgeGraph& original, const KnowledgeGraph& variant,
                                       const TransformMapping& m, std::string* why = nullptr) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (!original.same_structure(variant)) return fail("id-level structure differs");
  auto entity_name = [&](EntityIndex e) -> const std::string& {
    return m.entity_names.empty() ? original.entity_name(e) : m.entity_names[e];
  };
  auto relation_name = [&](RelationIndex r) -> const std::string& {
    return m.relation_names.empty() ? original.relation_name(r) : m.relation_names[r];
  };
  for (Split s : kAllSplits) {
    const auto a = original.triples(s);
    const auto b = variant.triples(s);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (entity_name(a[i].head) != variant.entity_name(b[i].head) ||
          relation_name(a[i].relation) != variant.relation_name(b[i].relation) ||
          entity_name(a[i].tail) != variant.entity_name(b[i].tail))
        return fail(std::string(split_name(s)) + " triple " + std::to_string(i) + " differs at name level");
    }
  }
  return true;
}

}  // namespace kgsynth
