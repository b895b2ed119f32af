#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgsynth/error.hpp"
#include "kgsynth/tsv.hpp"

namespace kgsynth {

using EntityIndex = std::uint32_t;
using RelationIndex = std::uint32_t;

enum class Split : std::uint8_t { train = 0, valid = 1, test = 2 };

inline constexpr std::array<Split, 3> kAllSplits = {Split::train, Split::valid, Split::test};

constexpr std::string_view split_name(Split s) noexcept {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

// Triple over entity/relation indices (positions in file order).
struct Triple {
  EntityIndex head = 0;
  RelationIndex relation = 0;
  EntityIndex tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct NamedItem {
  std::string id;
  std::string name;

  friend bool operator==(const NamedItem&, const NamedItem&) = default;
};

struct IdTriple {
  std::string head;
  std::string relation;
  std::string tail;

  friend bool operator==(const IdTriple&, const IdTriple&) = default;
};

struct DatasetStats {
  std::size_t n_entities = 0;
  std::size_t n_relations = 0;
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::size_t n_test = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

namespace detail {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

using IdIndex = std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>>;

}  // namespace detail

// Entities, relations, the three triple splits and one description per
// entity. Ids and triples live in a shared immutable block so that renamed
// variants (see with_text) cost only their text.
class KnowledgeGraph {
 public:
  using SplitArray = std::array<std::vector<Triple>, 3>;

  KnowledgeGraph() : KnowledgeGraph({}, {}, {}, {}) {}

  // Validates id uniqueness, triple ranges and split disjointness. Text
  // fields are checked for separators only when reading or writing files.
  KnowledgeGraph(std::vector<NamedItem> entities, std::vector<NamedItem> relations,
                 std::vector<std::string> descriptions, SplitArray splits) {
    auto structure = std::make_shared<Structure>();
    entity_names_.reserve(entities.size());
    structure->entity_ids.reserve(entities.size());
    for (auto& e : entities) {
      structure->entity_ids.push_back(std::move(e.id));
      entity_names_.push_back(std::move(e.name));
    }
    for (auto& r : relations) {
      structure->relation_ids.push_back(std::move(r.id));
      relation_names_.push_back(std::move(r.name));
    }
    if (descriptions.empty() && !entity_names_.empty())
      descriptions.resize(entity_names_.size());
    if (descriptions.size() != entity_names_.size())
      throw ValidationError("descriptions: expected " + std::to_string(entity_names_.size()) +
                            " entries, got " + std::to_string(descriptions.size()));
    descriptions_ = std::move(descriptions);
    structure->splits = std::move(splits);
    structure->build_indices();
    structure->validate();
    structure_ = std::move(structure);
  }

  // Builds from string ids; descriptions not listed default to "".
  static KnowledgeGraph from_ids(std::vector<NamedItem> entities, std::vector<NamedItem> relations,
                                 const std::vector<std::pair<std::string, std::string>>& descriptions,
                                 const std::vector<IdTriple>& train, const std::vector<IdTriple>& valid,
                                 const std::vector<IdTriple>& test) {
    detail::IdIndex eidx, ridx;
    for (std::size_t i = 0; i < entities.size(); ++i)
      eidx.emplace(entities[i].id, static_cast<std::uint32_t>(i));
    for (std::size_t i = 0; i < relations.size(); ++i)
      ridx.emplace(relations[i].id, static_cast<std::uint32_t>(i));
    auto lookup = [](const detail::IdIndex& idx, const std::string& id, std::string_view what) {
      auto it = idx.find(id);
      if (it == idx.end()) throw ValidationError("unknown " + std::string(what) + " id '" + id + "'");
      return it->second;
    };
    std::vector<std::string> descs(entities.size());
    for (const auto& [id, text] : descriptions) descs[lookup(eidx, id, "entity")] = text;
    SplitArray splits;
    const std::array<const std::vector<IdTriple>*, 3> sources = {&train, &valid, &test};
    for (std::size_t s = 0; s < 3; ++s) {
      for (const auto& t : *sources[s])
        splits[s].push_back(Triple{lookup(eidx, t.head, "entity"), lookup(ridx, t.relation, "relation"),
                                   lookup(eidx, t.tail, "entity")});
    }
    return KnowledgeGraph(std::move(entities), std::move(relations), std::move(descs), std::move(splits));
  }

  // Same ids and triples, new text. Sizes must match.
  KnowledgeGraph with_text(std::vector<std::string> entity_names, std::vector<std::string> relation_names,
                           std::vector<std::string> descriptions) const {
    if (entity_names.size() != num_entities() || relation_names.size() != num_relations() ||
        descriptions.size() != num_entities())
      throw ValidationError("with_text: size mismatch");
    KnowledgeGraph out(*this);
    out.entity_names_ = std::move(entity_names);
    out.relation_names_ = std::move(relation_names);
    out.descriptions_ = std::move(descriptions);
    return out;
  }

  std::size_t num_entities() const noexcept { return entity_names_.size(); }
  std::size_t num_relations() const noexcept { return relation_names_.size(); }

  const std::string& entity_id(EntityIndex e) const { return structure_->entity_ids.at(e); }
  const std::string& entity_name(EntityIndex e) const { return entity_names_.at(e); }
  const std::string& relation_id(RelationIndex r) const { return structure_->relation_ids.at(r); }
  const std::string& relation_name(RelationIndex r) const { return relation_names_.at(r); }
  const std::string& description(EntityIndex e) const { return descriptions_.at(e); }

  std::span<const std::string> entity_ids() const noexcept { return structure_->entity_ids; }
  std::span<const std::string> relation_ids() const noexcept { return structure_->relation_ids; }
  std::span<const std::string> entity_names() const noexcept { return entity_names_; }
  std::span<const std::string> relation_names() const noexcept { return relation_names_; }
  std::span<const std::string> descriptions() const noexcept { return descriptions_; }

  std::optional<EntityIndex> find_entity(std::string_view id) const {
    auto it = structure_->entity_index.find(id);
    if (it == structure_->entity_index.end()) return std::nullopt;
    return it->second;
  }
  std::optional<RelationIndex> find_relation(std::string_view id) const {
    auto it = structure_->relation_index.find(id);
    if (it == structure_->relation_index.end()) return std::nullopt;
    return it->second;
  }

  std::span<const Triple> triples(Split s) const noexcept {
    return structure_->splits[static_cast<std::size_t>(s)];
  }
  std::size_t num_triples() const noexcept {
    return triples(Split::train).size() + triples(Split::valid).size() + triples(Split::test).size();
  }

  template <typename Fn>
  void for_each_triple(Fn&& fn) const {
    for (Split s : kAllSplits)
      for (const Triple& t : triples(s)) fn(s, t);
  }

  IdTriple to_ids(const Triple& t) const {
    return {entity_id(t.head), relation_id(t.relation), entity_id(t.tail)};
  }

  // True when both graphs share the same id tables and triples (cheap when
  // one was derived from the other via with_text).
  bool same_structure(const KnowledgeGraph& other) const {
    if (structure_ == other.structure_) return true;
    return structure_->entity_ids == other.structure_->entity_ids &&
           structure_->relation_ids == other.structure_->relation_ids &&
           structure_->splits == other.structure_->splits;
  }

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.same_structure(b) && a.entity_names_ == b.entity_names_ &&
           a.relation_names_ == b.relation_names_ && a.descriptions_ == b.descriptions_;
  }

 private:
  struct Structure {
    std::vector<std::string> entity_ids;
    std::vector<std::string> relation_ids;
    detail::IdIndex entity_index;
    detail::IdIndex relation_index;
    SplitArray splits;

    void build_indices() {
      auto build = [](const std::vector<std::string>& ids, detail::IdIndex& index, std::string_view what) {
        index.reserve(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
          const auto& id = ids[i];
          if (id.empty()) throw ValidationError(std::string(what) + " #" + std::to_string(i + 1) + ": empty id");
          if (tsv::has_control_separator(id))
            throw ValidationError(std::string(what) + " id contains tab or newline: '" + id + "'");
          if (!index.emplace(id, static_cast<std::uint32_t>(i)).second)
            throw ValidationError("duplicate " + std::string(what) + " id '" + id + "'");
        }
      };
      build(entity_ids, entity_index, "entity");
      build(relation_ids, relation_index, "relation");
    }

    void validate() const {
      const std::size_t ne = entity_ids.size();
      const std::size_t nr = relation_ids.size();
      for (Split s : kAllSplits) {
        for (const Triple& t : splits[static_cast<std::size_t>(s)]) {
          if (t.head >= ne || t.tail >= ne || t.relation >= nr)
            throw ValidationError(std::string(split_name(s)) + ": triple index out of range");
        }
      }
      std::array<std::vector<Triple>, 3> sorted;
      for (std::size_t s = 0; s < 3; ++s) {
        sorted[s] = splits[s];
        std::sort(sorted[s].begin(), sorted[s].end());
        sorted[s].erase(std::unique(sorted[s].begin(), sorted[s].end()), sorted[s].end());
      }
      for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = a + 1; b < 3; ++b) {
          std::vector<Triple> common;
          std::set_intersection(sorted[a].begin(), sorted[a].end(), sorted[b].begin(), sorted[b].end(),
                                std::back_inserter(common));
          if (!common.empty()) {
            const Triple& t = common.front();
            throw ValidationError("triple (" + entity_ids[t.head] + ", " + relation_ids[t.relation] + ", " +
                                  entity_ids[t.tail] + ") appears in both " +
                                  std::string(split_name(static_cast<Split>(a))) + " and " +
                                  std::string(split_name(static_cast<Split>(b))) + " (" +
                                  std::to_string(common.size()) + " shared)");
          }
        }
      }
    }
  };

  std::shared_ptr<const Structure> structure_;
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::vector<std::string> descriptions_;
};

inline DatasetStats compute_stats(const KnowledgeGraph& kg) {
  return {kg.num_entities(), kg.num_relations(), kg.triples(Split::train).size(),
          kg.triples(Split::valid).size(), kg.triples(Split::test).size()};
}

// ---------------------------------------------------------------------------
// Dataset directory I/O

namespace files {
inline constexpr std::string_view kEntities = "entities.tsv";
inline constexpr std::string_view kRelations = "relations.tsv";
inline constexpr std::string_view kDescriptions = "descriptions.tsv";
inline constexpr std::string_view kTrain = "train.tsv";
inline constexpr std::string_view kValid = "valid.tsv";
inline constexpr std::string_view kTest = "test.tsv";

constexpr std::string_view for_split(Split s) noexcept {
  switch (s) {
    case Split::train: return kTrain;
    case Split::valid: return kValid;
    case Split::test: return kTest;
  }
  return kTrain;
}
}  // namespace files

namespace detail {

inline std::string location(std::string_view file, std::size_t line) {
  return std::string(file) + ":" + std::to_string(line);
}

inline std::vector<NamedItem> parse_named(std::string_view text, std::string_view file) {
  std::vector<NamedItem> out;
  std::vector<std::string_view> fields;
  tsv::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) return;
    if (!tsv::split_exact(line, 2, fields))
      throw ValidationError(location(file, line_no) + ": expected id<TAB>name");
    out.push_back({std::string(fields[0]), std::string(fields[1])});
  });
  return out;
}

}  // namespace detail

// Reads the six-file layout. Files are read concurrently; parsing follows
// file order so indices are deterministic.
inline KnowledgeGraph load_dataset(const std::filesystem::path& dir) {
  const std::array<std::string_view, 6> names = {files::kEntities, files::kRelations, files::kDescriptions,
                                                 files::kTrain,    files::kValid,     files::kTest};
  for (auto name : names) {
    if (!std::filesystem::is_regular_file(dir / name))
      throw IoError("missing dataset file: " + (dir / name).string());
  }
  std::array<std::future<std::string>, 6> reads;
  for (std::size_t i = 0; i < names.size(); ++i)
    reads[i] = std::async(std::launch::async, [path = dir / names[i]] { return tsv::read_file(path); });
  std::array<std::string, 6> contents;
  for (std::size_t i = 0; i < names.size(); ++i) contents[i] = reads[i].get();

  auto entities = detail::parse_named(contents[0], files::kEntities);
  auto relations = detail::parse_named(contents[1], files::kRelations);

  detail::IdIndex eidx, ridx;
  eidx.reserve(entities.size());
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (!eidx.emplace(entities[i].id, static_cast<std::uint32_t>(i)).second)
      throw ValidationError(std::string(files::kEntities) + ": duplicate entity id '" + entities[i].id + "'");
  }
  for (std::size_t i = 0; i < relations.size(); ++i) {
    if (!ridx.emplace(relations[i].id, static_cast<std::uint32_t>(i)).second)
      throw ValidationError(std::string(files::kRelations) + ": duplicate relation id '" + relations[i].id + "'");
  }

  std::vector<std::string> descriptions(entities.size());
  {
    std::vector<bool> seen(entities.size(), false);
    std::vector<std::string_view> fields;
    tsv::for_each_line(contents[2], [&](std::size_t line_no, std::string_view line) {
      if (line.empty()) return;
      if (!tsv::split_exact(line, 2, fields))
        throw ValidationError(detail::location(files::kDescriptions, line_no) +
                              ": expected entity_id<TAB>description");
      auto it = eidx.find(fields[0]);
      if (it == eidx.end())
        throw ValidationError(detail::location(files::kDescriptions, line_no) + ": unknown entity id '" +
                              std::string(fields[0]) + "'");
      if (seen[it->second])
        throw ValidationError(detail::location(files::kDescriptions, line_no) + ": duplicate description for '" +
                              std::string(fields[0]) + "'");
      seen[it->second] = true;
      descriptions[it->second] = std::string(fields[1]);
    });
  }

  KnowledgeGraph::SplitArray splits;
  for (Split s : kAllSplits) {
    const auto file = files::for_split(s);
    auto& out = splits[static_cast<std::size_t>(s)];
    std::vector<std::string_view> fields;
    tsv::for_each_line(contents[3 + static_cast<std::size_t>(s)], [&](std::size_t line_no, std::string_view line) {
      if (line.empty()) return;
      if (!tsv::split_exact(line, 3, fields))
        throw ValidationError(detail::location(file, line_no) + ": expected head<TAB>relation<TAB>tail");
      auto h = eidx.find(fields[0]);
      auto r = ridx.find(fields[1]);
      auto t = eidx.find(fields[2]);
      if (h == eidx.end())
        throw ValidationError(detail::location(file, line_no) + ": unknown entity id '" + std::string(fields[0]) + "'");
      if (r == ridx.end())
        throw ValidationError(detail::location(file, line_no) + ": unknown relation id '" + std::string(fields[1]) +
                              "'");
      if (t == eidx.end())
        throw ValidationError(detail::location(file, line_no) + ": unknown entity id '" + std::string(fields[2]) + "'");
      out.push_back(Triple{h->second, r->second, t->second});
    });
  }
  return KnowledgeGraph(std::move(entities), std::move(relations), std::move(descriptions), std::move(splits));
}

// Rejects text containing tab or newline. Output is a pure function of kg.
inline void write_dataset(const KnowledgeGraph& kg, const std::filesystem::path& dir) {
  auto check = [](std::string_view value, std::string_view file, std::string_view id) {
    if (tsv::has_control_separator(value))
      throw ValidationError(std::string(file) + ": value for '" + std::string(id) +
                            "' contains a tab or newline");
  };
  std::string entities, relations, descriptions;
  for (EntityIndex e = 0; e < kg.num_entities(); ++e) {
    check(kg.entity_name(e), files::kEntities, kg.entity_id(e));
    check(kg.description(e), files::kDescriptions, kg.entity_id(e));
    entities.append(kg.entity_id(e)).append("\t").append(kg.entity_name(e)).append("\n");
    descriptions.append(kg.entity_id(e)).append("\t").append(kg.description(e)).append("\n");
  }
  for (RelationIndex r = 0; r < kg.num_relations(); ++r) {
    check(kg.relation_name(r), files::kRelations, kg.relation_id(r));
    relations.append(kg.relation_id(r)).append("\t").append(kg.relation_name(r)).append("\n");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  tsv::write_file(dir / files::kEntities, entities);
  tsv::write_file(dir / files::kRelations, relations);
  tsv::write_file(dir / files::kDescriptions, descriptions);
  for (Split s : kAllSplits) {
    std::string body;
    for (const Triple& t : kg.triples(s)) {
      body.append(kg.entity_id(t.head)).append("\t");
      body.append(kg.relation_id(t.relation)).append("\t");
      body.append(kg.entity_id(t.tail)).append("\n");
    }
    tsv::write_file(dir / files::for_split(s), body);
  }
}

}  // namespace kgsynth
