#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kgsynth/error.hpp"
#include "kgsynth/kg.hpp"
#include "kgsynth/tsv.hpp"

namespace kgsynth {

// Public distributions the adapter understands.
//   kgbert     entity2text.txt, [entity2textlong.txt], relation2text.txt,
//              train.tsv / dev.tsv / test.tsv
//   wordnet    wordnet-mlj12-definitions.txt (id, __lemma_NN_1, gloss),
//              train.txt / valid.txt / test.txt, relation ids used as names
//   wikidata5m wikidata5m_entity.txt / wikidata5m_relation.txt (id, aliases...),
//              wikidata5m_text.txt, wikidata5m_transductive_{train,valid,test}.txt
enum class SourceFormat { kgbert, wordnet, wikidata5m };

inline SourceFormat parse_source_format(std::string_view s) {
  if (s == "kgbert") return SourceFormat::kgbert;
  if (s == "wordnet") return SourceFormat::wordnet;
  if (s == "wikidata5m") return SourceFormat::wikidata5m;
  throw ValidationError("unknown source format '" + std::string(s) + "' (kgbert|wordnet|wikidata5m)");
}

struct ConvertOptions {
  SourceFormat format = SourceFormat::kgbert;
  // kgbert WN18RR ships "lemma, gloss" in entity2text.txt; split it at the
  // first ", " into name and description when no long-text file exists.
  bool split_name_gloss = false;
};

struct ConvertReport {
  DatasetStats stats;
  std::size_t dropped_cross_split = 0;
  std::size_t missing_names = 0;
  std::size_t sanitized_fields = 0;
};

namespace detail {

// Replaces tab/CR/LF with a space so the value fits the TSV layout.
inline std::string sanitize(std::string_view s, std::size_t& counter) {
  std::string out(s);
  bool changed = false;
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') {
      c = ' ';
      changed = true;
    }
  }
  if (changed) ++counter;
  return out;
}

inline std::string strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return std::string(line);
}

// "__land_reform_NN_1" -> "land reform"
inline std::string clean_wordnet_lemma(std::string_view raw) {
  std::string s(raw);
  if (s.rfind("__", 0) == 0) s.erase(0, 2);
  // drop trailing _POS_sense
  for (int k = 0; k < 2; ++k) {
    const auto cut = s.rfind('_');
    if (cut != std::string::npos && cut > 0) s.erase(cut);
  }
  for (char& c : s)
    if (c == '_') c = ' ';
  return s;
}

// Calls fn with the tab-split fields of every non-empty line.
template <typename Fn>
void read_columns(const std::filesystem::path& path, Fn&& fn) {
  const std::string text = tsv::read_file(path);
  tsv::for_each_line(text, [&](std::size_t, std::string_view line) {
    const std::string clean = strip_cr(line);
    if (clean.empty()) return;
    fn(tsv::split(clean));
  });
}

}  // namespace detail

// Converts a public distribution into the six-file layout. The entity and
// relation sets are the kgbert id lists when present, then every id used by
// a split in order of first appearance (train, valid, test); names and
// descriptions are attached afterwards.
inline ConvertReport convert_public_dataset(const std::filesystem::path& src, const std::filesystem::path& dst,
                                            const ConvertOptions& options) {
  ConvertReport report;
  std::array<std::filesystem::path, 3> triple_files;
  switch (options.format) {
    case SourceFormat::kgbert:
      triple_files = {src / "train.tsv", src / "dev.tsv", src / "test.tsv"};
      break;
    case SourceFormat::wordnet:
      triple_files = {src / "train.txt", src / "valid.txt", src / "test.txt"};
      break;
    case SourceFormat::wikidata5m:
      triple_files = {src / "wikidata5m_transductive_train.txt", src / "wikidata5m_transductive_valid.txt",
                      src / "wikidata5m_transductive_test.txt"};
      break;
  }
  for (const auto& f : triple_files)
    if (!std::filesystem::is_regular_file(f)) throw IoError("missing source file: " + f.string());

  detail::IdIndex eidx, ridx;
  std::vector<NamedItem> entities, relations;
  auto entity = [&](std::string_view id) {
    auto it = eidx.find(id);
    if (it != eidx.end()) return it->second;
    const auto idx = static_cast<std::uint32_t>(entities.size());
    eidx.emplace(std::string(id), idx);
    entities.push_back({std::string(id), {}});
    return idx;
  };
  auto relation = [&](std::string_view id) {
    auto it = ridx.find(id);
    if (it != ridx.end()) return it->second;
    const auto idx = static_cast<std::uint32_t>(relations.size());
    ridx.emplace(std::string(id), idx);
    relations.push_back({std::string(id), {}});
    return idx;
  };

  // kgbert ships full id lists; entities listed there but absent from every
  // split are kept.
  if (options.format == SourceFormat::kgbert) {
    if (std::filesystem::is_regular_file(src / "entities.txt"))
      detail::read_columns(src / "entities.txt", [&](const std::vector<std::string_view>& f) {
        if (!f.empty() && !f[0].empty()) entity(f[0]);
      });
    if (std::filesystem::is_regular_file(src / "relations.txt"))
      detail::read_columns(src / "relations.txt", [&](const std::vector<std::string_view>& f) {
        if (!f.empty() && !f[0].empty()) relation(f[0]);
      });
  }

  KnowledgeGraph::SplitArray splits;
  std::vector<Triple> earlier;  // sorted triples of previous splits
  for (std::size_t s = 0; s < 3; ++s) {
    const std::string text = tsv::read_file(triple_files[s]);
    tsv::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
      const std::string clean = detail::strip_cr(line);
      if (clean.empty()) return;
      auto fields = tsv::split(clean);
      if (fields.size() != 3)
        throw ValidationError(triple_files[s].filename().string() + ":" + std::to_string(line_no) +
                              ": expected 3 tab-separated fields");
      const Triple t{entity(fields[0]), relation(fields[1]), entity(fields[2])};
      if (s > 0 && std::binary_search(earlier.begin(), earlier.end(), t)) {
        ++report.dropped_cross_split;
        return;
      }
      splits[s].push_back(t);
    });
    earlier.insert(earlier.end(), splits[s].begin(), splits[s].end());
    std::sort(earlier.begin(), earlier.end());
  }

  std::vector<std::string> descriptions(entities.size());
  auto set_entity_name = [&](std::string_view id, std::string_view name) {
    auto it = eidx.find(id);
    if (it != eidx.end() && entities[it->second].name.empty())
      entities[it->second].name = detail::sanitize(name, report.sanitized_fields);
  };
  auto set_relation_name = [&](std::string_view id, std::string_view name) {
    auto it = ridx.find(id);
    if (it != ridx.end() && relations[it->second].name.empty())
      relations[it->second].name = detail::sanitize(name, report.sanitized_fields);
  };
  auto set_description = [&](std::string_view id, std::string_view text) {
    auto it = eidx.find(id);
    if (it != eidx.end()) descriptions[it->second] = detail::sanitize(text, report.sanitized_fields);
  };
  auto rest_joined = [](const std::vector<std::string_view>& f, std::size_t from) {
    std::string out;
    for (std::size_t i = from; i < f.size(); ++i) {
      if (i > from) out += ' ';
      out += f[i];
    }
    return out;
  };

  switch (options.format) {
    case SourceFormat::kgbert: {
      const bool has_long = std::filesystem::is_regular_file(src / "entity2textlong.txt");
      detail::read_columns(src / "entity2text.txt", [&](const std::vector<std::string_view>& f) {
        if (f.size() < 2) return;
        const std::string text = rest_joined(f, 1);
        if (options.split_name_gloss && !has_long) {
          const auto cut = text.find(", ");
          if (cut != std::string::npos) {
            set_entity_name(f[0], std::string_view(text).substr(0, cut));
            set_description(f[0], std::string_view(text).substr(cut + 2));
            return;
          }
        }
        set_entity_name(f[0], text);
      });
      if (has_long) {
        detail::read_columns(src / "entity2textlong.txt", [&](const std::vector<std::string_view>& f) {
          if (f.size() >= 2) set_description(f[0], rest_joined(f, 1));
        });
      }
      if (std::filesystem::is_regular_file(src / "relation2text.txt")) {
        detail::read_columns(src / "relation2text.txt", [&](const std::vector<std::string_view>& f) {
          if (f.size() >= 2) set_relation_name(f[0], rest_joined(f, 1));
        });
      }
      break;
    }
    case SourceFormat::wordnet: {
      detail::read_columns(src / "wordnet-mlj12-definitions.txt", [&](const std::vector<std::string_view>& f) {
        if (f.size() < 2) return;
        set_entity_name(f[0], detail::clean_wordnet_lemma(f[1]));
        if (f.size() >= 3) set_description(f[0], rest_joined(f, 2));
      });
      break;
    }
    case SourceFormat::wikidata5m: {
      detail::read_columns(src / "wikidata5m_entity.txt", [&](const std::vector<std::string_view>& f) {
        if (f.size() >= 2) set_entity_name(f[0], f[1]);
      });
      detail::read_columns(src / "wikidata5m_relation.txt", [&](const std::vector<std::string_view>& f) {
        if (f.size() >= 2) set_relation_name(f[0], f[1]);
      });
      detail::read_columns(src / "wikidata5m_text.txt", [&](const std::vector<std::string_view>& f) {
        if (f.size() >= 2) set_description(f[0], rest_joined(f, 1));
      });
      break;
    }
  }

  for (auto& e : entities) {
    if (e.name.empty()) {
      e.name = e.id;
      ++report.missing_names;
    }
  }
  for (auto& r : relations) {
    if (r.name.empty()) r.name = r.id;
  }

  KnowledgeGraph kg(std::move(entities), std::move(relations), std::move(descriptions), std::move(splits));
  write_dataset(kg, dst);
  report.stats = compute_stats(kg);
  return report;
}

}  // namespace kgsynth
