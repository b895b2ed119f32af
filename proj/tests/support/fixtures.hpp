#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "kgsynth/kg.hpp"

namespace kgtest {

using kgsynth::IdTriple;
using kgsynth::KnowledgeGraph;
using kgsynth::NamedItem;

// Removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag = "kgsynth") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (std::string(tag) + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// 5 entities, 2 relations, 4 + 1 + 1 triples.
inline KnowledgeGraph tiny_kg() {
  return KnowledgeGraph::from_ids(
      {{"e1", "Alpha"}, {"e2", "Beta"}, {"e3", "Gamma"}, {"e4", "Delta"}, {"e5", "Epsilon"}},
      {{"r1", "likes"}, {"r2", "knows"}},
      {{"e1", "Alpha likes Beta."}, {"e2", "Beta knows Gamma and Delta."}, {"e3", "Gamma."},
       {"e4", "Delta is near Epsilon."}, {"e5", "Epsilon likes Alpha."}},
      {{"e1", "r1", "e2"}, {"e2", "r2", "e3"}, {"e3", "r1", "e4"}, {"e4", "r2", "e5"}},
      {{"e5", "r1", "e1"}}, {{"e2", "r2", "e4"}});
}

// Two relations share the pair (jb, db); descriptions mention each other.
inline KnowledgeGraph bernoulli_kg() {
  return KnowledgeGraph::from_ids(
      {{"jb", "Johann Bernoulli"},
       {"db", "Daniel Bernoulli"},
       {"basel", "Basel"},
       {"groningen", "Groningen"},
       {"ch", "Switzerland"},
       {"nl", "Netherlands"},
       {"math", "mathematics"},
       {"euler", "Leonhard Euler"}},
      {{"father_of", "father of"},
       {"teacher_of", "teacher of"},
       {"born_in", "born in"},
       {"died_in", "died in"},
       {"located_in", "located in"},
       {"field", "field of work"}},
      {{"jb", "Johann Bernoulli was a Swiss mathematician from Basel, father of Daniel Bernoulli and teacher of "
              "Leonhard Euler."},
       {"db", "Daniel Bernoulli, son of Johann Bernoulli, was born in Groningen and died in Basel."},
       {"basel", "Basel is a city in Switzerland on the Rhine."},
       {"groningen", "Groningen is a city in the Netherlands."},
       {"ch", "Switzerland is a country in Europe."},
       {"nl", "The Netherlands is a country in Europe."},
       {"math", "mathematics is the study of quantity; Basel produced many mathematicians."},
       {"euler", "Leonhard Euler studied under Johann Bernoulli in Basel."}},
      {{"jb", "father_of", "db"},
       {"jb", "teacher_of", "db"},
       {"jb", "born_in", "basel"},
       {"jb", "died_in", "basel"},
       {"db", "born_in", "groningen"},
       {"basel", "located_in", "ch"},
       {"jb", "field", "math"},
       {"db", "field", "math"},
       {"jb", "teacher_of", "euler"},
       {"euler", "born_in", "basel"}},
      {{"db", "died_in", "basel"}, {"euler", "field", "math"}}, {{"groningen", "located_in", "nl"}});
}

// 6 entities, 2 relations; used by the metrics oracle.
inline KnowledgeGraph six_entity_kg() {
  return KnowledgeGraph::from_ids({{"a", "A"}, {"b", "B"}, {"c", "C"}, {"d", "D"}, {"e", "E"}, {"f", "F"}},
                                  {{"r", "r"}, {"s", "s"}}, {},
                                  {{"a", "r", "b"}, {"a", "r", "c"}, {"b", "s", "d"}, {"c", "r", "d"}, {"e", "s", "f"}},
                                  {{"d", "r", "e"}, {"a", "s", "f"}},
                                  {{"a", "r", "d"}, {"b", "s", "e"}, {"f", "r", "a"}});
}

// 20 entities in 4 groups of 5; "same_group" links members of a group with
// a few pairs held out, "next_group" links group g to group g+1.
inline KnowledgeGraph cluster_kg() {
  std::vector<NamedItem> entities;
  for (int i = 0; i < 20; ++i) entities.push_back({"n" + std::to_string(i), "node " + std::to_string(i)});
  auto id = [](int i) { return "n" + std::to_string(i); };
  std::vector<IdTriple> train, valid, test;
  for (int g = 0; g < 4; ++g) {
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < 5; ++b) {
        if (a == b) continue;
        const int x = g * 5 + a, y = g * 5 + b;
        IdTriple t{id(x), "same_group", id(y)};
        if (a == 0 && b == 1) test.push_back(t);
        else if (a == 2 && b == 3) valid.push_back(t);
        else train.push_back(t);
      }
      const int x = g * 5 + a, y = ((g + 1) % 4) * 5 + a;
      train.push_back({id(x), "next_group", id(y)});
    }
  }
  return KnowledgeGraph::from_ids(entities, {{"same_group", "same group"}, {"next_group", "next group"}}, {}, train,
                                  valid, test);
}

}  // namespace kgtest
