#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "kgsynth/rewriter.hpp"
#include "kgsynth/rng.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace kgsynth;

namespace {

std::string rewrite(const NameMap& map, std::string_view text) { return rewrite_text(PatternIndex(map), text); }

// Short strings over an alphabet with letters, separators and multibyte
// characters so that overlaps and boundaries are common.
std::string random_text(Rng& rng, std::size_t max_len) {
  static constexpr std::string_view kPieces[] = {"a", "b", "A", " ", " ", "-", ".", "\xc3\xa9", "\xc2\xb7", "1",
                                                 "ab", "ba", "\xe2\x80\x94"};
  std::string s;
  const std::size_t len = rng.below(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) s += kPieces[rng.below(std::size(kPieces))];
  return s;
}

NameMap random_map(Rng& rng) {
  NameMap map;
  const std::size_t n = 1 + rng.below(8);
  for (std::size_t i = 0; i < n; ++i) {
    std::string key = random_text(rng, 4);
    if (key.empty()) key = "a";
    map[key] = "<" + std::to_string(i) + ">";
  }
  return map;
}

}  // namespace

TEST(PatternIndex, MembershipIsExact) {
  const NameMap map{{"New York", "X1"}, {"York", "X2"}, {"New", "X3"}, {"\xc3\xa9t\xc3\xa9", "X4"}};
  const PatternIndex index(map);
  EXPECT_EQ(index.size(), 4u);
  for (const auto& [k, v] : map) {
    ASSERT_NE(index.find(k), nullptr) << k;
    EXPECT_EQ(*index.find(k), v);
  }
  for (auto miss : {"", "Ne", "New Y", "York ", "york", "\xc3\xa9t"}) EXPECT_FALSE(index.contains(miss)) << miss;
}

TEST(PatternIndex, RejectsEmptyKey) { EXPECT_THROW(PatternIndex(NameMap{{"", "x"}}), ValidationError); }

TEST(PatternIndex, SyntheticNamesFindable) {
  kgtest::SyntheticSpec spec;
  spec.entities = 5000;
  spec.train = 5000;
  const auto kg = kgtest::make_synthetic_kg(spec);
  const auto map = make_name_map(kg.entity_names(), kg.entity_names());
  const PatternIndex index(map);
  for (const auto& n : kg.entity_names()) EXPECT_TRUE(index.contains(n));
  Rng rng(5);
  std::size_t misses = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string probe = "zz" + std::to_string(rng.next());
    misses += !index.contains(probe);
  }
  EXPECT_EQ(misses, 1000u);
}

TEST(Rewrite, LongestMatchWins) {
  const NameMap map{{"New York", "X1"}, {"York", "X2"}};
  EXPECT_EQ(rewrite(map, "born in New York City"), "born in X1 City");
  EXPECT_EQ(rewrite(map, "York and New York"), "X2 and X1");
}

TEST(Rewrite, HyphenIsABoundary) {
  EXPECT_EQ(rewrite({{"york", "X2"}}, "york-shire"), "X2-shire");
}

TEST(Rewrite, NoMatchInsideWords) {
  const NameMap map{{"art", "X"}, {"Basel", "Y"}};
  EXPECT_EQ(rewrite(map, "part of art, Baseline Basel."), "part of X, Baseline Y.");
  EXPECT_EQ(rewrite(map, "art1 1art art_"), "art1 1art X_");
}

TEST(Rewrite, CaseSensitive) { EXPECT_EQ(rewrite({{"Basel", "Y"}}, "basel BASEL Basel"), "basel BASEL Y"); }

TEST(Rewrite, NonAsciiWordCharacters) {
  const NameMap map{{"Zurich", "Z"}};
  EXPECT_EQ(rewrite(map, "Zurich\xc3\xa9"), "Zurich\xc3\xa9");
  EXPECT_EQ(rewrite(map, "Zurich\xe2\x80\x94 and \xc2\xabZurich\xc2\xbb"), "Z\xe2\x80\x94 and \xc2\xabZ\xc2\xbb");
}

TEST(Rewrite, SinglePassSwap) {
  const NameMap map{{"Johann Bernoulli", "Daniel Bernoulli"}, {"Daniel Bernoulli", "Johann Bernoulli"}};
  EXPECT_EQ(rewrite(map, "Johann Bernoulli, father of Daniel Bernoulli."),
            "Daniel Bernoulli, father of Johann Bernoulli.");
}

TEST(Rewrite, ReplacementNotRescanned) {
  EXPECT_EQ(rewrite({{"a", "a a"}}, "a"), "a a");
  EXPECT_EQ(rewrite({{"ab", "b"}, {"b", "c"}}, "ab b"), "b c");
}

TEST(Rewrite, EmptyMapIsIdentity) {
  const std::string text = "anything \xc3\xa9 at all";
  EXPECT_EQ(rewrite({}, text), text);
}

TEST(Rewrite, MatchAtEdgesAndAdjacentMatches) {
  const NameMap map{{"a", "1"}, {"b c", "2"}};
  EXPECT_EQ(rewrite(map, "a"), "1");
  EXPECT_EQ(rewrite(map, "a b c a"), "1 2 1");
  EXPECT_EQ(rewrite(map, "b c.a"), "2.1");
}

TEST(Rewrite, FallsBackToShorterKeyWhenLongerIsMidWord) {
  const NameMap map{{"New York", "X1"}, {"New", "X3"}};
  EXPECT_EQ(rewrite(map, "New Yorker"), "X3 Yorker");
}

TEST(Rewrite, AgreesWithQuadraticReference) {
  Rng rng(2024);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto map = random_map(rng);
    const PatternIndex index(map);
    const std::string text = random_text(rng, 40);
    ASSERT_EQ(rewrite_text(index, text), kgtest::ref::rewrite(map, text)) << "text='" << text << "'";
  }
}

TEST(Rewrite, IdentityMapLeavesDescriptions) {
  const auto kg = kgtest::bernoulli_kg();
  const auto out = rewrite_descriptions(kg, make_name_map(kg.entity_names(), kg.entity_names()));
  for (EntityIndex e = 0; e < kg.num_entities(); ++e) EXPECT_EQ(out[e], kg.description(e));
}

TEST(Rewrite, DescriptionsFollowNewNames) {
  const auto kg = kgtest::tiny_kg();
  const std::vector<std::string> names{"Beta", "Gamma", "Delta", "Epsilon", "Alpha"};
  const auto out = rewrite_descriptions(kg, make_name_map(kg.entity_names(), names));
  EXPECT_EQ(out[0], "Beta likes Gamma.");
  EXPECT_EQ(out[1], "Gamma knows Delta and Epsilon.");
  EXPECT_EQ(out[4], "Alpha likes Beta.");
}

TEST(Rewrite, ThreadCountDoesNotChangeOutput) {
  kgtest::SyntheticSpec spec;
  spec.entities = 3000;
  spec.train = 6000;
  const auto kg = kgtest::make_synthetic_kg(spec);
  std::vector<std::string> names(kg.entity_names().begin(), kg.entity_names().end());
  std::rotate(names.begin(), names.begin() + 1, names.end());
  const PatternIndex index(make_name_map(kg.entity_names(), names));
  EXPECT_EQ(rewrite_descriptions(kg, index, 1), rewrite_descriptions(kg, index, 4));
}

TEST(NameMap, FirstOccurrenceWins) {
  const std::vector<std::string> old{"X", "Y", "X", ""};
  const std::vector<std::string> neu{"1", "2", "3", "4"};
  const auto map = make_name_map(old, neu);
  EXPECT_EQ(map.size(), 2u);
  EXPECT_EQ(map.at("X"), "1");
}

TEST(TokenSpan, ContainsMatchesReference) {
  Rng rng(77);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::string text = random_text(rng, 30);
    std::string needle = random_text(rng, 3);
    EXPECT_EQ(contains_token_span(text, needle), kgtest::ref::mentions(text, needle))
        << "text='" << text << "' needle='" << needle << "'";
  }
}

TEST(PatternIndex, AllMatchesAtPosition) {
  const PatternIndex index(NameMap{{"a", "1"}, {"a b", "2"}, {"a bc", "3"}});
  std::vector<std::size_t> lengths;
  index.for_each_match_at("a b c", 0, [&](const PatternIndex::Match& m) { lengths.push_back(m.length); });
  EXPECT_EQ(lengths, (std::vector<std::size_t>{1, 3}));
}
