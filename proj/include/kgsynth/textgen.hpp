#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kgsynth/error.hpp"
#include "kgsynth/rng.hpp"
#include "kgsynth/utf8.hpp"

namespace kgsynth {

// Character-level unigram model with an end-of-sequence event. A string
// s = s_1..s_n has probability prod p(s_i) * p(EOS).
class UnigramModel {
 public:
  struct Entry {
    char32_t symbol;
    double probability;
  };

  UnigramModel() = default;

  // Entries must be non-negative and sum with eos to 1 (within 1e-9).
  UnigramModel(std::vector<Entry> entries, double eos_probability)
      : entries_(std::move(entries)), eos_(eos_probability) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.symbol < b.symbol; });
    double total = eos_;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!(entries_[i].probability >= 0.0)) throw ValidationError("unigram: negative probability");
      if (i && entries_[i].symbol == entries_[i - 1].symbol) throw ValidationError("unigram: duplicate symbol");
      total += entries_[i].probability;
    }
    if (!(eos_ >= 0.0) || std::abs(total - 1.0) > 1e-9)
      throw ValidationError("unigram: probabilities do not sum to 1");
    cumulative_.reserve(entries_.size());
    double acc = 0.0;
    for (const auto& e : entries_) {
      acc += e.probability;
      cumulative_.push_back(acc);
    }
  }

  std::span<const Entry> entries() const noexcept { return entries_; }
  double eos_probability() const noexcept { return eos_; }

  double probability(char32_t c) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), c,
                               [](const Entry& e, char32_t v) { return e.symbol < v; });
    return (it != entries_.end() && it->symbol == c) ? it->probability : 0.0;
  }

  // log p(s) including the terminating EOS; -inf if any symbol is unseen.
  double log_probability(std::string_view s) const {
    double lp = std::log(eos_);
    for (char32_t c : utf8::decode(s)) lp += std::log(probability(c));
    return lp;
  }

  // One draw: a symbol, or kEos.
  static constexpr char32_t kEos = 0xFFFFFFFF;
  char32_t draw(Rng& rng) const {
    const double u = rng.unit();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) return kEos;
    return entries_[static_cast<std::size_t>(it - cumulative_.begin())].symbol;
  }

  bool can_emit_symbols() const noexcept {
    return std::any_of(entries_.begin(), entries_.end(), [](const Entry& e) { return e.probability > 0.0; });
  }

 private:
  std::vector<Entry> entries_;
  double eos_ = 1.0;
  std::vector<double> cumulative_;
};

// p(c) = count(c) / (chars + strings); p(EOS) = strings / (chars + strings).
inline UnigramModel fit_unigram(std::span<const std::string> corpus) {
  if (corpus.empty()) throw ValidationError("fit_unigram: empty corpus");
  std::map<char32_t, std::uint64_t> counts;
  std::uint64_t chars = 0;
  for (const auto& s : corpus) {
    for (char32_t c : utf8::decode(s)) {
      ++counts[c];
      ++chars;
    }
  }
  if (chars == 0) throw ValidationError("fit_unigram: corpus has no characters");
  const auto denom = static_cast<double>(chars + corpus.size());
  std::vector<UnigramModel::Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [c, n] : counts) entries.push_back({c, static_cast<double>(n) / denom});
  return UnigramModel(std::move(entries), static_cast<double>(corpus.size()) / denom);
}

inline UnigramModel fit_unigram(const std::vector<std::string>& corpus) {
  return fit_unigram(std::span<const std::string>(corpus));
}

inline constexpr std::size_t kMaxSampleLength = 10000;
inline constexpr std::size_t kMaxEmptyDraws = 100000;

// i.i.d. characters until EOS; an immediate EOS is redrawn so the result is
// never empty.
inline std::string sample_string(const UnigramModel& model, Rng& rng) {
  if (!model.can_emit_symbols()) throw SamplingError("sample_string: model can only produce empty strings");
  for (std::size_t empty = 0; empty < kMaxEmptyDraws; ++empty) {
    std::string out;
    std::size_t length = 0;
    for (;;) {
      const char32_t c = model.draw(rng);
      if (c == UnigramModel::kEos) break;
      if (++length > kMaxSampleLength)
        throw SamplingError("sample_string: exceeded " + std::to_string(kMaxSampleLength) + " characters");
      utf8::append(out, c);
    }
    if (length > 0) return out;
  }
  throw SamplingError("sample_string: only empty draws");
}

// n distinct strings, none in `forbidden`. Item k draws from its own stream
// derived from (seed, k); collisions are resolved in item order by drawing
// again from the same stream, so the output does not depend on scheduling.
// The budget of 1000*n draws is shared by all items.
inline std::vector<std::string> sample_unique_strings(const UnigramModel& model, std::size_t n,
                                                      const std::unordered_set<std::string>& forbidden,
                                                      std::uint64_t seed) {
  std::vector<std::string> out;
  out.reserve(n);
  std::unordered_set<std::string> taken;
  taken.reserve(n);
  const std::size_t budget = 1000 * n;
  std::size_t draws = 0;
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng(derive_seed(seed, {k}));
    for (;;) {
      if (++draws > budget)
        throw UniquenessError("sample_unique_strings: retry budget of " + std::to_string(budget) +
                              " draws exhausted after " + std::to_string(k) + " of " + std::to_string(n) +
                              " strings");
      std::string s = sample_string(model, rng);
      if (forbidden.count(s) || taken.count(s)) continue;
      taken.insert(s);
      out.push_back(std::move(s));
      break;
    }
  }
  return out;
}

// `char<TAB>probability` rows in code-point order, then `<EOS><TAB>p`.
inline std::string format_unigram(const UnigramModel& model) {
  std::string out;
  char buf[64];
  for (const auto& e : model.entries()) {
    utf8::append(out, e.symbol);
    std::snprintf(buf, sizeof buf, "\t%.17g\n", e.probability);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "<EOS>\t%.17g\n", model.eos_probability());
  out += buf;
  return out;
}

}  // namespace kgsynth
