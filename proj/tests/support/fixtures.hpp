#pragma once

// Synthetic corpora for training tests.
//
// Planted-aspect corpus: a closed vocabulary of trigger words, aspect words
// (all ending in "ion") and filler words. Every aspect phrase (one or two
// aspect words) is planted right after a trigger word; aspect words also
// show up untagged away from triggers. Test sentences additionally swap in
// unseen words (unseen aspect words keep the "ion" ending, unseen fillers
// do not), which are absent from the word-vector table.

#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "aspex/common.hpp"
#include "aspex/corpus.hpp"
#include "aspex/embeddings.hpp"

namespace aspex::fixture {

struct PlantedSpec {
  std::size_t train_sentences = 500;
  std::size_t test_sentences = 100;
  std::size_t vocabulary = 200;
  std::size_t triggers = 8;
  std::size_t aspect_words = 60;
  double unseen_aspect_rate = 0.4;  // test only
  double unseen_filler_rate = 0.1;  // test only
  std::uint64_t seed = 7;
};

struct PlantedCorpus {
  std::vector<std::string> vocabulary;  // train-side closed vocabulary
  std::vector<TaggedSentence> train;
  std::vector<TaggedSentence> test;
};

namespace detail {

inline std::string random_stem(Rng& rng, std::size_t min_len, std::size_t max_len) {
  static const std::string consonants = "bcdfghjklmnprstvwz";
  static const std::string vowels = "aeiou";
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  std::string s;
  for (std::size_t k = 0; k < len; ++k) {
    const std::string& pool = (k % 2 == 0) ? consonants : vowels;
    s.push_back(pool[rng.below(pool.size())]);
  }
  return s;
}

inline bool ends_with_ion(const std::string& w) {
  return w.size() >= 3 && w.compare(w.size() - 3, 3, "ion") == 0;
}

// Builds a sentence from (word, tag) pairs, joining words with spaces.
inline TaggedSentence assemble(const std::vector<std::pair<std::string, IobTag>>& items,
                               std::string id) {
  TaggedSentence s;
  s.id = std::move(id);
  std::size_t off = 0;
  for (const auto& [w, t] : items) {
    if (!s.text.empty()) {
      s.text.push_back(' ');
      ++off;
    }
    s.text += w;
    s.tokens.push_back({w, off, off + w.size()});
    s.tags.push_back(t);
    off += w.size();
  }
  return s;
}

}  // namespace detail

inline PlantedCorpus make_planted_corpus(const PlantedSpec& spec) {
  if (spec.triggers == 0 || spec.aspect_words == 0 ||
      spec.vocabulary <= spec.triggers + spec.aspect_words) {
    throw std::invalid_argument("planted corpus: vocabulary must exceed triggers + aspect words");
  }
  Rng rng(mix_seed(spec.seed, 0x706c616e74));
  std::set<std::string> used;
  auto fresh = [&](bool aspect) {
    while (true) {
      std::string w = detail::random_stem(rng, 3, 6);
      if (aspect) {
        w += "ion";
      } else if (detail::ends_with_ion(w)) {
        continue;
      }
      if (used.insert(w).second) return w;
    }
  };

  PlantedCorpus c;
  std::vector<std::string> triggers;
  std::vector<std::string> aspects;
  std::vector<std::string> fillers;
  for (std::size_t k = 0; k < spec.triggers; ++k) triggers.push_back(fresh(false));
  for (std::size_t k = 0; k < spec.aspect_words; ++k) aspects.push_back(fresh(true));
  while (triggers.size() + aspects.size() + fillers.size() < spec.vocabulary) {
    fillers.push_back(fresh(false));
  }
  c.vocabulary = triggers;
  c.vocabulary.insert(c.vocabulary.end(), aspects.begin(), aspects.end());
  c.vocabulary.insert(c.vocabulary.end(), fillers.begin(), fillers.end());

  auto pick = [&](const std::vector<std::string>& v) { return v[rng.below(v.size())]; };

  auto sentence = [&](bool test, std::size_t idx) {
    std::vector<std::pair<std::string, IobTag>> items;
    const std::size_t n_fill = 4 + rng.below(8);
    std::vector<std::string> fill;
    for (std::size_t k = 0; k < n_fill; ++k) {
      const bool unseen = test && rng.uniform() < spec.unseen_filler_rate;
      fill.push_back(unseen ? fresh(false) : pick(fillers));
    }
    // Untagged aspect word away from any trigger.
    if (rng.uniform() < 0.4) fill[rng.below(fill.size())] = pick(aspects);

    const std::size_t n_aspects = 1 + rng.below(2);
    std::set<std::size_t> slots;
    while (slots.size() < n_aspects) slots.insert(rng.below(fill.size() + 1));

    for (std::size_t k = 0; k <= fill.size(); ++k) {
      if (slots.contains(k)) {
        items.emplace_back(pick(triggers), IobTag::O);
        const std::size_t len = rng.uniform() < 0.35 ? 2 : 1;
        for (std::size_t a = 0; a < len; ++a) {
          const bool unseen = test && rng.uniform() < spec.unseen_aspect_rate;
          items.emplace_back(unseen ? fresh(true) : pick(aspects),
                             a == 0 ? IobTag::B : IobTag::I);
        }
      }
      if (k < fill.size()) items.emplace_back(fill[k], IobTag::O);
    }
    return detail::assemble(items, (test ? "test-" : "train-") + std::to_string(idx));
  };

  for (std::size_t i = 0; i < spec.train_sentences; ++i) c.train.push_back(sentence(false, i));
  for (std::size_t i = 0; i < spec.test_sentences; ++i) c.test.push_back(sentence(true, i));
  return c;
}

/// Uniform [-1, 1] vectors for every word, seeded.
inline EmbeddingTable stub_table(const std::vector<std::string>& words, std::size_t dim,
                                 std::uint64_t seed, std::string name = "stub") {
  EmbeddingTable t(std::move(name), dim, seed);
  Rng rng(mix_seed(seed, 0x73747562));
  std::vector<double> v(dim);
  for (const auto& w : words) {
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    t.add(w, v);
  }
  return t;
}

inline void write_text_vectors(std::ostream& out, const EmbeddingTable& t) {
  out.precision(17);
  for (std::size_t r = 0; r < t.size(); ++r) {
    out << t.word(r);
    for (double x : t.row(r)) out << ' ' << x;
    out << '\n';
  }
}

}  // namespace aspex::fixture
