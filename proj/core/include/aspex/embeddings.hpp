#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "aspex/corpus.hpp"

namespace aspex {

/// Frozen word-vector table. Immutable once loaded.
class EmbeddingTable {
 public:
  enum class Source { Exact, Lowercase, Unknown };

  struct Resolution {
    Source source = Source::Unknown;
    std::size_t row = 0;
  };

  /// The unknown-word row is drawn uniformly from [-0.25, 0.25] using `seed`.
  EmbeddingTable(std::string name, std::size_t dim, std::uint64_t seed);

  /// Returns false (and leaves the table unchanged) for a repeated word.
  bool add(std::string_view word, std::span<const double> values);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::string& word(std::size_t row) const { return words_[row]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * dim_, dim_};
  }
  std::span<const double> unk_row() const { return unk_; }

  /// exact -> ASCII-lowercased -> unknown.
  Resolution resolve(std::string_view word) const;

  /// Total: falls back to unk_row.
  std::span<const double> lookup(std::string_view word) const;

 private:
  std::string name_;
  std::size_t dim_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
  std::vector<double> unk_;
};

struct LoadReport {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::size_t filtered = 0;
  bool header_skipped = false;
};

struct LoadOptions {
  std::string name;
  std::size_t expected_dim = 300;
  std::uint64_t seed = 0;
  /// When set, only words contained in the filter are kept. Lets a
  /// multi-gigabyte vector file be reduced to a dataset's vocabulary.
  const std::unordered_set<std::string>* filter = nullptr;
  /// Test the ASCII-lowercased word against the filter instead, so every
  /// case variant of a dataset word survives (needed for coverage).
  bool fold_filter = false;
};

struct LoadedTable {
  EmbeddingTable table;
  LoadReport report;
};

/// `word v1 ... vD` per line; an optional `|V| D` header line is skipped.
/// Throws ValidationError when no usable line remains.
LoadedTable load_text_vectors(std::istream& in, const LoadOptions& opts);
LoadedTable load_text_vectors(const std::string& path, const LoadOptions& opts);

/// Surface forms plus their lowercase variants, for LoadOptions::filter.
std::unordered_set<std::string> lookup_filter(const std::vector<TaggedSentence>& sentences);

enum class CaseMode { Insensitive, Sensitive };

std::string_view case_mode_name(CaseMode m);

struct CoverageReport {
  std::string dataset;
  std::string embedding;
  CaseMode mode = CaseMode::Insensitive;
  std::size_t covered = 0;
  std::size_t total = 0;
  double ratio = 0.0;
};

/// Insensitive: lowercased forms, deduplicated. Sensitive: surface forms.
std::set<std::string> build_vocab(const std::vector<TaggedSentence>& sentences, CaseMode mode);

/// Insensitive mode compares ASCII-lowercased forms on both sides;
/// sensitive mode counts exact matches only. Throws ValidationError on an
/// empty vocabulary.
CoverageReport coverage(const std::set<std::string>& vocab, const EmbeddingTable& table,
                        CaseMode mode, std::string dataset = {});

/// Character inventory for the char composer. Id 0 is reserved for unknown
/// characters; known characters get ids 1..n in code-point order.
class CharVocab {
 public:
  CharVocab() = default;
  explicit CharVocab(std::vector<char32_t> chars);

  static CharVocab build(const std::vector<TaggedSentence>& sentences);

  std::size_t size() const { return chars_.size() + 1; }
  std::size_t id(char32_t c) const;
  std::vector<std::size_t> encode(std::string_view word) const;
  const std::vector<char32_t>& chars() const { return chars_; }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, std::size_t> index_;
};

}  // namespace aspex
