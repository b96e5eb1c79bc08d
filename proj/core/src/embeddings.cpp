#include "aspex/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>

#include "aspex/common.hpp"

namespace aspex {

namespace {

constexpr std::uint64_t kUnkStream = 0x756e6b;  // "unk"

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::string name, std::size_t dim, std::uint64_t seed)
    : name_(std::move(name)), dim_(dim), unk_(dim) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  Rng rng(mix_seed(seed, kUnkStream));
  for (auto& v : unk_) v = rng.uniform(-0.25, 0.25);
}

bool EmbeddingTable::add(std::string_view word, std::span<const double> values) {
  if (values.size() != dim_) throw ValidationError("embedding row has wrong dimension");
  auto [it, inserted] = index_.try_emplace(std::string(word), words_.size());
  if (!inserted) return false;
  words_.emplace_back(word);
  data_.insert(data_.end(), values.begin(), values.end());
  return true;
}

EmbeddingTable::Resolution EmbeddingTable::resolve(std::string_view word) const {
  if (auto it = index_.find(std::string(word)); it != index_.end()) {
    return {Source::Exact, it->second};
  }
  if (auto it = index_.find(ascii_lower(word)); it != index_.end()) {
    return {Source::Lowercase, it->second};
  }
  return {};
}

std::span<const double> EmbeddingTable::lookup(std::string_view word) const {
  const auto r = resolve(word);
  return r.source == Source::Unknown ? unk_row() : row(r.row);
}

LoadedTable load_text_vectors(std::istream& in, const LoadOptions& opts) {
  EmbeddingTable table(opts.name, opts.expected_dim, opts.seed);
  LoadReport report;
  std::vector<double> values(opts.expected_dim);

  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    ++report.lines;
    const auto fields = split_fields(line);
    if (first) {
      first = false;
      std::size_t a = 0;
      std::size_t b = 0;
      if (fields.size() == 2 && parse_number(fields[0], a) && parse_number(fields[1], b)) {
        report.header_skipped = true;
        continue;
      }
    }
    if (fields.empty()) continue;
    if (fields.size() != opts.expected_dim + 1) {
      ++report.malformed;
      continue;
    }
    if (opts.filter && !opts.filter->contains(opts.fold_filter ? ascii_lower(fields[0])
                                                               : std::string(fields[0]))) {
      ++report.filtered;
      continue;
    }
    bool ok = true;
    for (std::size_t d = 0; d < opts.expected_dim; ++d) {
      if (!parse_number(fields[d + 1], values[d])) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++report.malformed;
      continue;
    }
    if (table.add(fields[0], values)) {
      ++report.loaded;
    } else {
      ++report.duplicates;
    }
  }
  if (report.loaded == 0) {
    throw ValidationError("no usable embedding lines (malformed: " +
                          std::to_string(report.malformed) + ")");
  }
  return {std::move(table), report};
}

LoadedTable load_text_vectors(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embeddings file: " + path);
  return load_text_vectors(in, opts);
}

std::unordered_set<std::string> lookup_filter(const std::vector<TaggedSentence>& sentences) {
  std::unordered_set<std::string> out;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      out.insert(t.text);
      out.insert(ascii_lower(t.text));
    }
  }
  return out;
}

std::string_view case_mode_name(CaseMode m) {
  return m == CaseMode::Insensitive ? "insensitive" : "sensitive";
}

std::set<std::string> build_vocab(const std::vector<TaggedSentence>& sentences, CaseMode mode) {
  std::set<std::string> vocab;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      vocab.insert(mode == CaseMode::Insensitive ? ascii_lower(t.text) : t.text);
    }
  }
  return vocab;
}

CoverageReport coverage(const std::set<std::string>& vocab, const EmbeddingTable& table,
                        CaseMode mode, std::string dataset) {
  if (vocab.empty()) throw ValidationError("coverage: empty dataset vocabulary");
  CoverageReport rep;
  rep.dataset = std::move(dataset);
  rep.embedding = table.name();
  rep.mode = mode;
  rep.total = vocab.size();
  std::unordered_set<std::string> folded;
  if (mode == CaseMode::Insensitive) {
    for (std::size_t r = 0; r < table.size(); ++r) folded.insert(ascii_lower(table.word(r)));
  }
  for (const auto& w : vocab) {
    const bool hit = mode == CaseMode::Sensitive
                         ? table.resolve(w).source == EmbeddingTable::Source::Exact
                         : folded.contains(ascii_lower(w));
    if (hit) ++rep.covered;
  }
  rep.ratio = static_cast<double>(rep.covered) / static_cast<double>(rep.total);
  return rep;
}

CharVocab::CharVocab(std::vector<char32_t> chars) : chars_(std::move(chars)) {
  std::sort(chars_.begin(), chars_.end());
  chars_.erase(std::unique(chars_.begin(), chars_.end()), chars_.end());
  for (std::size_t i = 0; i < chars_.size(); ++i) index_.emplace(chars_[i], i + 1);
}

CharVocab CharVocab::build(const std::vector<TaggedSentence>& sentences) {
  std::vector<char32_t> chars;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      const auto cps = utf8::decode(t.text);
      chars.insert(chars.end(), cps.begin(), cps.end());
    }
  }
  return CharVocab(std::move(chars));
}

std::size_t CharVocab::id(char32_t c) const {
  auto it = index_.find(c);
  return it == index_.end() ? 0 : it->second;
}

std::vector<std::size_t> CharVocab::encode(std::string_view word) const {
  const auto cps = utf8::decode(word);
  std::vector<std::size_t> ids;
  ids.reserve(cps.size());
  for (char32_t c : cps) ids.push_back(id(c));
  return ids;
}

}  // namespace aspex
