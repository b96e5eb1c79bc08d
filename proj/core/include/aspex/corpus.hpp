#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aspex {

/// Tag ids are stable: they index CRF transition rows and emission columns.
enum class IobTag : int { O = 0, B = 1, I = 2 };

inline constexpr int kNumTags = 3;

std::string_view tag_name(IobTag t);
/// Accepts exactly "O", "B-aspect", "I-aspect".
std::optional<IobTag> parse_tag(std::string_view s);

/// Offsets count Unicode code points, matching the SemEval `from`/`to`
/// attributes.
struct Token {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct AspectSpan {
  std::string term;
  std::size_t from = 0;
  std::size_t to = 0;
};

struct SentenceRecord {
  std::string id;
  std::string text;
  std::vector<AspectSpan> spans;
};

struct TaggedSentence {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<IobTag> tags;
};

/// Inclusive token-index range.
struct Chunk {
  std::size_t first = 0;
  std::size_t last = 0;
  friend bool operator==(const Chunk&, const Chunk&) = default;
  friend auto operator<=>(const Chunk&, const Chunk&) = default;
};

struct ValidationIssue {
  std::string sentence_id;
  std::string message;
};

struct SemEvalDocument {
  std::vector<SentenceRecord> sentences;
  /// Sentences rejected by span validation; they are absent from `sentences`.
  std::vector<ValidationIssue> errors;
};

/// Throws XmlParseError (with line) on malformed XML.
SemEvalDocument parse_semeval(std::string_view xml_document);

/// Whitespace split, then leading/trailing punctuation peeled off one
/// character per token. Deterministic; see kTokenizerVersion.
std::vector<Token> tokenize(std::string_view sentence_text);

struct EncodeResult {
  std::vector<IobTag> tags;
  std::vector<std::string> warnings;
};

/// Tokens intersecting a span are tagged B (first) / I (rest). Spans whose
/// edges fall inside a token take the whole token and produce a warning.
/// Spans overlapping an earlier span at token level are dropped with a
/// warning.
EncodeResult encode_iob(const std::vector<Token>& tokens,
                        std::vector<AspectSpan> spans);

/// Accepts arbitrary tag sequences. An I with no open chunk opens one.
std::vector<Chunk> decode_chunks(const std::vector<IobTag>& tags);

/// True when no I follows O and the sequence does not start with I.
bool is_valid_iob(const std::vector<IobTag>& tags);

/// Tokenize + encode every record; alignment warnings are appended to
/// `warnings` prefixed with the sentence id.
std::vector<TaggedSentence> to_tagged(const std::vector<SentenceRecord>& records,
                                      std::vector<ValidationIssue>* warnings);

/// `token<TAB>tag` per line, blank line after each sentence.
void write_conll(std::ostream& out, const std::vector<TaggedSentence>& sentences);

/// Inverse of write_conll at token level. Offsets are rebuilt by joining
/// tokens with single spaces; ids are the 1-based sentence ordinal.
/// Throws ValidationError on malformed lines.
std::vector<TaggedSentence> read_conll(std::istream& in);

/// Loads CoNLL, or SemEval XML when the path ends with ".xml".
std::vector<TaggedSentence> load_tagged(const std::string& path);

}  // namespace aspex
