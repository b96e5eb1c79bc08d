#include "aspex/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "aspex/common.hpp"

namespace aspex {

std::string_view tag_name(IobTag t) {
  switch (t) {
    case IobTag::O:
      return "O";
    case IobTag::B:
      return "B-aspect";
    case IobTag::I:
      return "I-aspect";
  }
  return "O";
}

std::optional<IobTag> parse_tag(std::string_view s) {
  if (s == "O") return IobTag::O;
  if (s == "B-aspect") return IobTag::B;
  if (s == "I-aspect") return IobTag::I;
  return std::nullopt;
}

namespace {

namespace pt = boost::property_tree;

bool parse_offset(const std::string& s, std::size_t& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool is_space(char32_t c) {
  switch (c) {
    case U'\t':
    case U'\n':
    case U'\v':
    case U'\f':
    case U'\r':
    case U' ':
    case U'\u0085':
    case U'\u00A0':
    case U'\u1680':
    case U'\u2028':
    case U'\u2029':
    case U'\u202F':
    case U'\u205F':
    case U'\u3000':
      return true;
    default:
      return c >= U'\u2000' && c <= U'\u200A';
  }
}

bool is_edge_punct(char32_t c) {
  switch (c) {
    case U'.':
    case U',':
    case U'!':
    case U'?':
    case U';':
    case U':':
    case U'\'':
    case U'"':
    case U'(':
    case U')':
    case U'[':
    case U']':
      return true;
    default:
      return false;
  }
}

}  // namespace

SemEvalDocument parse_semeval(std::string_view xml_document) {
  pt::ptree tree;
  std::istringstream in{std::string(xml_document)};
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw XmlParseError("malformed XML: " + e.message() + " (line " +
                            std::to_string(e.line()) + ")",
                        e.line());
  }

  const auto root = tree.get_child_optional("sentences");
  if (!root) throw XmlParseError("missing <sentences> root element", 0);

  SemEvalDocument doc;
  for (const auto& [name, node] : *root) {
    if (name != "sentence") continue;
    SentenceRecord rec;
    rec.id = node.get<std::string>("<xmlattr>.id", "");
    rec.text = node.get<std::string>("text", "");
    const std::size_t text_len = utf8::decode(rec.text).size();

    bool bad = false;
    if (const auto terms = node.get_child_optional("aspectTerms")) {
      for (const auto& [tname, tnode] : *terms) {
        if (tname != "aspectTerm") continue;
        AspectSpan span;
        span.term = tnode.get<std::string>("<xmlattr>.term", "");
        const auto from = tnode.get<std::string>("<xmlattr>.from", "");
        const auto to = tnode.get<std::string>("<xmlattr>.to", "");
        if (!parse_offset(from, span.from) || !parse_offset(to, span.to)) {
          doc.errors.push_back({rec.id, "non-numeric offsets from='" + from +
                                            "' to='" + to + "'"});
          bad = true;
          break;
        }
        if (span.from >= span.to || span.to > text_len) {
          doc.errors.push_back(
              {rec.id, "invalid span [" + from + "," + to + ") for term '" +
                           span.term + "' in text of length " +
                           std::to_string(text_len)});
          bad = true;
          break;
        }
        rec.spans.push_back(std::move(span));
      }
    }
    if (!bad) doc.sentences.push_back(std::move(rec));
  }
  return doc;
}

std::vector<Token> tokenize(std::string_view sentence_text) {
  const std::u32string text = utf8::decode(sentence_text);
  std::vector<Token> tokens;
  auto emit = [&](std::size_t b, std::size_t e) {
    tokens.push_back({utf8::encode(std::u32string_view(text).substr(b, e - b)), b, e});
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i == n) break;
    std::size_t j = i;
    while (j < n && !is_space(text[j])) ++j;

    std::size_t b = i;
    std::size_t e = j;
    std::vector<std::size_t> trailing;
    while (b < e && is_edge_punct(text[b])) {
      emit(b, b + 1);
      ++b;
    }
    while (e > b && is_edge_punct(text[e - 1])) {
      --e;
      trailing.push_back(e);
    }
    if (b < e) emit(b, e);
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) emit(*it, *it + 1);
    i = j;
  }
  return tokens;
}

EncodeResult encode_iob(const std::vector<Token>& tokens, std::vector<AspectSpan> spans) {
  EncodeResult res;
  res.tags.assign(tokens.size(), IobTag::O);
  std::stable_sort(spans.begin(), spans.end(),
                   [](const AspectSpan& a, const AspectSpan& b) { return a.from < b.from; });

  std::optional<std::size_t> last_tagged;
  for (const auto& span : spans) {
    std::optional<std::size_t> first;
    std::size_t last = 0;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (tokens[k].start < span.to && tokens[k].end > span.from) {
        if (!first) first = k;
        last = k;
      }
    }
    const std::string where = "'" + span.term + "' [" + std::to_string(span.from) + "," +
                              std::to_string(span.to) + ")";
    if (!first) {
      res.warnings.push_back("span " + where + " covers no token; dropped");
      continue;
    }
    if (last_tagged && *first <= *last_tagged) {
      res.warnings.push_back("span " + where + " overlaps a previous span; dropped");
      continue;
    }
    if (span.from > tokens[*first].start || span.to < tokens[last].end) {
      res.warnings.push_back("span " + where +
                             " boundary falls inside a token; whole token included");
    }
    res.tags[*first] = IobTag::B;
    for (std::size_t k = *first + 1; k <= last; ++k) res.tags[k] = IobTag::I;
    last_tagged = last;
  }
  return res;
}

std::vector<Chunk> decode_chunks(const std::vector<IobTag>& tags) {
  std::vector<Chunk> chunks;
  bool open = false;
  for (std::size_t k = 0; k < tags.size(); ++k) {
    switch (tags[k]) {
      case IobTag::O:
        open = false;
        break;
      case IobTag::B:
        chunks.push_back({k, k});
        open = true;
        break;
      case IobTag::I:
        if (open) {
          chunks.back().last = k;
        } else {
          chunks.push_back({k, k});
          open = true;
        }
        break;
    }
  }
  return chunks;
}

bool is_valid_iob(const std::vector<IobTag>& tags) {
  for (std::size_t k = 0; k < tags.size(); ++k) {
    if (tags[k] == IobTag::I && (k == 0 || tags[k - 1] == IobTag::O)) return false;
  }
  return true;
}

std::vector<TaggedSentence> to_tagged(const std::vector<SentenceRecord>& records,
                                      std::vector<ValidationIssue>* warnings) {
  std::vector<TaggedSentence> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    TaggedSentence ts;
    ts.id = rec.id;
    ts.text = rec.text;
    ts.tokens = tokenize(rec.text);
    auto enc = encode_iob(ts.tokens, rec.spans);
    ts.tags = std::move(enc.tags);
    if (warnings) {
      for (auto& w : enc.warnings) warnings->push_back({rec.id, std::move(w)});
    }
    out.push_back(std::move(ts));
  }
  return out;
}

void write_conll(std::ostream& out, const std::vector<TaggedSentence>& sentences) {
  for (const auto& s : sentences) {
    for (std::size_t k = 0; k < s.tokens.size(); ++k) {
      out << s.tokens[k].text << '\t' << tag_name(s.tags[k]) << '\n';
    }
    out << '\n';
  }
}

std::vector<TaggedSentence> read_conll(std::istream& in) {
  std::vector<TaggedSentence> out;
  TaggedSentence cur;
  std::size_t offset = 0;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (cur.tokens.empty()) return;
    cur.id = std::to_string(out.size() + 1);
    out.push_back(std::move(cur));
    cur = TaggedSentence{};
    offset = 0;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || line.find('\t', tab + 1) != std::string::npos) {
      throw ValidationError("CoNLL line " + std::to_string(lineno) +
                            ": expected 'token<TAB>tag'");
    }
    const auto tag = parse_tag(std::string_view(line).substr(tab + 1));
    if (!tag) {
      throw ValidationError("CoNLL line " + std::to_string(lineno) + ": unknown tag '" +
                            line.substr(tab + 1) + "'");
    }
    std::string word = line.substr(0, tab);
    const std::size_t len = utf8::decode(word).size();
    if (!cur.text.empty()) {
      cur.text.push_back(' ');
      ++offset;
    }
    cur.text += word;
    cur.tokens.push_back({std::move(word), offset, offset + len});
    cur.tags.push_back(*tag);
    offset += len;
  }
  flush();
  return out;
}

std::vector<TaggedSentence> load_tagged(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".xml") == 0) {
    const auto doc = parse_semeval(read_file(path));
    return to_tagged(doc.sentences, nullptr);
  }
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  return read_conll(in);
}

}  // namespace aspex
