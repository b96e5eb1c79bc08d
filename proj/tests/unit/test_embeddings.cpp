#include <doctest.h>

#include <sstream>

#include "aspex/common.hpp"
#include "aspex/embeddings.hpp"

using namespace aspex;

namespace {

LoadOptions opts3(std::string name = "toy") {
  LoadOptions o;
  o.name = std::move(name);
  o.expected_dim = 3;
  o.seed = 42;
  return o;
}

TaggedSentence sentence(std::vector<std::string> words) {
  TaggedSentence s;
  std::size_t off = 0;
  for (auto& w : words) {
    s.tokens.push_back({w, off, off + w.size()});
    off += w.size() + 1;
    s.tags.push_back(IobTag::O);
  }
  return s;
}

}  // namespace

TEST_CASE("text vectors: header, malformed and duplicate lines") {
  std::istringstream in(
      "4 3\n"
      "the 0.1 0.2 0.3\n"
      "Battery 1 2 3\n"
      "broken 1 2\n"
      "nan_row 1 x 3\n"
      "the 9 9 9\n"
      "\n"
      "life -1e-3 0 2.5\n");
  const auto [table, rep] = load_text_vectors(in, opts3());
  CHECK(rep.header_skipped);
  CHECK(rep.loaded == 3);
  CHECK(rep.malformed == 2);
  CHECK(rep.duplicates == 1);
  CHECK(table.size() == 3);
  CHECK(table.name() == "toy");
  CHECK(table.lookup("the")[0] == 0.1);  // first occurrence wins
  CHECK(table.lookup("life")[0] == -1e-3);
}

TEST_CASE("a header-shaped line after the first is data, not a header") {
  std::istringstream in("a 1 2 3\n7 3\n");
  const auto [table, rep] = load_text_vectors(in, opts3());
  CHECK_FALSE(rep.header_skipped);
  CHECK(rep.malformed == 1);
}

TEST_CASE("loading fails when nothing usable remains") {
  std::istringstream in("a 1 2\nb\n");
  CHECK_THROWS_AS(load_text_vectors(in, opts3()), ValidationError);
  CHECK_THROWS_AS(load_text_vectors(std::string("/nonexistent/vectors.txt"), opts3()),
                  ValidationError);
}

TEST_CASE("filter keeps only requested words") {
  std::istringstream in("a 1 2 3\nb 1 2 3\nc 1 2 3\n");
  const std::unordered_set<std::string> keep = {"a", "c"};
  auto o = opts3();
  o.filter = &keep;
  const auto [table, rep] = load_text_vectors(in, o);
  CHECK(table.size() == 2);
  CHECK(rep.filtered == 1);

  const auto f = lookup_filter({sentence({"The", "screen"})});
  CHECK(f == std::unordered_set<std::string>{"The", "the", "screen"});
}

TEST_CASE("folded filter keeps every case variant") {
  std::istringstream in("Screen 1 2 3\nSCREEN 1 2 3\nthe 1 2 3\nother 1 2 3\n");
  const auto keep = lookup_filter({sentence({"screen"})});
  auto o = opts3();
  o.filter = &keep;
  o.fold_filter = true;
  const auto [table, rep] = load_text_vectors(in, o);
  CHECK(table.size() == 2);
  CHECK(rep.filtered == 2);
  CHECK(coverage(build_vocab({sentence({"screen"})}, CaseMode::Insensitive), table,
                 CaseMode::Insensitive)
            .covered == 1);
}

TEST_CASE("lookup falls back exact -> lowercase -> unknown") {
  EmbeddingTable t("toy", 2, 1);
  const std::vector<double> a = {1, 2};
  const std::vector<double> b = {3, 4};
  CHECK(t.add("apple", a));
  CHECK(t.add("Mac", b));
  CHECK_FALSE(t.add("apple", b));

  CHECK(t.resolve("apple").source == EmbeddingTable::Source::Exact);
  CHECK(t.resolve("APPLE").source == EmbeddingTable::Source::Lowercase);
  CHECK(t.resolve("mac").source == EmbeddingTable::Source::Unknown);
  CHECK(t.lookup("Apple")[1] == 2.0);
  const auto unk = t.lookup("pear");
  CHECK(unk.data() == t.unk_row().data());
  for (double x : unk) {
    CHECK(x >= -0.25);
    CHECK(x <= 0.25);
  }
  CHECK_THROWS_AS(t.add("bad", std::vector<double>{1, 2, 3}), ValidationError);
}

TEST_CASE("unknown row depends only on the seed") {
  EmbeddingTable a("x", 8, 5);
  EmbeddingTable b("y", 8, 5);
  EmbeddingTable c("x", 8, 6);
  CHECK(std::equal(a.unk_row().begin(), a.unk_row().end(), b.unk_row().begin()));
  CHECK_FALSE(std::equal(a.unk_row().begin(), a.unk_row().end(), c.unk_row().begin()));
}

TEST_CASE("coverage in both case modes") {
  EmbeddingTable t("toy", 1, 0);
  const std::vector<double> v = {0.0};
  t.add("the", v);
  t.add("Screen", v);
  t.add("battery", v);
  const std::vector<TaggedSentence> data = {sentence({"The", "screen", "battery", "life"})};

  const auto ins = coverage(build_vocab(data, CaseMode::Insensitive), t, CaseMode::Insensitive,
                            "toyset");
  CHECK(ins.total == 4);
  CHECK(ins.covered == 3);
  CHECK(ins.ratio == doctest::Approx(0.75));
  CHECK(ins.dataset == "toyset");

  const auto sen = coverage(build_vocab(data, CaseMode::Sensitive), t, CaseMode::Sensitive);
  CHECK(sen.total == 4);
  CHECK(sen.covered == 1);  // only "battery"

  CHECK_THROWS_AS(coverage({}, t, CaseMode::Sensitive), ValidationError);
}

TEST_CASE("character vocabulary") {
  const auto v = CharVocab::build({sentence({"cab", "b\xc3\xa9"})});
  CHECK(v.size() == 5);  // unk + a b c é
  CHECK(v.id(U'a') == 1);
  CHECK(v.id(U'c') == 3);
  CHECK(v.id(U'\u00e9') == 4);
  CHECK(v.id(U'z') == 0);
  CHECK(v.encode("abz") == std::vector<std::size_t>{1, 2, 0});
  CHECK(v.encode("\xc3\xa9") == std::vector<std::size_t>{4});
}
