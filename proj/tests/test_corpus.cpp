// Apache License, Version 2.0, refer to LICENSE.txt

#include <catch2/catch.hpp>

#include "noisycorpus/corpus.hpp"

using namespace noisycorpus;

namespace {

const char* kNoisyConll =
    "No\tNo\tO\n"
    "nzw\tnew\tO\n"
    "fixtuvzs\tfixtures\tO\n"
    "reported\treported\tO\n"
    "from\tfrom\tO\n"
    "New\tNew\tB-LOC\n"
    "Vork\tYork\tI-LOC\n"
    ".\t.\tO\n";

const ColumnMap kNoisyMap{0, 1, 2};

}  // namespace

TEST_CASE("parse_conll reads the noisy three-column excerpt") {
  Dataset ds = parse_conll(kNoisyConll, kNoisyMap);
  REQUIRE(ds.sentences.size() == 1);
  const LabeledSentence& s = ds.sentences[0];
  REQUIRE(s.tokens.size() == 8);
  CHECK(s.tokens[1] == "nzw");
  CHECK(s.sources[1] == "new");
  CHECK(s.tokens[6] == "Vork");
  CHECK(s.sources[6] == "York");
  CHECK(s.labels[5] == "B-LOC");
  CHECK(s.labels[6] == "I-LOC");
  CHECK(ds.label_inventory == std::set<std::string>{"LOC"});
  CHECK(s.has_sources);
}

TEST_CASE("parse_conll on empty input") {
  Dataset ds = parse_conll("", kNoisyMap);
  CHECK(ds.sentences.empty());
  CHECK(write_conll(ds, kNoisyMap).empty());
}

TEST_CASE("two-column file leaves sources absent") {
  Dataset ds = parse_conll("New\tB-LOC\nYork\tI-LOC\n", ColumnMap{0, -1, 1});
  REQUIRE(ds.sentences.size() == 1);
  CHECK_FALSE(ds.sentences[0].has_sources);
  CHECK(ds.sentences[0].sources.empty());
  CHECK(ds.sentences[0].tokens == std::vector<std::string>{"New", "York"});
  CHECK(ds.sentences[0].labels == std::vector<std::string>{"B-LOC", "I-LOC"});
}

TEST_CASE("conll round trip is stable") {
  Dataset ds = parse_conll(kNoisyConll, kNoisyMap);
  std::string first = write_conll(ds, kNoisyMap);
  Dataset again = parse_conll(first, kNoisyMap);
  CHECK(again == ds);
  CHECK(write_conll(again, kNoisyMap) == first);  // byte-stable on second pass
}

TEST_CASE("two sentences, exactly one blank separator line") {
  Dataset ds;
  LabeledSentence a;
  a.tokens = {"Hello"};
  a.labels = {"O"};
  LabeledSentence b;
  b.tokens = {"again"};
  b.labels = {"O"};
  ds.sentences = {a, b};
  CHECK(write_conll(ds, ColumnMap{0, -1, 1}) == "Hello\tO\n\nagain\tO\n");
}

TEST_CASE("tolerant column splitting on read") {
  Dataset ds = parse_conll("New   B-LOC\nYork \t I-LOC\n", ColumnMap{0, -1, 1});
  REQUIRE(ds.sentences.size() == 1);
  CHECK(ds.sentences[0].tokens[0] == "New");
  CHECK(ds.sentences[0].labels[1] == "I-LOC");
}

TEST_CASE("column count and label errors carry positions") {
  CHECK_THROWS_WITH(parse_conll("ok\tO\nbad\n", ColumnMap{0, -1, 1}),
                    Catch::Contains("line 2"));
  CHECK_THROWS_AS(parse_conll("tok\tB-\n", ColumnMap{0, -1, 1}), ValidationError);
}

TEST_CASE("IOB1 openers normalize to BIO") {
  Dataset ds = parse_conll("alpha\tI-ORG\nbeta\tI-ORG\ngamma\tO\ndelta\tI-PER\n",
                           ColumnMap{0, -1, 1});
  const auto& labels = ds.sentences[0].labels;
  CHECK(labels == std::vector<std::string>{"B-ORG", "I-ORG", "O", "B-PER"});
  CHECK(normalize_bio(labels) == labels);  // idempotent
}

TEST_CASE("bio normalization rewrites type changes") {
  std::vector<std::string> in{"B-ORG", "I-PER", "I-PER"};
  CHECK(normalize_bio(in) == std::vector<std::string>{"B-ORG", "B-PER", "I-PER"});
}

TEST_CASE("bare tags pass through as their own types") {
  Dataset ds = parse_conll("the\tDET\ncat\tNOUN\n", ColumnMap{0, -1, 1});
  CHECK(ds.sentences[0].labels == std::vector<std::string>{"DET", "NOUN"});
  CHECK(ds.label_inventory == std::set<std::string>{"DET", "NOUN"});
}

TEST_CASE("placeholders in tokens are rejected, never repaired") {
  CHECK_THROWS_AS(parse_conll("to¬ken\tO\n", ColumnMap{0, -1, 1}), ValidationError);
  CHECK_THROWS_AS(parse_conll("tok¦en\tO\n", ColumnMap{0, -1, 1}), ValidationError);
}

TEST_CASE("empty source marker round-trips") {
  Dataset ds = parse_conll("inserted\t¬\tO\n", kNoisyMap);
  REQUIRE(ds.sentences.size() == 1);
  CHECK(ds.sentences[0].sources[0].empty());
  CHECK(write_conll(ds, kNoisyMap) == "inserted\t¬\tO\n");
}

TEST_CASE("docstart rows pass through untouched") {
  Dataset ds = parse_conll("-DOCSTART-\tO\n\nNew\tB-LOC\n", ColumnMap{0, -1, 1});
  REQUIRE(ds.sentences.size() == 2);
  CHECK(ds.sentences[0].is_docstart());
  CHECK_FALSE(ds.sentences[1].is_docstart());
}

TEST_CASE("parse_parallel basics") {
  ParallelCorpus p = parse_parallel("New York\tNew Vork\n");
  REQUIRE(p.pairs.size() == 1);
  CHECK(p.pairs[0].clean == "New York");
  CHECK(p.pairs[0].noisy == "New Vork");
  CHECK(parse_parallel("").pairs.empty());
  CHECK_THROWS_WITH(parse_parallel("a\tb\n1\t2\t3\n"), Catch::Contains("line 2"));
  CHECK_THROWS_WITH(parse_parallel("no tab here\n"), Catch::Contains("line 1"));
}

TEST_CASE("parallel round trip") {
  ParallelCorpus p = parse_parallel("a b\ta c\nx\tx\n");
  CHECK(parse_parallel(write_parallel(p)) == p);
}

TEST_CASE("parallel rejects placeholders") {
  CHECK_THROWS_AS(parse_parallel("a¬\tb\n"), ValidationError);
}

TEST_CASE("extract_target_side projects in order") {
  ParallelCorpus p;
  p.pairs = {{"a", "b"}, {"c", "d"}};
  CHECK(extract_target_side(p) == std::vector<std::string>{"b", "d"});
  CHECK(extract_target_side(ParallelCorpus{}).empty());

  ParallelCorpus big;
  for (int i = 0; i < 10000; ++i)
    big.pairs.push_back({"clean" + std::to_string(i), "noisy" + std::to_string(i)});
  auto side = extract_target_side(big);
  REQUIRE(side.size() == 10000);
  CHECK(side[0] == "noisy0");
  CHECK(side[1234] == "noisy1234");
  CHECK(side[9999] == "noisy9999");
}
