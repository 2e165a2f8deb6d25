// Apache License, Version 2.0, refer to LICENSE.txt

#include <catch2/catch.hpp>

#include "noisycorpus/rng.hpp"
#include "noisycorpus/unicode.hpp"

using namespace noisycorpus;

TEST_CASE("utf8 round trip") {
  std::string s = "No nzw fixtuvzs — naïve König 東京 .";
  CHECK(utf8_encode(utf8_decode(s)) == s);
  CHECK(utf8_decode("").empty());
}

TEST_CASE("utf8 rejects malformed input") {
  CHECK_THROWS_AS(utf8_decode("\x80"), ParseError);
  CHECK_THROWS_AS(utf8_decode("\xC3"), ParseError);          // truncated
  CHECK_THROWS_AS(utf8_decode("\xC0\xAF"), ParseError);      // overlong
  CHECK_THROWS_AS(utf8_decode("\xED\xA0\x80"), ParseError);  // surrogate
}

TEST_CASE("placeholders") {
  CHECK(contains_placeholder(std::string("a¬b")));
  CHECK(contains_placeholder(std::string("a¦b")));
  CHECK_FALSE(contains_placeholder(std::string("plain text")));
}

TEST_CASE("word splitting") {
  auto words = split_words_utf8("  No  new\tfixtures\n");
  REQUIRE(words.size() == 3);
  CHECK(words[0] == "No");
  CHECK(words[2] == "fixtures");
  CHECK(split_words_utf8("").empty());
  CHECK(split_words_utf8("   ").empty());
}

TEST_CASE("rng determinism and range") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(7);
  for (int i = 0; i < 1000; ++i) {
    double u = c.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(c.below(10) < 10);
  }
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
  CHECK(mix_seed(5, 0) != mix_seed(5, 1));
}
