// Apache License, Version 2.0, refer to LICENSE.txt

#include <catch2/catch.hpp>

#include <cmath>
#include <set>

#include "noisycorpus/noise.hpp"
#include "noisycorpus/rng.hpp"

using namespace noisycorpus;

namespace {

Alphabet letters27() {
  return Alphabet::from_utf8("abcdefghijklmnopqrstuvwxyz ");
}

std::string random_word(Rng& rng, const Alphabet& a, std::size_t min_len, std::size_t max_len) {
  std::u32string w;
  std::size_t len = min_len + rng.below(max_len - min_len + 1);
  for (std::size_t i = 0; i < len; ++i) w.push_back(a.chars[rng.below(a.size())]);
  return utf8_encode(w);
}

}  // namespace

TEST_CASE("alphabet construction") {
  Alphabet a = letters27();
  CHECK(a.size() == 27);
  CHECK(a.contains(U'q'));
  CHECK(a.contains(U' '));
  CHECK_FALSE(a.contains(U'Q'));
  CHECK_THROWS_AS(Alphabet::from_utf8("a"), ValidationError);
  CHECK_THROWS_AS(Alphabet::from_utf8("ab¬"), ValidationError);
}

TEST_CASE("vanilla model rejects eta outside [0,1]") {
  CHECK_THROWS_AS(vanilla_from_eta(-0.1, letters27()), ValidationError);
  CHECK_THROWS_AS(vanilla_from_eta(1.5, letters27()), ValidationError);
}

TEST_CASE("vanilla eta=0.3 over 27 characters deletes at 0.1") {
  VanillaModel m = vanilla_from_eta(0.3, letters27());
  CHECK(m.p_delete(U'a') == Approx(0.1));
  CHECK(m.deletion_mass(U'z') == Approx(0.1));
}

TEST_CASE("the three aggregate masses agree to 1e-12") {
  Rng rng(11);
  for (int iter = 0; iter < 20; ++iter) {
    double eta = rng.next_double();
    Alphabet a = iter % 2 ? letters27() : Alphabet::from_utf8("abcXYZ012 .,");
    VanillaModel m(eta, a);
    double ins = m.insertion_mass();
    for (char32_t c : a.chars) {
      CHECK(std::fabs(m.deletion_mass(c) - ins) < 1e-12);
      CHECK(std::fabs(m.substitution_mass(c) - ins) < 1e-12);
    }
  }
}

TEST_CASE("substitution mass is uniform and excludes the character itself") {
  VanillaModel m = vanilla_from_eta(0.3, letters27());
  CHECK(m.p_substitute(U'a', U'a') == 0.0);
  CHECK(m.p_substitute(U'a', U'b') == Approx(0.1 / 26.0));
  CHECK(m.p_keep(U'a') == Approx(1.0 - 0.2));
}

TEST_CASE("vanilla eta=1 keeps one third per character") {
  // The eta/3 split fixes P_keep = 1 - 2*eta/3, so 1/3 at eta = 1.
  VanillaModel m = vanilla_from_eta(1.0, Alphabet::from_utf8("ab"));
  CHECK(m.p_keep(U'a') == Approx(1.0 / 3.0));
}

TEST_CASE("vanilla eta=0 perturb is the identity") {
  VanillaModel m = vanilla_from_eta(0.0, letters27());
  CHECK(perturb(m, "hello noisy world", 7) == "hello noisy world");
}

TEST_CASE("vanilla Monte-Carlo edit fraction approximates eta") {
  Rng seeds(123);
  for (double eta : {0.1, 0.3, 0.9}) {
    VanillaModel m = vanilla_from_eta(eta, letters27());
    std::string input;
    Rng rng(55);
    for (int i = 0; i < 100000; ++i)
      input += static_cast<char>('a' + rng.below(26));
    PerturbStats stats;
    perturb(m, input, seeds.next_u64(), &stats);
    REQUIRE(stats.chars == 100000);
    double fraction = static_cast<double>(stats.edits()) / static_cast<double>(stats.chars);
    CHECK(fraction == Approx(eta).margin(0.01));
  }
}

TEST_CASE("estimate_confusion turns o->0 counts into certainty at k=0") {
  std::vector<AlignedWordPair> pairs;
  for (int i = 0; i < 5; ++i) pairs.push_back({"oso", "0s0"});
  ConfusionModel m = estimate_confusion(pairs, 0.0, Alphabet::from_utf8("os0"));
  const CharDistribution& row = m.row(U'o');
  CHECK(row.keep == 0.0);
  std::ptrdiff_t zero = m.alphabet.index_of(U'0');
  CHECK(row.subst[static_cast<std::size_t>(zero)] == Approx(1.0));
  CHECK(row.subst_mass() == Approx(1.0 - row.keep));
  CHECK(m.row(U's').keep == Approx(1.0));
}

TEST_CASE("identical pairs at k=0 keep everything") {
  std::vector<AlignedWordPair> pairs = {{"same", "same"}, {"words", "words"}};
  ConfusionModel m = estimate_confusion(pairs, 0.0);
  for (char32_t c : m.alphabet.chars) CHECK(m.row(c).keep == Approx(1.0));
  CHECK(m.ins_rate == 0.0);
}

TEST_CASE("estimation rejects an empty pair list") {
  CHECK_THROWS_AS(estimate_confusion({}, 0.0, letters27()), ValidationError);
}

TEST_CASE("smoothing leaves unseen substitutions possible and rows normalized") {
  std::vector<AlignedWordPair> pairs = {{"abab", "abab"}, {"baba", "caba"}};
  ConfusionModel m = estimate_confusion(pairs, 0.1, Alphabet::from_utf8("abc"));
  for (char32_t c : m.alphabet.chars) {
    const CharDistribution& row = m.row(c);
    CHECK(row.total() == Approx(1.0).margin(1e-9));
    for (double p : row.subst) CHECK(p >= 0.0);
  }
  // 'a' was never substituted by 'c', yet the smoothed mass is positive
  std::ptrdiff_t c_idx = m.alphabet.index_of(U'c');
  CHECK(m.row(U'a').subst[static_cast<std::size_t>(c_idx)] > 0.0);
}

TEST_CASE("characters outside the alphabet land in the OOV bucket") {
  std::vector<AlignedWordPair> pairs = {{"茶xx", "茶xx"}, {"xx", "xx"}};
  ConfusionModel m = estimate_confusion(pairs, 0.0, Alphabet::from_utf8("xyz"));
  CHECK(m.oov_row.keep == Approx(1.0));
}

TEST_CASE("estimation round-trips a known model") {
  // Sample word pairs from a constructed model, re-estimate with k=0 and
  // compare rows in L1. The acceptance suite runs the full-size version.
  Alphabet a = Alphabet::from_utf8("abcdef");
  Rng rng(77);
  ConfusionModel truth;
  truth.alphabet = a;
  truth.smoothing_k = 0.0;
  truth.ins_rate = 0.02;
  truth.ins_dist.assign(a.size(), 1.0 / static_cast<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CharDistribution row;
    row.subst.assign(a.size(), 0.0);
    double keep = 0.85 + 0.1 * rng.next_double();
    double del = 0.4 * (1.0 - keep);
    double subst = 1.0 - keep - del;
    row.keep = keep;
    row.del = del;
    std::size_t target = (i + 1 + rng.below(a.size() - 1)) % a.size();
    row.subst[target] = subst;
    truth.rows.push_back(row);
  }
  truth.oov_row.keep = 1.0;
  truth.oov_row.subst.assign(a.size(), 0.0);

  std::vector<AlignedWordPair> pairs;
  for (int i = 0; i < 20000; ++i) {
    std::string clean = random_word(rng, a, 3, 8);
    pairs.push_back({clean, perturb(truth, clean, rng.next_u64())});
  }
  ConfusionModel fit = estimate_confusion(pairs, 0.0, a);
  for (std::size_t i = 0; i < a.size(); ++i) {
    double l1 = std::fabs(fit.rows[i].keep - truth.rows[i].keep) +
                std::fabs(fit.rows[i].del - truth.rows[i].del);
    for (std::size_t t = 0; t < a.size(); ++t)
      l1 += std::fabs(fit.rows[i].subst[t] - truth.rows[i].subst[t]);
    CHECK(l1 <= 0.05);
  }
  CHECK(fit.ins_rate == Approx(truth.ins_rate).margin(0.01));
}

TEST_CASE("channel trained on identical pairs concentrates on keep") {
  ParallelCorpus corpus;
  for (int i = 0; i < 20; ++i) corpus.pairs.push_back({"all quiet here", "all quiet here"});
  ChannelModel m = train_channel(corpus, 2, 0.1);
  const ChannelRow& row = m.row(U"a", U'l');
  CHECK(row.keep > 0.99);
  CHECK(m.intensity_bins[0] == Approx(1.0));
  for (int b = 1; b < 10; ++b) CHECK(m.intensity_bins[b] == 0.0);
}

TEST_CASE("channel learns context-conditioned deletion") {
  // 'n' disappears after 'r' (barn -> bar) but survives elsewhere.
  ParallelCorpus corpus;
  for (int i = 0; i < 30; ++i) {
    corpus.pairs.push_back({"barn", "bar"});
    corpus.pairs.push_back({"corn", "cor"});
    corpus.pairs.push_back({"earn", "ear"});
    corpus.pairs.push_back({"bean", "bean"});
    corpus.pairs.push_back({"on on", "on on"});
    corpus.pairs.push_back({"mini", "mini"});
  }
  ChannelModel m = train_channel(corpus, 1, 0.0);
  double del_after_r = m.row(U"r", U'n').del;
  double del_after_a = m.row(U"a", U'n').del;
  double del_after_o = m.row(U"o", U'n').del;
  CHECK(del_after_r > 0.9);
  CHECK(del_after_a < 0.1);
  CHECK(del_after_o < 0.1);
}

TEST_CASE("channel intensity mixture captures a bimodal corpus") {
  ParallelCorpus corpus;
  for (int i = 0; i < 50; ++i) {
    corpus.pairs.push_back({"alpha beta gamma delta", "alpha beta gamma delta"});
    corpus.pairs.push_back({"alpha beta gamma delta", "xlphx bxta gxmma dxlta"});
  }
  ChannelModel m = train_channel(corpus, 1, 0.0);
  CHECK(m.intensity_bins[0] >= 0.45);   // clean pairs: rate 0
  CHECK(m.intensity_bins[9] >= 0.45);   // fully corrupted: rate 1.0
}

TEST_CASE("channel rows and intensity bins are normalized") {
  ParallelCorpus corpus;
  for (int i = 0; i < 25; ++i) {
    corpus.pairs.push_back({"barn and corn", "bar and corn"});
    corpus.pairs.push_back({"more barn text", "m0re bam text"});
  }
  ChannelModel m = train_channel(corpus, 2, 0.1);
  for (const auto& level : m.levels)
    for (const auto& [key, row] : level) {
      (void)key;
      CHECK(row.total() == Approx(1.0).margin(1e-9));
      CHECK(row.keep >= 0.0);
      CHECK(row.del >= 0.0);
    }
  double mass = 0.0;
  for (double b : m.intensity_bins) mass += b;
  CHECK(mass == Approx(1.0).margin(1e-9));
}

TEST_CASE("train_channel validates its inputs") {
  CHECK_THROWS_AS(train_channel(ParallelCorpus{}, 1, 0.0), ValidationError);
  ParallelCorpus one;
  one.pairs.push_back({"a b", "a b"});
  CHECK_THROWS_AS(train_channel(one, 5, 0.0), ValidationError);
  CHECK_THROWS_AS(train_channel(one, -1, 0.0), ValidationError);
}

TEST_CASE("zero-noise channel perturb is the identity") {
  ParallelCorpus corpus;
  for (int i = 0; i < 5; ++i) corpus.pairs.push_back({"stay the same", "stay the same"});
  ChannelModel m = train_channel(corpus, 3, 0.0);
  CHECK(perturb(m, "stay the same", 99) == "stay the same");
  CHECK(perturb(m, "other words too", 99) == "other words too");
}

TEST_CASE("channel perturb is deterministic per seed") {
  ParallelCorpus corpus;
  for (int i = 0; i < 40; ++i) {
    corpus.pairs.push_back({"the quick brown fox", "the qvick brwn fox"});
    corpus.pairs.push_back({"jumps over lazy dogs", "jumps ovr lazy d0gs"});
  }
  ChannelModel m = train_channel(corpus, 2, 0.1);
  std::string first = perturb(m, "the quick brown fox jumps", 1234);
  for (int i = 0; i < 100; ++i) CHECK(perturb(m, "the quick brown fox jumps", 1234) == first);
  std::set<std::string> distinct;
  for (std::uint64_t s = 0; s < 50; ++s)
    distinct.insert(perturb(m, "the quick brown fox jumps", s));
  CHECK(distinct.size() > 5);
}

TEST_CASE("perturb rejects placeholder input") {
  VanillaModel m = vanilla_from_eta(0.1, letters27());
  CHECK_THROWS_AS(perturb(m, "bad¬text", 1), ValidationError);
}

TEST_CASE("perturb_token frequency matches the closed-form product") {
  Alphabet a = Alphabet::from_utf8("VYkor");
  ConfusionModel m;
  m.alphabet = a;
  m.smoothing_k = 0.0;
  m.ins_rate = 0.05;
  m.ins_dist.assign(a.size(), 1.0 / static_cast<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CharDistribution row;
    row.subst.assign(a.size(), 0.0);
    row.keep = 1.0;
    m.rows.push_back(row);
  }
  m.oov_row.keep = 1.0;
  m.oov_row.subst.assign(a.size(), 0.0);
  double p_yv = 0.3;
  std::size_t y = static_cast<std::size_t>(a.index_of(U'Y'));
  std::size_t v = static_cast<std::size_t>(a.index_of(U'V'));
  m.rows[y].keep = 1.0 - p_yv;
  m.rows[y].subst[v] = p_yv;

  // P("Vork") = P(no insertion at all 5 gaps) * P(Y->V) * keep^3
  double expected = std::pow(1.0 - m.ins_rate, 5) * p_yv;
  int hits = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i)
    if (perturb_token(m, "York", 100000u + static_cast<std::uint64_t>(i)) == "Vork") ++hits;
  double freq = static_cast<double>(hits) / trials;
  CHECK(freq == Approx(expected).margin(0.02));
}

TEST_CASE("perturb_token zero-noise and empty-word cases") {
  VanillaModel zero = vanilla_from_eta(0.0, letters27());
  CHECK(perturb_token(zero, "York", 5) == "York");
  CHECK(perturb_token(zero, "", 5).empty());
}

TEST_CASE("encode applies the placeholder-and-spacing schema") {
  CHECK(encode_for_seq2seq("No nzw") == "N o ¬ n z w");
  CHECK(encode_for_seq2seq("").empty());
  CHECK_THROWS_AS(encode_for_seq2seq("x¬y"), ValidationError);
}

TEST_CASE("decode inverts encode on random space-separated strings") {
  Rng rng(404);
  Alphabet a = Alphabet::from_utf8("abcXYZ09 é東");
  for (int iter = 0; iter < 500; ++iter) {
    std::u32string s;
    std::size_t len = rng.below(30);
    for (std::size_t i = 0; i < len; ++i) s.push_back(a.chars[rng.below(a.size())]);
    std::string text = utf8_encode(s);
    CHECK(decode_from_seq2seq(encode_for_seq2seq(text)) == text);
  }
  CHECK(decode_from_seq2seq("").empty());
}

TEST_CASE("decode rejects malformed streams") {
  CHECK_THROWS_AS(decode_from_seq2seq("ab cd"), ParseError);   // two-char token
  CHECK_THROWS_AS(decode_from_seq2seq("a  b"), ParseError);    // double space
}

TEST_CASE("noise model variant dispatch") {
  NoiseModel m = vanilla_from_eta(0.0, letters27());
  CHECK(perturb(m, "unchanged", 3) == "unchanged");
}
