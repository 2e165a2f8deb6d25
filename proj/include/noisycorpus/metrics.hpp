// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

#include "noisycorpus/align.hpp"
#include "noisycorpus/corpus.hpp"
#include "noisycorpus/errors.hpp"

namespace noisycorpus {

// ---------------------------------------------------------------------------
// Token error rates
// ---------------------------------------------------------------------------

inline std::string fold_ascii_case(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

namespace detail {

inline bool token_differs(const std::string& surface, const std::string& source,
                          bool fold_case) {
  if (source.empty()) return true;  // inserted token, no clean counterpart
  if (!fold_case) return surface != source;
  return fold_ascii_case(surface) != fold_ascii_case(source);
}

struct TerCounts {
  std::size_t errors = 0;
  std::size_t total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(errors) / total; }
};

// entity_only restricts the count to tokens whose label is not O.
// Dropped clean tokens count as errors and enter the denominator.
inline TerCounts sentence_ter(const LabeledSentence& sent, bool entity_only, bool fold_case) {
  TerCounts tc;
  for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
    if (entity_only && sent.labels[i] == "O") continue;
    ++tc.total;
    if (token_differs(sent.tokens[i], sent.sources[i], fold_case)) ++tc.errors;
  }
  for (const auto& [token, label] : sent.dropped) {
    (void)token;
    if (entity_only && label == "O") continue;
    ++tc.total;
    ++tc.errors;
  }
  return tc;
}

}  // namespace detail

struct TerResult {
  double rate = 0.0;
  std::size_t errors = 0;
  std::size_t tokens = 0;
  bool empty_denominator = false;  // warning flag for the zero-entity case
};

// Fraction of tokens whose surface differs from its clean counterpart.
// Document-boundary sentences are structural markers and are skipped.
inline TerResult token_error_rate_detail(const Dataset& ds, bool entity_only = false,
                                         bool fold_case = false) {
  detail::TerCounts total;
  for (const auto& sent : ds.sentences) {
    if (sent.is_docstart()) continue;
    if (!sent.has_sources)
      throw ValidationError("token error rate requires source tokens");
    detail::TerCounts tc = detail::sentence_ter(sent, entity_only, fold_case);
    total.errors += tc.errors;
    total.total += tc.total;
  }
  TerResult res;
  res.errors = total.errors;
  res.tokens = total.total;
  res.empty_denominator = total.total == 0;
  res.rate = total.rate();
  return res;
}

inline double token_error_rate(const Dataset& ds, bool fold_case = false) {
  return token_error_rate_detail(ds, false, fold_case).rate;
}

inline double entity_token_error_rate(const Dataset& ds, bool fold_case = false) {
  return token_error_rate_detail(ds, true, fold_case).rate;
}

// ---------------------------------------------------------------------------
// Correction accuracy: among tokens erroneous in the noisy dataset, the
// fraction whose corrected surface equals the clean counterpart.
// ---------------------------------------------------------------------------

struct AccResult {
  double acc = 0.0;
  std::size_t restored = 0;
  std::size_t erroneous = 0;
  bool empty_denominator = false;
};

inline AccResult correction_accuracy_detail(const Dataset& noisy, const Dataset& corrected,
                                            bool entity_only = false, bool fold_case = false) {
  if (noisy.sentences.size() != corrected.sentences.size())
    throw ValidationError("correction accuracy: sentence count mismatch (" +
                          std::to_string(noisy.sentences.size()) + " vs " +
                          std::to_string(corrected.sentences.size()) + ")");
  AccResult res;
  for (std::size_t s = 0; s < noisy.sentences.size(); ++s) {
    const LabeledSentence& ns = noisy.sentences[s];
    const LabeledSentence& cs = corrected.sentences[s];
    if (ns.is_docstart()) continue;
    if (!ns.has_sources)
      throw ValidationError("correction accuracy requires source tokens on the noisy side");

    // Corrected image of each noisy token: positional when counts match,
    // otherwise via word alignment of the two texts.
    std::vector<std::string> image(ns.tokens.size());
    if (ns.tokens.size() == cs.tokens.size()) {
      image = cs.tokens;
    } else {
      std::u32string a = utf8_decode(ns.text());
      std::u32string b = utf8_decode(cs.text());
      for (const detail::AlignGroup& grp : detail::align_groups(a, b)) {
        if (grp.clean_words.empty()) continue;
        std::string joined = detail::join_words(grp.noisy_tokens);
        for (std::size_t w : grp.clean_words) {
          if (w >= image.size())
            throw ValidationError("correction accuracy: re-alignment shape mismatch");
          image[w] = joined;
        }
      }
    }

    for (std::size_t i = 0; i < ns.tokens.size(); ++i) {
      if (ns.sources[i].empty()) continue;  // inserted tokens have no restore target
      if (entity_only && ns.labels[i] == "O") continue;
      if (!detail::token_differs(ns.tokens[i], ns.sources[i], fold_case)) continue;
      ++res.erroneous;
      bool same = fold_case ? fold_ascii_case(image[i]) == fold_ascii_case(ns.sources[i])
                            : image[i] == ns.sources[i];
      if (same) ++res.restored;
    }
  }
  res.empty_denominator = res.erroneous == 0;
  res.acc = res.erroneous == 0 ? 0.0 : static_cast<double>(res.restored) / res.erroneous;
  return res;
}

inline double correction_accuracy(const Dataset& noisy, const Dataset& corrected,
                                  bool fold_case = false) {
  return correction_accuracy_detail(noisy, corrected, false, fold_case).acc;
}

// ---------------------------------------------------------------------------
// Error-rate histogram: per-sentence token error rates (percent) in ten bins
// [n-10, n) for n = 10..90 plus the closed final bin [90, 100].
// ---------------------------------------------------------------------------

struct ErrorHistogram {
  std::array<double, 10> bins{};  // percentages summing to 100 for non-empty input
  std::size_t sentences = 0;

  static std::size_t bin_index(double rate_percent) {
    if (rate_percent < 0) rate_percent = 0;
    auto idx = static_cast<std::size_t>(rate_percent / 10.0);
    return idx > 9 ? 9 : idx;
  }
};

inline ErrorHistogram histogram_from_rates(const std::vector<double>& rates) {
  if (rates.empty()) throw ValidationError("error-rate histogram of an empty corpus");
  ErrorHistogram h;
  h.sentences = rates.size();
  std::array<std::size_t, 10> counts{};
  for (double r : rates) ++counts[ErrorHistogram::bin_index(r * 100.0)];
  for (std::size_t b = 0; b < 10; ++b)
    h.bins[b] = 100.0 * static_cast<double>(counts[b]) / static_cast<double>(rates.size());
  return h;
}

inline ErrorHistogram error_rate_histogram(const Dataset& ds, bool fold_case = false) {
  std::vector<double> rates;
  for (const auto& sent : ds.sentences) {
    if (sent.is_docstart()) continue;
    if (!sent.has_sources)
      throw ValidationError("error-rate histogram requires source tokens");
    detail::TerCounts tc = detail::sentence_ter(sent, false, fold_case);
    if (tc.total == 0) continue;
    rates.push_back(tc.rate());
  }
  return histogram_from_rates(rates);
}

// Per-pair rate over a parallel corpus: each aligned word pair counts once,
// pairs with differing (or missing) sides are errors.
inline ErrorHistogram error_rate_histogram(const ParallelCorpus& corpus,
                                           bool fold_case = false) {
  std::vector<double> rates;
  for (const auto& pair : corpus.pairs) {
    WordAlignment wa = align_words(pair.clean, pair.noisy);
    if (wa.pairs.empty()) continue;
    std::size_t errors = 0;
    for (const auto& wp : wa.pairs) {
      bool same = fold_case ? fold_ascii_case(wp.clean) == fold_ascii_case(wp.noisy)
                            : wp.clean == wp.noisy;
      if (!same || wp.clean.empty() || wp.noisy.empty()) ++errors;
    }
    rates.push_back(static_cast<double>(errors) / static_cast<double>(wa.pairs.size()));
  }
  return histogram_from_rates(rates);
}

// ---------------------------------------------------------------------------
// Entity-level micro F1 and tagging accuracy
// ---------------------------------------------------------------------------

struct Span {
  std::string type;
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive

  bool operator==(const Span& other) const {
    return type == other.type && start == other.start && end == other.end;
  }
  bool operator<(const Span& other) const {
    return std::tie(start, end, type) < std::tie(other.start, other.end, other.type);
  }
};

// Linear scan; a stray I-X after O or a different type opens a span, matching
// the IOB1-tolerant reading used by the corpus normalizer.
inline std::vector<Span> extract_spans(const std::vector<std::string>& labels) {
  std::vector<Span> spans;
  bool open = false;
  Span cur;
  auto close = [&](std::size_t end) {
    if (open) {
      cur.end = end;
      spans.push_back(cur);
      open = false;
    }
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    LabelParts p = parse_label(labels[i]);
    std::size_t prev = i == 0 ? 0 : i - 1;
    switch (p.kind) {
      case LabelParts::Begin:
        close(prev);
        cur = {p.type, i, i};
        open = true;
        break;
      case LabelParts::Inside:
        if (open && cur.type == p.type) break;
        close(prev);
        cur = {p.type, i, i};
        open = true;
        break;
      default:
        close(prev);
        break;
    }
  }
  close(labels.empty() ? 0 : labels.size() - 1);
  return spans;
}

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold_spans = 0;
  std::size_t pred_spans = 0;
  std::size_t matched = 0;
};

inline F1Result ner_f1_detail(const Dataset& gold, const Dataset& pred) {
  if (gold.sentences.size() != pred.sentences.size())
    throw ValidationError("ner_f1: sentence count mismatch");
  F1Result r;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto& g = gold.sentences[s];
    const auto& p = pred.sentences[s];
    if (g.tokens.size() != p.tokens.size())
      throw ValidationError("ner_f1: token count mismatch in sentence " + std::to_string(s));
    std::vector<Span> gs = extract_spans(g.labels);
    std::vector<Span> ps = extract_spans(p.labels);
    r.gold_spans += gs.size();
    r.pred_spans += ps.size();
    std::sort(gs.begin(), gs.end());
    std::sort(ps.begin(), ps.end());
    std::size_t gi = 0, pi = 0;
    while (gi < gs.size() && pi < ps.size()) {
      if (gs[gi] == ps[pi]) {
        ++r.matched;
        ++gi, ++pi;
      } else if (gs[gi] < ps[pi]) {
        ++gi;
      } else {
        ++pi;
      }
    }
  }
  r.precision = r.pred_spans ? static_cast<double>(r.matched) / r.pred_spans : 0.0;
  r.recall = r.gold_spans ? static_cast<double>(r.matched) / r.gold_spans : 0.0;
  r.f1 = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall)
                                      : 0.0;
  return r;
}

inline double ner_f1(const Dataset& gold, const Dataset& pred) {
  return ner_f1_detail(gold, pred).f1;
}

inline double tagging_accuracy(const Dataset& gold, const Dataset& pred) {
  if (gold.sentences.size() != pred.sentences.size())
    throw ValidationError("tagging_accuracy: sentence count mismatch");
  std::size_t correct = 0, total = 0;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto& g = gold.sentences[s];
    const auto& p = pred.sentences[s];
    if (g.labels.size() != p.labels.size())
      throw ValidationError("tagging_accuracy: token count mismatch in sentence " +
                            std::to_string(s));
    for (std::size_t i = 0; i < g.labels.size(); ++i) {
      ++total;
      if (g.labels[i] == p.labels[i]) ++correct;
    }
  }
  return total ? static_cast<double>(correct) / total : 0.0;
}

// ---------------------------------------------------------------------------
// Run statistics: mean +- stddev and Welch's t-test
// ---------------------------------------------------------------------------

struct EvalSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev, n-1 denominator, 0 for n == 1
  std::size_t n_runs = 0;
};

inline EvalSummary mean_stddev(const std::vector<double>& xs) {
  if (xs.empty()) throw ValidationError("mean_stddev of an empty list");
  EvalSummary s;
  s.n_runs = xs.size();
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

namespace detail {

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14, kFpMin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                 b * std::log(1.0 - x);
  double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

// Two-sided tail probability of the Student-t distribution.
inline double student_t_two_sided(double t, double df) {
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

}  // namespace detail

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
  bool degenerate = false;  // both samples had zero variance
};

// Welch's unequal-variances t-test with Welch-Satterthwaite degrees of
// freedom. Degenerate samples (both variances zero) resolve to p = 1 for
// equal means and p = 0 otherwise, flagged.
inline WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw ValidationError("welch_t_test requires at least two observations per sample");
  EvalSummary sa = mean_stddev(a);
  EvalSummary sb = mean_stddev(b);
  double va = sa.stddev * sa.stddev / static_cast<double>(a.size());
  double vb = sb.stddev * sb.stddev / static_cast<double>(b.size());
  WelchResult r;
  if (va + vb == 0.0) {
    r.degenerate = true;
    r.t = 0.0;
    r.df = 0.0;
    r.p = sa.mean == sb.mean ? 1.0 : 0.0;
    return r;
  }
  r.t = (sa.mean - sb.mean) / std::sqrt(va + vb);
  double denom = va * va / static_cast<double>(a.size() - 1) +
                 vb * vb / static_cast<double>(b.size() - 1);
  r.df = (va + vb) * (va + vb) / denom;
  r.p = detail::student_t_two_sided(r.t, r.df);
  return r;
}

}  // namespace noisycorpus
