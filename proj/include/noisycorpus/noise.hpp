// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "noisycorpus/align.hpp"
#include "noisycorpus/corpus.hpp"
#include "noisycorpus/errors.hpp"
#include "noisycorpus/rng.hpp"
#include "noisycorpus/unicode.hpp"

namespace noisycorpus {

// ---------------------------------------------------------------------------
// Alphabet
// ---------------------------------------------------------------------------

// Ordered character inventory Sigma. The epsilon symbol that models
// insertions and deletions is implicit (it is not a character), and the
// reserved placeholders can never be members.
struct Alphabet {
  std::vector<char32_t> chars;  // sorted, unique
  std::unordered_map<char32_t, std::size_t> pos;

  std::size_t size() const { return chars.size(); }

  bool contains(char32_t c) const { return pos.count(c) != 0; }

  std::ptrdiff_t index_of(char32_t c) const {
    auto it = pos.find(c);
    return it == pos.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  }

  static Alphabet from_chars(std::u32string_view cs) {
    std::u32string sorted(cs);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    Alphabet a;
    for (char32_t c : sorted) {
      if (is_placeholder(c))
        throw ValidationError("alphabet must not contain the reserved placeholders");
      if (c < 0x20) continue;  // control characters carry line structure, not text
      a.pos.emplace(c, a.chars.size());
      a.chars.push_back(c);
    }
    if (a.chars.size() < 2) throw ValidationError("alphabet needs at least 2 characters");
    return a;
  }

  static Alphabet from_utf8(std::string_view utf8) { return from_chars(utf8_decode(utf8)); }

  // Every character observed in the given texts.
  static Alphabet from_texts(const std::vector<std::string>& texts) {
    std::u32string all;
    for (const auto& t : texts) all += utf8_decode(t);
    return from_chars(all);
  }

  bool operator==(const Alphabet& other) const { return chars == other.chars; }
};

// ---------------------------------------------------------------------------
// Vanilla error model: all three edit-operation masses equal eta/3.
// ---------------------------------------------------------------------------

struct PerturbStats {
  std::size_t chars = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t substitutions = 0;

  std::size_t edits() const { return insertions + deletions + substitutions; }
};

class VanillaModel {
public:
  VanillaModel() = default;
  VanillaModel(double eta, Alphabet alphabet) : eta_(eta), alphabet_(std::move(alphabet)) {
    if (!(eta >= 0.0 && eta <= 1.0))
      throw ValidationError("vanilla model eta must lie in [0, 1]");
  }

  double eta() const { return eta_; }
  const Alphabet& alphabet() const { return alphabet_; }

  // Per-target probabilities, exposed so the model equation is checkable by
  // reading the distributions back rather than trusting the constructor.
  double p_delete(char32_t) const { return eta_ / 3.0; }
  double p_substitute(char32_t c, char32_t target) const {
    if (!alphabet_.contains(target) || target == c) return 0.0;
    return (eta_ / 3.0) / static_cast<double>(alphabet_.size() - 1);
  }
  double p_insert(char32_t target) const {
    if (!alphabet_.contains(target)) return 0.0;
    return (eta_ / 3.0) / static_cast<double>(alphabet_.size());
  }
  double p_keep(char32_t c) const { return 1.0 - p_delete(c) - substitution_mass(c); }

  // The three aggregate masses of the model equation, each summed from the
  // per-target values.
  double insertion_mass() const {
    double sum = 0.0;
    for (char32_t t : alphabet_.chars) sum += p_insert(t);
    return sum;
  }
  double deletion_mass(char32_t c) const { return p_delete(c); }
  double substitution_mass(char32_t c) const {
    double sum = 0.0;
    for (char32_t t : alphabet_.chars) sum += p_substitute(c, t);
    return sum;
  }

private:
  double eta_ = 0.0;
  Alphabet alphabet_;
};

inline VanillaModel vanilla_from_eta(double eta, Alphabet alphabet) {
  return VanillaModel(eta, std::move(alphabet));
}

// ---------------------------------------------------------------------------
// Confusion-matrix model estimated from aligned word or sentence pairs.
// ---------------------------------------------------------------------------

// Per-character distribution over {keep, delete, substitute(target)}.
struct CharDistribution {
  double keep = 1.0;
  double del = 0.0;
  std::vector<double> subst;  // per alphabet index; the self slot stays 0

  double subst_mass() const {
    double s = 0.0;
    for (double p : subst) s += p;
    return s;
  }
  double total() const { return keep + del + subst_mass(); }

  bool operator==(const CharDistribution& other) const {
    return keep == other.keep && del == other.del && subst == other.subst;
  }
};

struct ConfusionModel {
  Alphabet alphabet;
  double smoothing_k = 0.0;
  std::vector<CharDistribution> rows;  // one per alphabet character
  CharDistribution oov_row;            // characters outside the alphabet
  double ins_rate = 0.0;               // P(at least one insertion at a gap)
  std::vector<double> ins_dist;        // inserted-character distribution over Sigma

  const CharDistribution& row(char32_t c) const {
    std::ptrdiff_t i = alphabet.index_of(c);
    return i < 0 ? oov_row : rows[static_cast<std::size_t>(i)];
  }

  bool operator==(const ConfusionModel& other) const {
    return alphabet == other.alphabet && smoothing_k == other.smoothing_k &&
           rows == other.rows && oov_row == other.oov_row && ins_rate == other.ins_rate &&
           ins_dist == other.ins_dist;
  }
};

namespace detail {

// One observed edit event per clean character position, plus at most one
// insert-before event per gap (the first character of an insertion run).
struct PositionEvent {
  enum Fate { Keep, Delete, Substitute } fate = Keep;
  char32_t target = 0;      // substitution target
  bool has_insert = false;  // insertion run directly before this position
  char32_t insert_char = 0;
};

struct ScriptEvents {
  std::vector<PositionEvent> positions;  // one per clean character
  bool end_insert = false;               // insertion run after the last character
  char32_t end_insert_char = 0;
};

inline ScriptEvents script_events(const std::u32string& clean, const std::u32string& noisy) {
  ScriptEvents ev;
  ev.positions.resize(clean.size());
  EditScript script = edit_script(clean, noisy);
  std::size_t i = 0;
  bool pending = false;
  char32_t pending_char = 0;
  for (const EditOp& op : script.ops) {
    switch (op.kind) {
      case EditKind::Insert:
        if (!pending) {
          pending = true;
          pending_char = op.dst;
        }
        break;
      case EditKind::Match:
      case EditKind::Substitute:
      case EditKind::Delete: {
        PositionEvent& pe = ev.positions[i];
        if (pending) {
          pe.has_insert = true;
          pe.insert_char = pending_char;
          pending = false;
        }
        if (op.kind == EditKind::Match) {
          pe.fate = PositionEvent::Keep;
        } else if (op.kind == EditKind::Delete) {
          pe.fate = PositionEvent::Delete;
        } else {
          pe.fate = PositionEvent::Substitute;
          pe.target = op.dst;
        }
        ++i;
        break;
      }
    }
  }
  if (pending) {
    ev.end_insert = true;
    ev.end_insert_char = pending_char;
  }
  return ev;
}

}  // namespace detail

// Estimates the confusion model by aligning each pair with the Levenshtein
// script and counting keep/delete/substitute events per clean character and
// insertion events per gap. add-k smoothing spreads mass to unseen outcomes.
// Substitution targets outside the alphabet spread uniformly over Sigma\{c}.
inline ConfusionModel estimate_confusion(const std::vector<AlignedWordPair>& pairs,
                                         double smoothing_k, Alphabet alphabet) {
  if (pairs.empty()) throw ValidationError("estimate_confusion: empty pair list");
  if (smoothing_k < 0) throw ValidationError("estimate_confusion: smoothing_k must be >= 0");

  const std::size_t n = alphabet.size();
  const std::size_t oov = n;  // extra row index for out-of-alphabet characters
  struct Counts {
    double keep = 0, del = 0, subst_oov = 0;
    std::vector<double> subst;
  };
  std::vector<Counts> counts(n + 1);
  for (auto& c : counts) c.subst.assign(n, 0.0);
  std::vector<double> ins_char(n, 0.0);
  double ins_char_oov = 0.0;
  double gaps_with_ins = 0.0, gaps_total = 0.0;

  auto row_of = [&](char32_t c) -> Counts& {
    std::ptrdiff_t i = alphabet.index_of(c);
    return counts[i < 0 ? oov : static_cast<std::size_t>(i)];
  };

  for (const auto& pair : pairs) {
    std::u32string clean = utf8_decode(pair.clean);
    std::u32string noisy = utf8_decode(pair.noisy);
    detail::ScriptEvents ev = detail::script_events(clean, noisy);
    gaps_total += static_cast<double>(clean.size()) + 1.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const auto& pe = ev.positions[i];
      Counts& row = row_of(clean[i]);
      if (pe.has_insert) {
        gaps_with_ins += 1.0;
        std::ptrdiff_t t = alphabet.index_of(pe.insert_char);
        if (t < 0)
          ins_char_oov += 1.0;
        else
          ins_char[static_cast<std::size_t>(t)] += 1.0;
      }
      switch (pe.fate) {
        case detail::PositionEvent::Keep:
          row.keep += 1.0;
          break;
        case detail::PositionEvent::Delete:
          row.del += 1.0;
          break;
        case detail::PositionEvent::Substitute: {
          std::ptrdiff_t t = alphabet.index_of(pe.target);
          if (t < 0)
            row.subst_oov += 1.0;
          else
            row.subst[static_cast<std::size_t>(t)] += 1.0;
          break;
        }
      }
    }
    if (ev.end_insert) {
      gaps_with_ins += 1.0;
      std::ptrdiff_t t = alphabet.index_of(ev.end_insert_char);
      if (t < 0)
        ins_char_oov += 1.0;
      else
        ins_char[static_cast<std::size_t>(t)] += 1.0;
    }
  }

  ConfusionModel model;
  model.alphabet = std::move(alphabet);
  model.smoothing_k = smoothing_k;
  model.rows.resize(n);

  // add-k smoothing with k as the row's total pseudo-mass (spread uniformly
  // over the row's outcomes), so sparse rows stay dominated by their counts.
  auto build_row = [&](const Counts& c, bool self_excluded, std::size_t self) {
    CharDistribution d;
    d.subst.assign(n, 0.0);
    std::size_t targets = self_excluded ? n - 1 : n;
    double dims = 2.0 + static_cast<double>(targets);
    double cell_k = smoothing_k / dims;
    double total = c.keep + c.del + c.subst_oov;
    for (double v : c.subst) total += v;
    double denom = total + smoothing_k;
    if (denom == 0.0) {  // k == 0 and unseen character: keep with certainty
      d.keep = 1.0;
      return d;
    }
    double oov_share = targets ? c.subst_oov / static_cast<double>(targets) : 0.0;
    d.keep = (c.keep + cell_k) / denom;
    d.del = (c.del + cell_k) / denom;
    for (std::size_t t = 0; t < n; ++t) {
      if (self_excluded && t == self) continue;
      d.subst[t] = (c.subst[t] + oov_share + cell_k) / denom;
    }
    return d;
  };

  for (std::size_t i = 0; i < n; ++i) model.rows[i] = build_row(counts[i], true, i);
  model.oov_row = build_row(counts[oov], false, 0);

  model.ins_dist.assign(n, 0.0);
  double ins_total = ins_char_oov;
  for (double v : ins_char) ins_total += v;
  double ins_denom = ins_total + smoothing_k;
  if (ins_denom > 0) {
    double oov_share = ins_char_oov / static_cast<double>(n);
    double cell_k = smoothing_k / static_cast<double>(n);
    for (std::size_t t = 0; t < n; ++t)
      model.ins_dist[t] = (ins_char[t] + oov_share + cell_k) / ins_denom;
  } else {
    for (std::size_t t = 0; t < n; ++t) model.ins_dist[t] = 1.0 / static_cast<double>(n);
  }
  model.ins_rate = gaps_total > 0 ? gaps_with_ins / gaps_total : 0.0;
  return model;
}

inline ConfusionModel estimate_confusion(const std::vector<AlignedWordPair>& pairs,
                                         double smoothing_k) {
  std::vector<std::string> texts;
  texts.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    texts.push_back(p.clean);
    texts.push_back(p.noisy);
  }
  return estimate_confusion(pairs, smoothing_k, Alphabet::from_texts(texts));
}

// ---------------------------------------------------------------------------
// Context-conditioned channel model: the in-repo surrogate for the trained
// sequence generator. Event tables are keyed by (clean context, character)
// with stupid-backoff from order n to 0, plus a per-sentence intensity
// mixture fitted from the training pairs' token error rates.
// ---------------------------------------------------------------------------

// Reserved end-of-string row key (control characters never enter alphabets).
inline constexpr char32_t kEndOfSentence = U'';

// Distribution over {keep, delete, substitute(x), insert_before(x)}.
struct ChannelRow {
  double keep = 1.0;
  double del = 0.0;
  std::vector<double> subst;  // per alphabet index
  std::vector<double> ins;    // per alphabet index

  double ins_mass() const {
    double s = 0.0;
    for (double p : ins) s += p;
    return s;
  }
  double subst_mass() const {
    double s = 0.0;
    for (double p : subst) s += p;
    return s;
  }
  double nonkeep() const { return del + subst_mass() + ins_mass(); }
  double total() const { return keep + nonkeep(); }

  bool operator==(const ChannelRow& other) const {
    return keep == other.keep && del == other.del && subst == other.subst && ins == other.ins;
  }
};

struct ChannelModel {
  Alphabet alphabet;
  int order = 0;
  double smoothing_k = 0.0;
  // levels[l]: rows keyed by the l context characters followed by the
  // current character (or the end-of-string sentinel).
  std::vector<std::map<std::u32string, ChannelRow>> levels;
  ChannelRow oov_row;
  std::array<double, 10> intensity_bins{};  // fractions, sum 1

  // Longest-context row lookup (stupid backoff: a row exists iff it was
  // observed, so longest-existing == highest-count context).
  const ChannelRow& row(std::u32string_view context, char32_t c) const {
    std::size_t max_len = std::min(context.size(), static_cast<std::size_t>(order));
    for (std::size_t len = max_len + 1; len-- > 0;) {
      std::u32string key(context.substr(context.size() - len));
      key.push_back(c);
      auto it = levels[len].find(key);
      if (it != levels[len].end()) return it->second;
    }
    return oov_row;
  }

  bool operator==(const ChannelModel& other) const {
    return alphabet == other.alphabet && order == other.order &&
           smoothing_k == other.smoothing_k && levels == other.levels &&
           oov_row == other.oov_row && intensity_bins == other.intensity_bins;
  }
};

// Token error rate of one clean/noisy sentence pair via word alignment.
inline double pair_token_error_rate(const std::string& clean, const std::string& noisy) {
  WordAlignment wa = align_words(clean, noisy);
  if (wa.pairs.empty()) return 0.0;
  std::size_t errors = 0;
  for (const auto& wp : wa.pairs)
    if (wp.clean != wp.noisy || wp.clean.empty() || wp.noisy.empty()) ++errors;
  return static_cast<double>(errors) / static_cast<double>(wa.pairs.size());
}

inline ChannelModel train_channel(const ParallelCorpus& corpus, int order,
                                  double smoothing_k) {
  if (corpus.pairs.empty()) throw ValidationError("train_channel: empty corpus");
  if (order < 0 || order > 4) throw ValidationError("train_channel: order must be in [0, 4]");
  if (smoothing_k < 0) throw ValidationError("train_channel: smoothing_k must be >= 0");

  std::vector<std::string> texts;
  for (const auto& p : corpus.pairs) {
    texts.push_back(p.clean);
    texts.push_back(p.noisy);
  }
  Alphabet alphabet = Alphabet::from_texts(texts);
  const std::size_t n = alphabet.size();

  struct Counts {
    double keep = 0, del = 0, subst_oov = 0, ins_oov = 0;
    std::vector<double> subst, ins;
  };
  std::vector<std::map<std::u32string, Counts>> level_counts(
      static_cast<std::size_t>(order) + 1);
  auto touch = [&](std::size_t level, const std::u32string& key) -> Counts& {
    Counts& c = level_counts[level][key];
    if (c.subst.empty()) {
      c.subst.assign(n, 0.0);
      c.ins.assign(n, 0.0);
    }
    return c;
  };

  std::array<std::size_t, 10> bin_counts{};

  for (const auto& pair : corpus.pairs) {
    std::u32string clean = utf8_decode(pair.clean);
    std::u32string noisy = utf8_decode(pair.noisy);
    detail::ScriptEvents ev = detail::script_events(clean, noisy);
    for (std::size_t i = 0; i <= clean.size(); ++i) {
      char32_t cur = i < clean.size() ? clean[i] : kEndOfSentence;
      bool is_end = i == clean.size();
      std::size_t max_ctx = std::min<std::size_t>(i, static_cast<std::size_t>(order));
      for (std::size_t len = 0; len <= max_ctx; ++len) {
        std::u32string key = clean.substr(i - len, len);
        key.push_back(cur);
        Counts& c = touch(len, key);
        bool has_ins = is_end ? ev.end_insert : ev.positions[i].has_insert;
        char32_t ins_char = is_end ? ev.end_insert_char : ev.positions[i].insert_char;
        if (has_ins) {
          // insert-before takes precedence: one event per position
          std::ptrdiff_t t = alphabet.index_of(ins_char);
          if (t < 0)
            c.ins_oov += 1.0;
          else
            c.ins[static_cast<std::size_t>(t)] += 1.0;
        } else if (is_end || ev.positions[i].fate == detail::PositionEvent::Keep) {
          c.keep += 1.0;
        } else if (ev.positions[i].fate == detail::PositionEvent::Delete) {
          c.del += 1.0;
        } else {
          std::ptrdiff_t t = alphabet.index_of(ev.positions[i].target);
          if (t < 0)
            c.subst_oov += 1.0;
          else
            c.subst[static_cast<std::size_t>(t)] += 1.0;
        }
      }
    }
    double rate = pair_token_error_rate(pair.clean, pair.noisy);
    ++bin_counts[std::min<std::size_t>(9, static_cast<std::size_t>(rate * 10.0))];
  }

  ChannelModel model;
  model.alphabet = std::move(alphabet);
  model.order = order;
  model.smoothing_k = smoothing_k;
  model.levels.resize(static_cast<std::size_t>(order) + 1);

  // Same row-total add-k convention as estimate_confusion.
  auto build_row = [&](const Counts& c, bool end_row, char32_t self) {
    ChannelRow row;
    row.subst.assign(n, 0.0);
    row.ins.assign(n, 0.0);
    std::ptrdiff_t self_idx = model.alphabet.index_of(self);
    std::size_t subst_targets = end_row ? 0 : (self_idx >= 0 ? n - 1 : n);
    double dims = (end_row ? 1.0 : 2.0 + static_cast<double>(subst_targets)) +
                  static_cast<double>(n);
    double cell_k = smoothing_k / dims;
    double total = c.keep + c.del + c.subst_oov + c.ins_oov;
    for (double v : c.subst) total += v;
    for (double v : c.ins) total += v;
    double denom = total + smoothing_k;
    if (denom == 0.0) {
      row.keep = 1.0;
      return row;
    }
    double subst_oov_share =
        subst_targets ? c.subst_oov / static_cast<double>(subst_targets) : 0.0;
    double ins_oov_share = c.ins_oov / static_cast<double>(n);
    row.keep = (c.keep + cell_k) / denom;
    row.del = end_row ? 0.0 : (c.del + cell_k) / denom;
    for (std::size_t t = 0; t < n; ++t) {
      if (!end_row && (self_idx < 0 || t != static_cast<std::size_t>(self_idx)))
        row.subst[t] = (c.subst[t] + subst_oov_share + cell_k) / denom;
      row.ins[t] = (c.ins[t] + ins_oov_share + cell_k) / denom;
    }
    return row;
  };

  for (std::size_t len = 0; len < level_counts.size(); ++len) {
    for (const auto& [key, c] : level_counts[len]) {
      char32_t cur = key.back();
      model.levels[len].emplace(key, build_row(c, cur == kEndOfSentence, cur));
    }
  }
  model.oov_row.subst.assign(n, 0.0);
  model.oov_row.ins.assign(n, 0.0);
  model.oov_row.keep = 1.0;

  std::size_t total_pairs = corpus.pairs.size();
  for (std::size_t b = 0; b < 10; ++b)
    model.intensity_bins[b] =
        static_cast<double>(bin_counts[b]) / static_cast<double>(total_pairs);
  return model;
}

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

using NoiseModel = std::variant<VanillaModel, ConfusionModel, ChannelModel>;

namespace detail {

inline char32_t pick_from(const std::vector<double>& weights, const Alphabet& alphabet,
                          double mass, Rng& rng) {
  double u = rng.next_double() * mass;
  double acc = 0.0;
  for (std::size_t t = 0; t < weights.size(); ++t) {
    acc += weights[t];
    if (u < acc) return alphabet.chars[t];
  }
  // numerical slack: fall back to the last positive slot
  for (std::size_t t = weights.size(); t-- > 0;)
    if (weights[t] > 0) return alphabet.chars[t];
  return alphabet.chars.back();
}

inline char32_t pick_uniform_except(const Alphabet& alphabet, char32_t self, Rng& rng) {
  std::ptrdiff_t self_idx = alphabet.index_of(self);
  std::size_t n = alphabet.size();
  if (self_idx < 0) return alphabet.chars[rng.below(n)];
  std::size_t r = rng.below(n - 1);
  if (r >= static_cast<std::size_t>(self_idx)) ++r;
  return alphabet.chars[r];
}

}  // namespace detail

// Vanilla sampling: per gap one insertion chance at rate eta/3 (so the
// expected edit count per source character is exactly eta), per character
// the keep/delete/substitute split of the model equation.
inline std::string perturb(const VanillaModel& model, const std::string& sentence,
                           std::uint64_t seed, PerturbStats* stats = nullptr) {
  std::u32string in = utf8_decode(sentence);
  if (contains_placeholder(in))
    throw ValidationError("perturb: reserved placeholder in input");
  Rng rng(seed);
  double third = model.eta() / 3.0;
  std::u32string out;
  out.reserve(in.size() + 4);
  for (std::size_t i = 0; i <= in.size(); ++i) {
    if (rng.chance(third)) {
      out.push_back(model.alphabet().chars[rng.below(model.alphabet().size())]);
      if (stats) ++stats->insertions;
    }
    if (i == in.size()) break;
    if (stats) ++stats->chars;
    double u = rng.next_double();
    if (u < third) {
      if (stats) ++stats->deletions;  // delete: emit nothing
    } else if (u < 2 * third) {
      out.push_back(detail::pick_uniform_except(model.alphabet(), in[i], rng));
      if (stats) ++stats->substitutions;
    } else {
      out.push_back(in[i]);
    }
  }
  return utf8_encode(out);
}

// Confusion sampling: per gap up to two insertion chances at the estimated
// gap rate, then the character row.
inline std::string perturb(const ConfusionModel& model, const std::string& sentence,
                           std::uint64_t seed, PerturbStats* stats = nullptr) {
  std::u32string in = utf8_decode(sentence);
  if (contains_placeholder(in))
    throw ValidationError("perturb: reserved placeholder in input");
  Rng rng(seed);
  double ins_mass = 0.0;
  for (double p : model.ins_dist) ins_mass += p;
  std::u32string out;
  out.reserve(in.size() + 4);
  for (std::size_t i = 0; i <= in.size(); ++i) {
    for (int rep = 0; rep < 2; ++rep) {  // at most 2 consecutive insertions per gap
      if (ins_mass <= 0 || !rng.chance(model.ins_rate)) break;
      out.push_back(detail::pick_from(model.ins_dist, model.alphabet, ins_mass, rng));
      if (stats) ++stats->insertions;
    }
    if (i == in.size()) break;
    if (stats) ++stats->chars;
    const CharDistribution& row = model.row(in[i]);
    double u = rng.next_double() * row.total();
    if (u < row.keep) {
      out.push_back(in[i]);
    } else if (u < row.keep + row.del) {
      if (stats) ++stats->deletions;
    } else {
      out.push_back(detail::pick_from(row.subst, model.alphabet, row.subst_mass(), rng));
      if (stats) ++stats->substitutions;
    }
  }
  return utf8_encode(out);
}

// Channel sampling: draw a per-sentence intensity from the mixture, solve for
// the multiplier m that matches the expected token error rate to it, then
// sample one event per character from the scaled context rows.
inline std::string perturb(const ChannelModel& model, const std::string& sentence,
                           std::uint64_t seed, PerturbStats* stats = nullptr) {
  std::u32string in = utf8_decode(sentence);
  if (contains_placeholder(in))
    throw ValidationError("perturb: reserved placeholder in input");
  Rng rng(seed);

  // Target token error rate for this sentence.
  double bin_u = rng.next_double();
  std::size_t bin = 9;
  double acc = 0.0;
  for (std::size_t b = 0; b < 10; ++b) {
    acc += model.intensity_bins[b];
    if (bin_u < acc) {
      bin = b;
      break;
    }
  }
  double target = (static_cast<double>(bin) + rng.next_double()) * 0.1;

  // Base rows for every position (context lookups are deterministic).
  std::vector<const ChannelRow*> rows(in.size() + 1);
  for (std::size_t i = 0; i <= in.size(); ++i) {
    std::size_t ctx_len = std::min<std::size_t>(i, static_cast<std::size_t>(model.order));
    std::u32string_view context = std::u32string_view(in).substr(i - ctx_len, ctx_len);
    rows[i] = &model.row(context, i < in.size() ? in[i] : kEndOfSentence);
  }

  // Token membership of each character position.
  std::vector<double> nonkeep(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) nonkeep[i] = rows[i]->nonkeep();
  std::vector<std::pair<std::size_t, std::size_t>> tokens;
  {
    std::size_t i = 0;
    while (i < in.size()) {
      while (i < in.size() && is_whitespace(in[i])) ++i;
      std::size_t start = i;
      while (i < in.size() && !is_whitespace(in[i])) ++i;
      if (i > start) tokens.emplace_back(start, i);
    }
  }

  // Expected token error rate under multiplier m.
  auto expected_rate = [&](double m) {
    if (tokens.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [a, b] : tokens) {
      double p_clean = 1.0;
      for (std::size_t i = a; i < b; ++i) p_clean *= 1.0 - std::min(1.0, m * nonkeep[i]);
      sum += 1.0 - p_clean;
    }
    return sum / static_cast<double>(tokens.size());
  };

  double m = 1.0;
  {
    double lo = 0.0, hi = 1.0;
    while (expected_rate(hi) < target && hi < 1e9) hi *= 2.0;
    for (int iter = 0; iter < 60; ++iter) {
      double mid = 0.5 * (lo + hi);
      if (expected_rate(mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    m = hi;
  }

  std::u32string out;
  out.reserve(in.size() + 4);
  for (std::size_t i = 0; i <= in.size(); ++i) {
    const ChannelRow& row = *rows[i];
    double base_nonkeep = row.nonkeep();
    double factor = base_nonkeep > 0 ? std::min(1.0, m * base_nonkeep) / base_nonkeep : 0.0;
    double u = rng.next_double();
    double ins_mass = row.ins_mass() * factor;
    double del_mass = row.del * factor;
    double subst_mass = row.subst_mass() * factor;
    bool is_end = i == in.size();
    if (!is_end && stats) ++stats->chars;
    if (u < ins_mass) {
      out.push_back(detail::pick_from(row.ins, model.alphabet, row.ins_mass(), rng));
      if (stats) ++stats->insertions;
      if (!is_end) out.push_back(in[i]);  // insert-before keeps the character
    } else if (!is_end && u < ins_mass + del_mass) {
      if (stats) ++stats->deletions;
    } else if (!is_end && u < ins_mass + del_mass + subst_mass) {
      out.push_back(detail::pick_from(row.subst, model.alphabet, row.subst_mass(), rng));
      if (stats) ++stats->substitutions;
    } else if (!is_end) {
      out.push_back(in[i]);
    }
  }
  return utf8_encode(out);
}

inline std::string perturb(const NoiseModel& model, const std::string& sentence,
                           std::uint64_t seed, PerturbStats* stats = nullptr) {
  return std::visit(
      [&](const auto& m) { return perturb(m, sentence, seed, stats); }, model);
}

// Token-level variant: the same sampling applied to a single word.
template <typename Model>
inline std::string perturb_token(const Model& model, const std::string& word,
                                 std::uint64_t seed, PerturbStats* stats = nullptr) {
  return perturb(model, word, seed, stats);
}

// ---------------------------------------------------------------------------
// Sentence encoding for the external generator protocol
// ---------------------------------------------------------------------------

// Whitespace becomes the placeholder symbol, then a single space separates
// every pair of characters.
inline std::string encode_for_seq2seq(const std::string& sentence) {
  std::u32string in = utf8_decode(sentence);
  if (contains_placeholder(in))
    throw ValidationError("encode_for_seq2seq: reserved placeholder in input");
  std::u32string out;
  out.reserve(in.size() * 2);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (i) out.push_back(U' ');
    out.push_back(is_whitespace(in[i]) ? kInsertionPlaceholder : in[i]);
  }
  return utf8_encode(out);
}

inline std::string decode_from_seq2seq(const std::string& encoded) {
  std::u32string in = utf8_decode(encoded);
  std::u32string out;
  out.reserve(in.size() / 2 + 1);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (i % 2 == 1) {
      if (in[i] != U' ')
        throw ParseError("decode_from_seq2seq: expected single-space separators");
      continue;
    }
    if (in[i] == U' ') throw ParseError("decode_from_seq2seq: malformed character stream");
    out.push_back(in[i] == kInsertionPlaceholder ? U' ' : in[i]);
  }
  return utf8_encode(out);
}

}  // namespace noisycorpus
