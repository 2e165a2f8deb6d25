// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "noisycorpus/align.hpp"
#include "noisycorpus/corpus.hpp"
#include "noisycorpus/errors.hpp"
#include "noisycorpus/metrics.hpp"
#include "noisycorpus/noise.hpp"
#include "noisycorpus/rng.hpp"
#include "noisycorpus/subprocess.hpp"
#include "noisycorpus/unicode.hpp"

namespace noisycorpus {

// ---------------------------------------------------------------------------
// Degraders: anything that turns one clean sentence into one noisy sentence.
// ---------------------------------------------------------------------------

struct DegradeOutcome {
  bool ok = true;
  std::string text;
  std::string error;
};

class Degrader {
public:
  virtual ~Degrader() = default;

  // Degrades a batch; outputs align with inputs by index. first_index is the
  // global sentence index of inputs[0]; seeding hangs off it so results do
  // not depend on batch boundaries.
  virtual std::vector<DegradeOutcome> degrade(const std::vector<std::string>& inputs,
                                              std::size_t first_index) = 0;
};

// Per-sentence intensity distribution for the builtin degrader. The sampled
// value is the probability that any given token of the sentence is corrupted,
// so the corpus token error rate matches the distribution mean.
struct IntensitySpec {
  enum class Type { Constant, Geometric, Bins } type = Type::Constant;
  double rate = 0.0;     // Constant
  double q = 0.5;        // Geometric: bin b has mass proportional to q^b
  int max_bin = 9;       // Geometric: truncate support at this bin
  std::array<double, 10> masses{};  // Bins

  std::array<double, 10> bin_masses() const {
    std::array<double, 10> out{};
    switch (type) {
      case Type::Constant:
        out[std::min<std::size_t>(9, static_cast<std::size_t>(rate * 10.0))] = 1.0;
        break;
      case Type::Geometric: {
        double total = 0.0, w = 1.0;
        for (int b = 0; b <= max_bin && b < 10; ++b, w *= q) {
          out[static_cast<std::size_t>(b)] = w;
          total += w;
        }
        for (double& v : out) v /= total;
        break;
      }
      case Type::Bins: {
        double total = 0.0;
        for (double v : masses) total += v;
        if (total <= 0) throw ValidationError("intensity bins must have positive mass");
        out = masses;
        for (double& v : out) v /= total;
        break;
      }
    }
    return out;
  }

  double sample(Rng& rng) const {
    if (type == Type::Constant) return rate;
    std::array<double, 10> bins = bin_masses();
    double u = rng.next_double();
    double acc = 0.0;
    std::size_t bin = 9;
    for (std::size_t b = 0; b < 10; ++b) {
      acc += bins[b];
      if (u < acc) {
        bin = b;
        break;
      }
    }
    return (static_cast<double>(bin) + rng.next_double()) * 0.1;
  }
};

// Stands in for the render+OCR stage: per-character visually plausible swaps
// plus uniform noise, with the per-sentence rate drawn from the intensity
// distribution. Whitespace is never touched, so tokens map one to one.
class BuiltinDegrader : public Degrader {
public:
  BuiltinDegrader(IntensitySpec intensity, std::uint64_t seed)
      : intensity_(intensity), seed_(seed) {}

  std::vector<DegradeOutcome> degrade(const std::vector<std::string>& inputs,
                                      std::size_t first_index) override {
    std::vector<DegradeOutcome> out(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      Rng rng(mix_seed(seed_, first_index + i));
      out[i].text = degrade_one(inputs[i], rng);
    }
    return out;
  }

  std::string degrade_one(const std::string& sentence, Rng& rng) const {
    double token_rate = intensity_.sample(rng);
    std::vector<std::string> words = split_words_utf8(sentence);
    std::string out;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w) out += ' ';
      if (rng.chance(token_rate))
        out += corrupt_token(words[w], rng);
      else
        out += words[w];
    }
    return out;
  }

private:
  // Applies character edits at the rate that makes P(token changed) equal to
  // the token rate; always changes the token.
  std::string corrupt_token(const std::string& word, Rng& rng) const {
    std::u32string in = utf8_decode(word);
    if (in.empty()) return word;
    std::u32string out;
    bool changed = false;
    for (int attempt = 0; attempt < 16 && !changed; ++attempt) {
      out.clear();
      for (char32_t c : in) {
        double u = rng.next_double();
        if (u < 0.78) {
          out.push_back(c);
          continue;
        }
        changed = true;
        if (u < 0.90) {  // table or uniform substitution
          out.push_back(swap_for(c, rng));
        } else if (u < 0.96 || in.size() == 1) {  // insertion before
          out.push_back(swap_for(c, rng));
          out.push_back(c);
        }
        // else deletion: emit nothing
      }
      changed = changed && out != in;
    }
    if (!changed) {
      // force one substitution at a random position
      out = in;
      std::size_t p = rng.below(in.size());
      char32_t repl = swap_for(in[p], rng);
      if (repl == in[p]) repl = in[p] == U'x' ? U'y' : U'x';
      out[p] = repl;
    }
    return utf8_encode(out);
  }

  char32_t swap_for(char32_t c, Rng& rng) const {
    static const std::map<char32_t, std::u32string> kSwaps = {
        {U'o', U"0ce"}, {U'0', U"oO"},  {U'l', U"1I"},  {U'1', U"lI"},  {U'i', U"jl1"},
        {U'e', U"co"},  {U'c', U"eo"},  {U'a', U"oe"},  {U'n', U"hmr"}, {U'm', U"nw"},
        {U'u', U"vn"},  {U'v', U"yu"},  {U'w', U"vm"},  {U'r', U"nv"},  {U'h', U"bn"},
        {U'b', U"h6"},  {U'd', U"cl"},  {U't', U"f"},   {U'f', U"t"},   {U'g', U"q9"},
        {U'q', U"g9"},  {U's', U"z5"},  {U'z', U"s2"},  {U'y', U"v"},   {U'k', U"lc"},
        {U'S', U"5"},   {U'5', U"S"},   {U'B', U"8"},   {U'8', U"B"},   {U'I', U"l1"},
        {U'O', U"0D"},  {U'D', U"O"},   {U'E', U"F"},   {U'G', U"C6"},  {U'Z', U"2"},
        {U'2', U"Z"}};
    auto it = kSwaps.find(c);
    if (it != kSwaps.end() && rng.chance(0.8))
      return it->second[rng.below(it->second.size())];
    static const std::u32string kPool =
        U"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    char32_t r = kPool[rng.below(kPool.size())];
    return r == c ? (c == U'x' ? U'y' : U'x') : r;
  }

  IntensitySpec intensity_;
  std::uint64_t seed_;
};

// Wraps a fitted error model as a degrader.
class ModelDegrader : public Degrader {
public:
  ModelDegrader(NoiseModel model, std::uint64_t seed)
      : model_(std::move(model)), seed_(seed) {}

  std::vector<DegradeOutcome> degrade(const std::vector<std::string>& inputs,
                                      std::size_t first_index) override {
    std::vector<DegradeOutcome> out(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      try {
        out[i].text = perturb(model_, inputs[i], mix_seed(seed_, first_index + i));
      } catch (const std::exception& e) {
        out[i].ok = false;
        out[i].error = e.what();
      }
    }
    return out;
  }

private:
  NoiseModel model_;
  std::uint64_t seed_;
};

// External command over the line protocol, sentence- or token-level.
class ExternalDegrader : public Degrader {
public:
  explicit ExternalDegrader(ExternalGenerator gen) : gen_(std::move(gen)) {}

  std::vector<DegradeOutcome> degrade(const std::vector<std::string>& inputs,
                                      std::size_t) override {
    std::vector<DegradeOutcome> out(inputs.size());
    if (gen_.mode == ExternalGenerator::Mode::Sentence) {
      std::vector<std::string> encoded;
      encoded.reserve(inputs.size());
      for (const auto& s : inputs) encoded.push_back(encode_for_seq2seq(s));
      // Process-level failures are fatal; a malformed output line only skips
      // its own sentence.
      std::vector<std::string> raw = run_line_filter(gen_.command, encoded);
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        try {
          out[i].text = decode_from_seq2seq(raw[i]);
        } catch (const std::exception& e) {
          out[i].ok = false;
          out[i].error = e.what();
        }
      }
      return out;
    }
    // Token mode: every token of the batch in one child run, then reassemble.
    std::vector<std::string> tokens;
    std::vector<std::size_t> counts(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      std::vector<std::string> words = split_words_utf8(inputs[i]);
      counts[i] = words.size();
      for (const auto& w : words) tokens.push_back(encode_for_seq2seq(w));
    }
    std::vector<std::string> raw = run_line_filter(gen_.command, tokens);
    std::size_t at = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      std::string joined;
      bool ok = true;
      std::string err;
      for (std::size_t k = 0; k < counts[i]; ++k) {
        try {
          std::string word = decode_from_seq2seq(raw[at]);
          if (k) joined += ' ';
          joined += word;
        } catch (const std::exception& e) {
          ok = false;
          err = e.what();
        }
        ++at;
      }
      out[i].ok = ok;
      out[i].text = ok ? joined : std::string();
      out[i].error = err;
    }
    return out;
  }

private:
  ExternalGenerator gen_;
};

// ---------------------------------------------------------------------------
// Unsupervised parallel data generation
// ---------------------------------------------------------------------------

struct SkipRecord {
  std::size_t index = 0;
  std::string reason;
};

struct GenerateReport {
  std::size_t generated = 0;
  std::vector<SkipRecord> skips;
};

inline ParallelCorpus generate_parallel(const std::vector<std::string>& seed_corpus,
                                        Degrader& degrader, GenerateReport* report = nullptr,
                                        std::size_t first_index = 0) {
  ParallelCorpus corpus;
  std::vector<std::string> inputs;
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < seed_corpus.size(); ++i) {
    if (contains_placeholder(seed_corpus[i])) {
      if (report) report->skips.push_back({first_index + i, "reserved placeholder in input"});
      continue;
    }
    inputs.push_back(seed_corpus[i]);
    positions.push_back(i);
  }
  std::vector<DegradeOutcome> outcomes = degrader.degrade(inputs, first_index);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    if (!outcomes[k].ok) {
      if (report) report->skips.push_back({first_index + positions[k], outcomes[k].error});
      continue;
    }
    corpus.pairs.push_back({seed_corpus[positions[k]], outcomes[k].text});
    if (report) ++report->generated;
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Noisy benchmark synthesis
// ---------------------------------------------------------------------------

struct SynthReport {
  double ter = 0.0;
  std::size_t sentences = 0;
  std::size_t dropped_tokens = 0;
  std::size_t merged_tokens = 0;   // clean tokens absorbed into a merged pair
  std::size_t inserted_tokens = 0;
  std::vector<SkipRecord> skips;
};

inline Dataset synth_benchmark(const Dataset& input, Degrader& degrader,
                               SynthReport* report = nullptr) {
  Dataset out;
  out.label_inventory = input.label_inventory;

  std::vector<std::string> texts;
  std::vector<std::size_t> positions;
  for (std::size_t s = 0; s < input.sentences.size(); ++s) {
    if (input.sentences[s].is_docstart()) continue;  // structural, never noised
    texts.push_back(input.sentences[s].text());
    positions.push_back(s);
  }
  std::vector<DegradeOutcome> outcomes = degrader.degrade(texts, 0);

  std::size_t k = 0;
  for (std::size_t s = 0; s < input.sentences.size(); ++s) {
    const LabeledSentence& clean = input.sentences[s];
    if (clean.is_docstart()) {
      LabeledSentence copy = clean;
      if (!copy.has_sources) {
        copy.has_sources = true;
        copy.sources = copy.tokens;
      }
      out.sentences.push_back(std::move(copy));
      continue;
    }
    const DegradeOutcome& oc = outcomes[k++];
    if (!oc.ok) {
      if (report) report->skips.push_back({s, oc.error});
      continue;
    }
    try {
      LabeledSentence noisy = transfer_labels(clean, oc.text);
      if (noisy.tokens.empty()) {
        if (report) report->skips.push_back({s, "degraded sentence has no tokens left"});
        continue;
      }
      if (report) {
        report->dropped_tokens += noisy.dropped.size();
        std::size_t with_source = 0;
        for (const auto& src : noisy.sources)
          if (!src.empty()) ++with_source;
        report->inserted_tokens += noisy.sources.size() - with_source;
        report->merged_tokens +=
            clean.tokens.size() - with_source - noisy.dropped.size();
      }
      out.sentences.push_back(std::move(noisy));
    } catch (const std::exception& e) {
      if (report) report->skips.push_back({s, e.what()});
    }
  }
  if (report) {
    report->sentences = out.sentences.size();
    TerResult ter = token_error_rate_detail(out);
    report->ter = ter.rate;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Misspelling induction
// ---------------------------------------------------------------------------

struct MisspellingTable {
  std::map<std::string, std::vector<std::string>> candidates;

  // TSV rows: word TAB candidate [TAB candidate ...]; repeated words
  // concatenate their candidate lists in file order.
  static MisspellingTable parse_tsv(std::string_view text) {
    MisspellingTable t;
    std::vector<std::string> lines = detail::split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
      if (lines[ln].empty()) continue;
      std::vector<std::string> cols;
      std::size_t start = 0;
      const std::string& line = lines[ln];
      for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
          cols.push_back(line.substr(start, i - start));
          start = i + 1;
        }
      }
      if (cols.size() < 2)
        throw ParseError("misspelling table line " + std::to_string(ln + 1) +
                         ": expected word TAB candidate");
      for (std::size_t c = 1; c < cols.size(); ++c) {
        if (cols[c].empty())
          throw ParseError("misspelling table line " + std::to_string(ln + 1) +
                           ": empty candidate");
        validate_token(cols[c], "misspelling table line " + std::to_string(ln + 1));
        t.candidates[cols[0]].push_back(cols[c]);
      }
    }
    return t;
  }
};

// Replaces each table-listed token with probability p_replace by a uniformly
// chosen candidate. Labels and token counts never change; sources keep the
// clean surfaces (populated from the input tokens when absent).
inline Dataset induce_misspellings(const Dataset& input, const MisspellingTable& table,
                                   double p_replace, std::uint64_t seed) {
  if (!(p_replace >= 0.0 && p_replace <= 1.0))
    throw ValidationError("induce_misspellings: p_replace must lie in [0, 1]");
  Dataset out = input;
  for (std::size_t s = 0; s < out.sentences.size(); ++s) {
    LabeledSentence& sent = out.sentences[s];
    if (!sent.has_sources) {
      sent.has_sources = true;
      sent.sources = sent.tokens;
    }
    if (sent.is_docstart()) continue;
    Rng rng(mix_seed(seed, s));
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      auto it = table.candidates.find(sent.tokens[i]);
      if (it == table.candidates.end()) continue;
      if (!rng.chance(p_replace)) continue;
      sent.tokens[i] = it->second[rng.below(it->second.size())];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-epoch augmentation stream
// ---------------------------------------------------------------------------

enum class AugmentMode { Token, Sentence };

namespace detail {

inline LabeledSentence with_self_sources(const LabeledSentence& sent) {
  LabeledSentence copy = sent;
  if (!copy.has_sources) {
    copy.has_sources = true;
    copy.sources = copy.tokens;
  }
  return copy;
}

}  // namespace detail

// Noisy copy of the dataset for one training epoch. Seeds derive from
// (base_seed, epoch, sentence index [, token index]), so epochs differ but
// each (base_seed, epoch) is exactly reproducible.
inline Dataset augmentation_stream(const Dataset& input, const NoiseModel& model,
                                   std::uint64_t base_seed, std::uint64_t epoch,
                                   AugmentMode mode = AugmentMode::Token) {
  Dataset out;
  out.label_inventory = input.label_inventory;
  for (std::size_t s = 0; s < input.sentences.size(); ++s) {
    const LabeledSentence& clean = input.sentences[s];
    if (clean.is_docstart()) {
      out.sentences.push_back(detail::with_self_sources(clean));
      continue;
    }
    if (mode == AugmentMode::Sentence) {
      std::string noisy = perturb(model, clean.text(), mix_seed(base_seed, epoch, s));
      LabeledSentence sent = transfer_labels(clean, noisy);
      // fully deleted: fall back to the original
      if (sent.tokens.empty()) sent = detail::with_self_sources(clean);
      out.sentences.push_back(std::move(sent));
      continue;
    }
    LabeledSentence sent;
    sent.has_sources = true;
    for (std::size_t i = 0; i < clean.tokens.size(); ++i) {
      std::string noisy =
          perturb_token(model, clean.tokens[i], mix_seed(base_seed, epoch, s, i));
      std::vector<std::string> parts = split_words_utf8(noisy);
      if (parts.empty()) {
        sent.dropped.emplace_back(clean.tokens[i], clean.labels[i]);
        continue;
      }
      sent.tokens.push_back(parts[0]);
      sent.labels.push_back(clean.labels[i]);
      sent.sources.push_back(clean.tokens[i]);
      for (std::size_t p = 1; p < parts.size(); ++p) {
        sent.tokens.push_back(parts[p]);
        sent.labels.push_back(continuation_label(clean.labels[i]));
        sent.sources.emplace_back();
      }
    }
    if (sent.tokens.empty()) sent = detail::with_self_sources(clean);
    sent.labels = normalize_bio(sent.labels);
    out.sentences.push_back(std::move(sent));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optional corrector hook of the evaluation pipeline
// ---------------------------------------------------------------------------

// Sends each sentence's raw text (plain lines, not the seq2seq encoding) to
// the command, re-tokenizes the answers and re-transfers the labels from the
// noisy sentence.
inline Dataset apply_corrector(const CommandSpec& cmd, const Dataset& noisy) {
  Dataset out;
  out.label_inventory = noisy.label_inventory;
  std::vector<std::string> lines;
  for (const auto& sent : noisy.sentences)
    if (!sent.is_docstart()) lines.push_back(sent.text());
  std::vector<std::string> corrected = run_line_filter(cmd, lines);
  std::size_t k = 0;
  for (const auto& sent : noisy.sentences) {
    if (sent.is_docstart()) {
      out.sentences.push_back(sent);
      continue;
    }
    const std::string& fixed = corrected[k++];
    LabeledSentence base = sent;
    base.has_sources = false;
    base.sources.clear();
    base.dropped.clear();
    LabeledSentence result = transfer_labels(base, fixed);
    if (result.tokens.empty()) result = sent;  // corrector erased it: keep the input
    out.sentences.push_back(std::move(result));
  }
  return out;
}

}  // namespace noisycorpus
