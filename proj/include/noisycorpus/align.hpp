// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "noisycorpus/corpus.hpp"
#include "noisycorpus/errors.hpp"
#include "noisycorpus/unicode.hpp"

namespace noisycorpus {

// ---------------------------------------------------------------------------
// Character-level edit scripts
// ---------------------------------------------------------------------------

enum class EditKind { Match, Substitute, Insert, Delete };

struct EditOp {
  EditKind kind;
  char32_t src = 0;  // set for Match, Substitute, Delete
  char32_t dst = 0;  // set for Match, Substitute, Insert

  bool operator==(const EditOp& other) const {
    return kind == other.kind && src == other.src && dst == other.dst;
  }
};

struct EditScript {
  std::vector<EditOp> ops;
  std::uint32_t cost = 0;  // number of non-Match ops == Levenshtein distance
};

// Minimal edit script with unit costs. Ties are broken deterministically,
// preferring Match > Substitute > Delete > Insert at each backtracking step,
// which biases the alignment toward the diagonal.
inline EditScript edit_script(std::u32string_view src, std::u32string_view dst) {
  const std::size_t n = src.size(), m = dst.size();
  std::vector<std::uint32_t> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return dp[i * (m + 1) + j]; };
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    at(i, 0) = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      std::uint32_t best = at(i - 1, j - 1) + (src[i - 1] == dst[j - 1] ? 0u : 1u);
      best = std::min(best, at(i - 1, j) + 1);  // delete src[i-1]
      best = std::min(best, at(i, j - 1) + 1);  // insert dst[j-1]
      at(i, j) = best;
    }
  }

  EditScript script;
  script.cost = at(n, m);
  script.ops.reserve(std::max(n, m));
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    std::uint32_t here = at(i, j);
    if (i > 0 && j > 0 && src[i - 1] == dst[j - 1] && at(i - 1, j - 1) == here) {
      script.ops.push_back({EditKind::Match, src[i - 1], dst[j - 1]});
      --i, --j;
    } else if (i > 0 && j > 0 && at(i - 1, j - 1) + 1 == here) {
      script.ops.push_back({EditKind::Substitute, src[i - 1], dst[j - 1]});
      --i, --j;
    } else if (i > 0 && at(i - 1, j) + 1 == here) {
      script.ops.push_back({EditKind::Delete, src[i - 1], 0});
      --i;
    } else {
      script.ops.push_back({EditKind::Insert, 0, dst[j - 1]});
      --j;
    }
  }
  std::reverse(script.ops.begin(), script.ops.end());
  return script;
}

inline EditScript edit_script(std::string_view src_utf8, std::string_view dst_utf8) {
  return edit_script(utf8_decode(src_utf8), utf8_decode(dst_utf8));
}

// Replays a script against its source string.
inline std::u32string apply_script(const EditScript& script, std::u32string_view src) {
  std::u32string out;
  std::size_t i = 0;
  for (const EditOp& op : script.ops) {
    switch (op.kind) {
      case EditKind::Match:
      case EditKind::Substitute:
        if (i >= src.size()) throw ValidationError("edit script overruns source");
        out.push_back(op.dst);
        ++i;
        break;
      case EditKind::Delete:
        if (i >= src.size()) throw ValidationError("edit script overruns source");
        ++i;
        break;
      case EditKind::Insert:
        out.push_back(op.dst);
        break;
    }
  }
  if (i != src.size()) throw ValidationError("edit script does not consume source");
  return out;
}

// ---------------------------------------------------------------------------
// Word-level alignment
// ---------------------------------------------------------------------------

struct AlignedWordPair {
  std::string clean;  // possibly empty (inserted noisy word)
  std::string noisy;  // possibly empty (deleted clean word)
  bool operator==(const AlignedWordPair& other) const {
    return clean == other.clean && noisy == other.noisy;
  }
};

struct WordAlignment {
  std::vector<AlignedWordPair> pairs;
};

struct AlignCounts {
  std::size_t matches = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
};

namespace detail {

// One aligned group: a run of clean word indices (merged when the separating
// whitespace vanished on the noisy side) and the noisy tokens of its image.
// Either side may be empty.
struct AlignGroup {
  std::vector<std::size_t> clean_words;
  std::vector<std::string> noisy_tokens;
};

struct CharRange {
  std::size_t begin = 0, end = 0;
};

// Groups a clean/noisy sentence pair at the word level. The character
// alignment is segmented at clean-side whitespace boundaries; each clean
// word's image is the noisy span its characters align to, with insertions
// bound to the following clean character. Noisy tokens are then assigned to
// the clean word group whose image overlaps them the most; tokens touching
// no image become insertion groups.
inline std::vector<AlignGroup> align_groups(const std::u32string& clean,
                                            const std::u32string& noisy,
                                            AlignCounts* counts = nullptr) {
  if (contains_placeholder(clean) || contains_placeholder(noisy))
    throw ValidationError("reserved placeholder U+00AC/U+00A6 in alignment input");

  EditScript script = edit_script(clean, noisy);

  // Noisy image range of every clean position. Insertions extend the image
  // of the clean char they precede; trailing insertions attach to the last.
  std::vector<CharRange> image(clean.size());
  {
    std::size_t i = 0, j = 0;
    std::size_t pending = 0;  // start of the current insertion run
    bool have_pending = false;
    for (const EditOp& op : script.ops) {
      if (counts) {
        switch (op.kind) {
          case EditKind::Match: ++counts->matches; break;
          case EditKind::Substitute: ++counts->substitutions; break;
          case EditKind::Insert: ++counts->insertions; break;
          case EditKind::Delete: ++counts->deletions; break;
        }
      }
      switch (op.kind) {
        case EditKind::Insert:
          if (!have_pending) {
            pending = j;
            have_pending = true;
          }
          ++j;
          break;
        case EditKind::Match:
        case EditKind::Substitute:
          image[i].begin = have_pending ? pending : j;
          ++j;
          image[i].end = j;
          have_pending = false;
          ++i;
          break;
        case EditKind::Delete:
          image[i].begin = have_pending ? pending : j;
          image[i].end = j;
          have_pending = false;
          ++i;
          break;
      }
    }
    if (have_pending && !clean.empty()) image[clean.size() - 1].end = j;
  }

  // Clean word spans and the whitespace separators between them.
  struct Span {
    std::size_t begin, end;
  };
  std::vector<Span> words;
  {
    std::size_t i = 0;
    while (i < clean.size()) {
      while (i < clean.size() && is_whitespace(clean[i])) ++i;
      std::size_t start = i;
      while (i < clean.size() && !is_whitespace(clean[i])) ++i;
      if (i > start) words.push_back({start, i});
    }
  }

  // Merge adjacent words whose separator image lost all whitespace. A word
  // whose own image is empty was deleted wholesale; it never merges and
  // stays alone as a dropped group.
  auto word_image_empty = [&](std::size_t w) {
    return image[words[w].begin].begin == image[words[w].end - 1].end;
  };
  std::vector<std::vector<std::size_t>> word_groups;
  for (std::size_t w = 0; w < words.size(); ++w) {
    bool merge = false;
    if (w > 0 && !word_image_empty(w) && !word_image_empty(w - 1)) {
      bool separator_ws = false;
      for (std::size_t i = words[w - 1].end; i < words[w].begin; ++i)
        for (std::size_t j = image[i].begin; j < image[i].end; ++j)
          if (is_whitespace(noisy[j])) separator_ws = true;
      merge = !separator_ws;
    }
    if (merge)
      word_groups.back().push_back(w);
    else
      word_groups.push_back({w});
  }

  // Noisy image range of each group.
  std::vector<CharRange> group_image(word_groups.size());
  for (std::size_t g = 0; g < word_groups.size(); ++g) {
    std::size_t a = words[word_groups[g].front()].begin;
    std::size_t b = words[word_groups[g].back()].end - 1;
    group_image[g] = {image[a].begin, std::max(image[a].begin, image[b].end)};
  }

  // Noisy token spans.
  std::vector<Span> tokens;
  {
    std::size_t j = 0;
    while (j < noisy.size()) {
      while (j < noisy.size() && is_whitespace(noisy[j])) ++j;
      std::size_t start = j;
      while (j < noisy.size() && !is_whitespace(noisy[j])) ++j;
      if (j > start) tokens.push_back({start, j});
    }
  }

  // Assign each noisy token to the group with maximal overlap.
  auto overlap = [](Span t, CharRange r) -> std::size_t {
    std::size_t lo = std::max(t.begin, r.begin);
    std::size_t hi = std::min(t.end, r.end);
    return hi > lo ? hi - lo : 0;
  };
  std::vector<std::ptrdiff_t> token_group(tokens.size(), -1);
  std::size_t g_hint = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    std::size_t best = 0;
    std::ptrdiff_t best_g = -1;
    for (std::size_t g = g_hint; g < word_groups.size(); ++g) {
      if (group_image[g].begin >= tokens[t].end && best_g >= 0) break;
      std::size_t ov = overlap(tokens[t], group_image[g]);
      if (ov > best) {
        best = ov;
        best_g = static_cast<std::ptrdiff_t>(g);
      }
    }
    token_group[t] = best_g;
    if (best_g > static_cast<std::ptrdiff_t>(g_hint)) g_hint = static_cast<std::size_t>(best_g);
  }

  // Emit groups in text order, interleaving unassigned (inserted) tokens and
  // flushing clean groups with empty images (dropped words) by clean order.
  std::vector<AlignGroup> out;
  auto token_string = [&](std::size_t t) {
    return utf8_encode(std::u32string_view(noisy).substr(tokens[t].begin,
                                                         tokens[t].end - tokens[t].begin));
  };
  std::size_t next_group = 0;
  auto flush_groups_before = [&](std::size_t limit) {
    while (next_group < limit) {
      AlignGroup grp;
      grp.clean_words = word_groups[next_group];
      out.push_back(std::move(grp));
      ++next_group;
    }
  };
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (token_group[t] < 0) {
      AlignGroup grp;
      grp.noisy_tokens.push_back(token_string(t));
      out.push_back(std::move(grp));
      continue;
    }
    std::size_t g = static_cast<std::size_t>(token_group[t]);
    if (g >= next_group) {
      flush_groups_before(g);
      AlignGroup grp;
      grp.clean_words = word_groups[g];
      grp.noisy_tokens.push_back(token_string(t));
      out.push_back(std::move(grp));
      ++next_group;
    } else {
      out.back().noisy_tokens.push_back(token_string(t));  // split: extra token, same group
    }
  }
  flush_groups_before(word_groups.size());
  return out;
}

inline std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace detail

inline WordAlignment align_words(const std::string& clean_utf8, const std::string& noisy_utf8,
                                 AlignCounts* counts = nullptr) {
  std::u32string clean = utf8_decode(clean_utf8);
  std::u32string noisy = utf8_decode(noisy_utf8);
  std::vector<std::u32string> clean_words = split_words(clean);
  WordAlignment wa;
  for (const detail::AlignGroup& grp : detail::align_groups(clean, noisy, counts)) {
    AlignedWordPair pair;
    std::vector<std::string> cw;
    for (std::size_t w : grp.clean_words) cw.push_back(utf8_encode(clean_words[w]));
    pair.clean = detail::join_words(cw);
    pair.noisy = detail::join_words(grp.noisy_tokens);
    wa.pairs.push_back(std::move(pair));
  }
  return wa;
}

// ---------------------------------------------------------------------------
// Annotation transfer
// ---------------------------------------------------------------------------

// Transfers labels from a clean sentence onto the tokens of its noisy
// rendering. Inserted noisy words get O, split-off continuation tokens get
// the continuation label, clean words with an empty noisy image are dropped
// (recorded with their labels). Sources carry the clean counterparts, with
// the empty marker for tokens that have none.
inline LabeledSentence transfer_labels(const LabeledSentence& clean,
                                       const std::string& noisy_text) {
  if (clean.tokens.size() != clean.labels.size())
    throw ValidationError("transfer_labels: token/label length mismatch");

  std::u32string clean32 = utf8_decode(clean.text());
  std::u32string noisy32 = utf8_decode(noisy_text);

  LabeledSentence out;
  out.has_sources = true;
  for (const detail::AlignGroup& grp : detail::align_groups(clean32, noisy32)) {
    if (grp.clean_words.empty()) {
      for (const std::string& tok : grp.noisy_tokens) {
        out.tokens.push_back(tok);
        out.labels.emplace_back("O");
        out.sources.emplace_back();
      }
      continue;
    }
    std::size_t first = grp.clean_words.front();
    if (grp.noisy_tokens.empty()) {
      for (std::size_t w : grp.clean_words)
        out.dropped.emplace_back(clean.tokens[w], clean.labels[w]);
      continue;
    }
    out.tokens.push_back(grp.noisy_tokens.front());
    out.labels.push_back(clean.labels[first]);
    out.sources.push_back(clean.tokens[first]);
    for (std::size_t t = 1; t < grp.noisy_tokens.size(); ++t) {
      out.tokens.push_back(grp.noisy_tokens[t]);
      out.labels.push_back(continuation_label(clean.labels[first]));
      out.sources.emplace_back();
    }
  }
  out.labels = normalize_bio(out.labels);
  return out;
}

// ---------------------------------------------------------------------------
// Word-pair extraction over a parallel corpus
// ---------------------------------------------------------------------------

struct PairSkip {
  std::size_t index;
  std::string reason;
};

struct WordPairExtraction {
  std::vector<AlignedWordPair> pairs;
  std::vector<PairSkip> skips;
  AlignCounts counts;
};

// Word pairs from every corpus pair, in order. Per-pair failures are
// collected and the pair skipped; drop_empty filters pairs with an empty side.
inline WordPairExtraction extract_word_pairs(const ParallelCorpus& corpus,
                                             bool drop_empty = false) {
  WordPairExtraction out;
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    try {
      WordAlignment wa = align_words(corpus.pairs[i].clean, corpus.pairs[i].noisy, &out.counts);
      for (auto& pair : wa.pairs) {
        if (drop_empty && (pair.clean.empty() || pair.noisy.empty())) continue;
        out.pairs.push_back(std::move(pair));
      }
    } catch (const std::exception& e) {
      out.skips.push_back({i, e.what()});
    }
  }
  return out;
}

}  // namespace noisycorpus
