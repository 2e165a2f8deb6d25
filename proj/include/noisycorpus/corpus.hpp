// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "noisycorpus/errors.hpp"
#include "noisycorpus/unicode.hpp"

namespace noisycorpus {

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

// Label grammar: "O" | "B-<type>" | "I-<type>" | bare tag (POS-style).
// Bare tags carry no span structure; their type is the tag itself.
struct LabelParts {
  enum Kind { Outside, Begin, Inside, Tag } kind = Outside;
  std::string type;  // empty for Outside
};

inline LabelParts parse_label(const std::string& label) {
  if (label == "O") return {LabelParts::Outside, ""};
  if (label.size() >= 2 && (label[0] == 'B' || label[0] == 'I') && label[1] == '-') {
    if (label.size() == 2)
      throw ValidationError("malformed label '" + label + "': empty type");
    return {label[0] == 'B' ? LabelParts::Begin : LabelParts::Inside, label.substr(2)};
  }
  if (label.empty()) throw ValidationError("empty label");
  return {LabelParts::Tag, label};
}

// Rewrites IOB1-style openers (I-X starting a span) to B-X. Idempotent.
inline std::vector<std::string> normalize_bio(const std::vector<std::string>& labels) {
  std::vector<std::string> out = labels;
  std::string prev_type;
  bool prev_in_span = false;
  for (auto& label : out) {
    LabelParts p = parse_label(label);
    if (p.kind == LabelParts::Inside) {
      if (!prev_in_span || prev_type != p.type) label = "B-" + p.type;
      prev_in_span = true;
      prev_type = p.type;
    } else if (p.kind == LabelParts::Begin) {
      prev_in_span = true;
      prev_type = p.type;
    } else {
      prev_in_span = false;
      prev_type.clear();
    }
  }
  return out;
}

// Continuation form of a label for noisy tokens split off an aligned word:
// B-X / I-X continue as I-X, everything else keeps its label.
inline std::string continuation_label(const std::string& label) {
  LabelParts p = parse_label(label);
  if (p.kind == LabelParts::Begin || p.kind == LabelParts::Inside) return "I-" + p.type;
  return label;
}

// ---------------------------------------------------------------------------
// Sentences and datasets
// ---------------------------------------------------------------------------

inline constexpr const char* kDocStart = "-DOCSTART-";

// Serialized form of the "no clean counterpart" source marker (the insertion
// placeholder of the alignment schema, written as a lone character).
inline const std::string kEmptySourceMarker = "¬";

// Validates a token surface: non-empty, no whitespace, no placeholders.
inline void validate_token(std::string_view surface, const std::string& where) {
  if (surface.empty()) throw ValidationError(where + ": empty token");
  std::u32string u = utf8_decode(surface);
  for (char32_t c : u) {
    if (is_whitespace(c)) throw ValidationError(where + ": token contains whitespace");
    if (is_placeholder(c))
      throw ValidationError(where + ": token contains reserved placeholder U+00AC/U+00A6");
  }
}

struct LabeledSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
  // Clean counterparts, same length as tokens when has_sources is set.
  // The empty string marks a token with no clean counterpart (insertion).
  std::vector<std::string> sources;
  bool has_sources = false;
  // Clean tokens whose noisy image was empty (deleted wholesale), with labels.
  std::vector<std::pair<std::string, std::string>> dropped;

  bool is_docstart() const { return !tokens.empty() && tokens[0] == kDocStart; }

  std::string text() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) out += ' ';
      out += tokens[i];
    }
    return out;
  }

  bool operator==(const LabeledSentence& other) const {
    return tokens == other.tokens && labels == other.labels &&
           sources == other.sources && has_sources == other.has_sources &&
           dropped == other.dropped;
  }
};

struct Dataset {
  std::vector<LabeledSentence> sentences;
  std::set<std::string> label_inventory;  // entity / tag types, "O" excluded

  bool operator==(const Dataset& other) const {
    return sentences == other.sentences && label_inventory == other.label_inventory;
  }
};

inline void add_to_inventory(std::set<std::string>& inv, const std::string& label) {
  LabelParts p = parse_label(label);
  if (p.kind != LabelParts::Outside) inv.insert(p.type);
}

struct ParallelPair {
  std::string clean;
  std::string noisy;
  bool operator==(const ParallelPair& other) const {
    return clean == other.clean && noisy == other.noisy;
  }
};

struct ParallelCorpus {
  std::vector<ParallelPair> pairs;
  bool operator==(const ParallelCorpus& other) const { return pairs == other.pairs; }
};

// ---------------------------------------------------------------------------
// CoNLL format
// ---------------------------------------------------------------------------

// Column selection for CoNLL files. Reads split on runs of tabs/spaces;
// writes emit a single tab between columns.
struct ColumnMap {
  int token = 0;
  int source = -1;  // optional clean-token column
  int label = 1;
};

namespace detail {

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') {
      std::string_view line = text.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.emplace_back(line);
      start = i + 1;
    }
  }
  if (start < text.size()) {
    std::string_view line = text.substr(start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
  }
  return lines;
}

inline std::vector<std::string> split_columns(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) cols.push_back(line.substr(start, i - start));
  }
  return cols;
}

inline bool is_blank(const std::string& line) {
  for (char c : line)
    if (c != ' ' && c != '\t') return false;
  return true;
}

}  // namespace detail

inline Dataset parse_conll(std::string_view text, const ColumnMap& map = {}) {
  Dataset ds;
  int max_col = std::max(map.token, std::max(map.source, map.label));
  LabeledSentence cur;
  bool source_column = map.source >= 0;
  cur.has_sources = source_column;

  auto flush = [&](std::size_t line_no) {
    if (cur.tokens.empty()) return;
    try {
      cur.labels = normalize_bio(cur.labels);
    } catch (const ValidationError& e) {
      throw ValidationError("sentence ending at line " + std::to_string(line_no) + ": " +
                            e.what());
    }
    for (const auto& label : cur.labels) add_to_inventory(ds.label_inventory, label);
    ds.sentences.push_back(std::move(cur));
    cur = LabeledSentence{};
    cur.has_sources = source_column;
  };

  std::vector<std::string> lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (detail::is_blank(line)) {
      flush(ln);  // ln is 0-based; the sentence ended on the previous line
      continue;
    }
    std::vector<std::string> cols = detail::split_columns(line);
    if (static_cast<int>(cols.size()) <= max_col)
      throw ParseError("line " + std::to_string(ln + 1) + ": expected at least " +
                       std::to_string(max_col + 1) + " columns, got " +
                       std::to_string(cols.size()));
    const std::string& where = "line " + std::to_string(ln + 1);
    validate_token(cols[map.token], where);
    cur.tokens.push_back(cols[map.token]);
    cur.labels.push_back(cols[map.label]);
    if (source_column) {
      const std::string& src = cols[map.source];
      if (src == kEmptySourceMarker) {
        cur.sources.emplace_back();
      } else {
        validate_token(src, where);
        cur.sources.push_back(src);
      }
    }
  }
  flush(lines.size());
  return ds;
}

inline std::string write_conll(const Dataset& ds, const ColumnMap& map = {}) {
  // Columns are laid out at the positions the map names; the writer refuses
  // maps asking for a source column the data does not carry.
  int max_col = std::max(map.token, std::max(map.source, map.label));
  std::string out;
  bool first_sentence = true;
  for (const auto& sent : ds.sentences) {
    if (!first_sentence) out += '\n';
    first_sentence = false;
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      std::vector<std::string> cols(static_cast<std::size_t>(max_col) + 1);
      cols[static_cast<std::size_t>(map.token)] = sent.tokens[i];
      cols[static_cast<std::size_t>(map.label)] = sent.labels[i];
      if (map.source >= 0) {
        if (!sent.has_sources)
          throw ValidationError("column map names a source column but the dataset has none");
        cols[static_cast<std::size_t>(map.source)] =
            sent.sources[i].empty() ? kEmptySourceMarker : sent.sources[i];
      }
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out += '\t';
        out += cols[c];
      }
      out += '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parallel TSV format: one "clean TAB noisy" pair per line, UTF-8, LF.
// ---------------------------------------------------------------------------

inline ParallelCorpus parse_parallel(std::string_view text) {
  ParallelCorpus corpus;
  std::vector<std::string> lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("line " + std::to_string(ln + 1) + ": expected one tab separator");
    if (line.find('\t', tab + 1) != std::string::npos)
      throw ParseError("line " + std::to_string(ln + 1) + ": more than one tab separator");
    ParallelPair pair{line.substr(0, tab), line.substr(tab + 1)};
    if (contains_placeholder(pair.clean) || contains_placeholder(pair.noisy))
      throw ValidationError("line " + std::to_string(ln + 1) +
                            ": reserved placeholder U+00AC/U+00A6 in parallel text");
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

inline std::string write_parallel(const ParallelCorpus& corpus) {
  std::string out;
  for (const auto& pair : corpus.pairs) {
    out += pair.clean;
    out += '\t';
    out += pair.noisy;
    out += '\n';
  }
  return out;
}

// Noisy-side projection, used as the NLM pre-training corpus export.
inline std::vector<std::string> extract_target_side(const ParallelCorpus& corpus) {
  std::vector<std::string> out;
  out.reserve(corpus.pairs.size());
  for (const auto& pair : corpus.pairs) out.push_back(pair.noisy);
  return out;
}

}  // namespace noisycorpus
