// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <string>

#include <json.hpp>

#include "noisycorpus/errors.hpp"
#include "noisycorpus/noise.hpp"
#include "noisycorpus/unicode.hpp"

namespace noisycorpus {

// Versioned JSON model documents. Probabilities are emitted as plain JSON
// numbers; the serializer produces shortest round-trip representations, so
// save/load reproduces every double bit-exactly and a loaded document dumps
// back byte-identically.

inline constexpr const char* kModelFormat = "noisycorpus-model";
inline constexpr int kModelVersion = 1;

namespace detail {

inline nlohmann::json alphabet_to_json(const Alphabet& a) {
  return utf8_encode(std::u32string(a.chars.begin(), a.chars.end()));
}

inline Alphabet alphabet_from_json(const nlohmann::json& j) {
  return Alphabet::from_utf8(j.get<std::string>());
}

inline nlohmann::json char_distribution_to_json(const CharDistribution& d) {
  return nlohmann::json{{"keep", d.keep}, {"delete", d.del}, {"subst", d.subst}};
}

inline CharDistribution char_distribution_from_json(const nlohmann::json& j) {
  CharDistribution d;
  d.keep = j.at("keep").get<double>();
  d.del = j.at("delete").get<double>();
  d.subst = j.at("subst").get<std::vector<double>>();
  return d;
}

inline nlohmann::json channel_row_to_json(const ChannelRow& r) {
  return nlohmann::json{
      {"keep", r.keep}, {"delete", r.del}, {"subst", r.subst}, {"ins", r.ins}};
}

inline ChannelRow channel_row_from_json(const nlohmann::json& j) {
  ChannelRow r;
  r.keep = j.at("keep").get<double>();
  r.del = j.at("delete").get<double>();
  r.subst = j.at("subst").get<std::vector<double>>();
  r.ins = j.at("ins").get<std::vector<double>>();
  return r;
}

inline nlohmann::json header(const char* kind) {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = kind;
  return j;
}

inline void check_header(const nlohmann::json& j, const char* expect_kind = nullptr) {
  if (j.value("format", "") != kModelFormat)
    throw ParseError("not a noisycorpus model document");
  if (j.value("version", 0) != kModelVersion)
    throw ParseError("unsupported model version " + std::to_string(j.value("version", 0)));
  if (expect_kind && j.value("kind", "") != expect_kind)
    throw ParseError("expected model kind '" + std::string(expect_kind) + "', got '" +
                     j.value("kind", "") + "'");
}

}  // namespace detail

inline nlohmann::json model_to_json(const VanillaModel& m) {
  nlohmann::json j = detail::header("vanilla");
  j["eta"] = m.eta();
  j["alphabet"] = detail::alphabet_to_json(m.alphabet());
  return j;
}

inline nlohmann::json model_to_json(const ConfusionModel& m) {
  nlohmann::json j = detail::header("confusion");
  j["alphabet"] = detail::alphabet_to_json(m.alphabet);
  j["smoothing_k"] = m.smoothing_k;
  j["ins_rate"] = m.ins_rate;
  j["ins_dist"] = m.ins_dist;
  nlohmann::json rows = nlohmann::json::object();
  for (std::size_t i = 0; i < m.alphabet.size(); ++i)
    rows[utf8_encode(m.alphabet.chars[i])] = detail::char_distribution_to_json(m.rows[i]);
  j["rows"] = std::move(rows);
  j["oov_row"] = detail::char_distribution_to_json(m.oov_row);
  return j;
}

inline nlohmann::json model_to_json(const ChannelModel& m) {
  nlohmann::json j = detail::header("channel");
  j["alphabet"] = detail::alphabet_to_json(m.alphabet);
  j["order"] = m.order;
  j["smoothing_k"] = m.smoothing_k;
  j["intensity_bins"] = m.intensity_bins;
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : m.levels) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [key, row] : level) {
      // key = context chars + current char; the end sentinel serializes as "".
      std::u32string ctx = key.substr(0, key.size() - 1);
      char32_t cur = key.back();
      rows.push_back(nlohmann::json{
          {"ctx", utf8_encode(ctx)},
          {"char", cur == kEndOfSentence ? std::string() : utf8_encode(cur)},
          {"row", detail::channel_row_to_json(row)}});
    }
    levels.push_back(std::move(rows));
  }
  j["levels"] = std::move(levels);
  j["oov_row"] = detail::channel_row_to_json(m.oov_row);
  return j;
}

inline nlohmann::json model_to_json(const NoiseModel& m) {
  return std::visit([](const auto& model) { return model_to_json(model); }, m);
}

inline VanillaModel vanilla_from_json(const nlohmann::json& j) {
  detail::check_header(j, "vanilla");
  return VanillaModel(j.at("eta").get<double>(), detail::alphabet_from_json(j.at("alphabet")));
}

inline ConfusionModel confusion_from_json(const nlohmann::json& j) {
  detail::check_header(j, "confusion");
  ConfusionModel m;
  m.alphabet = detail::alphabet_from_json(j.at("alphabet"));
  m.smoothing_k = j.at("smoothing_k").get<double>();
  m.ins_rate = j.at("ins_rate").get<double>();
  m.ins_dist = j.at("ins_dist").get<std::vector<double>>();
  m.rows.resize(m.alphabet.size());
  for (const auto& [key, value] : j.at("rows").items()) {
    std::u32string c = utf8_decode(key);
    if (c.size() != 1) throw ParseError("confusion row key must be one character");
    std::ptrdiff_t idx = m.alphabet.index_of(c[0]);
    if (idx < 0) throw ParseError("confusion row for character outside the alphabet");
    m.rows[static_cast<std::size_t>(idx)] = detail::char_distribution_from_json(value);
  }
  m.oov_row = detail::char_distribution_from_json(j.at("oov_row"));
  return m;
}

inline ChannelModel channel_from_json(const nlohmann::json& j) {
  detail::check_header(j, "channel");
  ChannelModel m;
  m.alphabet = detail::alphabet_from_json(j.at("alphabet"));
  m.order = j.at("order").get<int>();
  m.smoothing_k = j.at("smoothing_k").get<double>();
  auto bins = j.at("intensity_bins").get<std::vector<double>>();
  if (bins.size() != 10) throw ParseError("intensity_bins must have 10 entries");
  std::copy(bins.begin(), bins.end(), m.intensity_bins.begin());
  m.levels.resize(j.at("levels").size());
  for (std::size_t l = 0; l < m.levels.size(); ++l) {
    for (const auto& entry : j.at("levels")[l]) {
      std::u32string key = utf8_decode(entry.at("ctx").get<std::string>());
      std::string cur = entry.at("char").get<std::string>();
      if (cur.empty()) {
        key.push_back(kEndOfSentence);
      } else {
        std::u32string c = utf8_decode(cur);
        if (c.size() != 1) throw ParseError("channel row char must be one character");
        key.push_back(c[0]);
      }
      m.levels[l].emplace(std::move(key), detail::channel_row_from_json(entry.at("row")));
    }
  }
  m.oov_row = detail::channel_row_from_json(j.at("oov_row"));
  return m;
}

inline NoiseModel model_from_json(const nlohmann::json& j) {
  detail::check_header(j);
  std::string kind = j.value("kind", "");
  if (kind == "vanilla") return vanilla_from_json(j);
  if (kind == "confusion") return confusion_from_json(j);
  if (kind == "channel") return channel_from_json(j);
  throw ParseError("unknown model kind '" + kind + "'");
}

inline std::string model_to_string(const NoiseModel& m) { return model_to_json(m).dump(2) + "\n"; }

inline NoiseModel model_from_string(const std::string& text) {
  return model_from_json(nlohmann::json::parse(text));
}

}  // namespace noisycorpus
