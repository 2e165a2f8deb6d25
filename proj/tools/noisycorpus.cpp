// Apache License, Version 2.0, refer to LICENSE.txt
//
// noisycorpus: model, inject and measure character-level noise in
// sequence-labeling corpora. One binary, one subcommand per pipeline stage;
// identical (subcommand, config, seed, inputs) produce byte-identical
// outputs.

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisycorpus/align.hpp"
#include "noisycorpus/corpus.hpp"
#include "noisycorpus/metrics.hpp"
#include "noisycorpus/model_io.hpp"
#include "noisycorpus/noise.hpp"
#include "noisycorpus/pipeline.hpp"
#include "noisycorpus/rng.hpp"
#include "noisycorpus/subprocess.hpp"

using nlohmann::json;
using namespace noisycorpus;

namespace {

// ---------------------------------------------------------------------------
// File and formatting helpers
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Atomic write: temp file next to the target, then rename.
void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw IoError("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

// Atomic write to the given path, or stdout when the path is empty.
void emit(const std::string& path, const std::string& content) {
  if (path.empty())
    std::cout << content;
  else
    write_file_atomic(path, content);
}

std::vector<std::string> split_lines_keep(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') {
      std::size_t end = i;
      if (end > start && text[end - 1] == '\r') --end;
      lines.emplace_back(text.substr(start, end - start));
      start = i + 1;
    }
  }
  if (start < text.size()) lines.emplace_back(text.substr(start));
  return lines;
}

std::vector<std::string> read_lines(const std::string& path) {
  return split_lines_keep(read_file(path));
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Configuration resolution: explicit flag > --config JSON > environment
// ---------------------------------------------------------------------------

struct RunContext {
  CLI::App* cmd = nullptr;
  json config = json::object();
  json resolved = json::object();

  template <typename T>
  T get(const std::string& flag, const std::string& key, T cli_value) {
    T value = cli_value;
    if (cmd->count(flag) == 0 && config.contains(key)) value = config.at(key).get<T>();
    resolved[key] = value;
    return value;
  }

  std::uint64_t seed(const std::string& flag, std::uint64_t cli_value) {
    std::uint64_t value = cli_value;
    if (cmd->count(flag) == 0) {
      if (config.contains("seed")) {
        value = config.at("seed").get<std::uint64_t>();
      } else if (const char* env = std::getenv("NOISYCORPUS_SEED")) {
        value = std::strtoull(env, nullptr, 10);
      }
    }
    resolved["seed"] = value;
    return value;
  }
};

// Run manifest on stderr: subcommand, resolved-config hash, seed, counts.
void print_manifest(const std::string& subcommand, const RunContext& ctx, const json& counts) {
  json manifest;
  manifest["subcommand"] = subcommand;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(ctx.resolved.dump())));
  manifest["config_hash"] = hash;
  if (ctx.resolved.contains("seed")) manifest["seed"] = ctx.resolved["seed"];
  manifest["counts"] = counts;
  std::cerr << manifest.dump() << "\n";
}

// ---------------------------------------------------------------------------
// Degrader construction from a JSON spec ("@file.json" loads from disk)
// ---------------------------------------------------------------------------

IntensitySpec intensity_from_json(const json& j) {
  IntensitySpec spec;
  std::string type = j.value("type", "constant");
  if (type == "constant") {
    spec.type = IntensitySpec::Type::Constant;
    spec.rate = j.at("rate").get<double>();
    if (!(spec.rate >= 0.0 && spec.rate <= 1.0))
      throw ValidationError("intensity rate must lie in [0, 1]");
  } else if (type == "geometric") {
    spec.type = IntensitySpec::Type::Geometric;
    spec.q = j.value("q", 0.5);
    spec.max_bin = j.value("max_bin", 9);
    if (!(spec.q > 0.0 && spec.q <= 1.0) || spec.max_bin < 0 || spec.max_bin > 9)
      throw ValidationError("geometric intensity needs q in (0, 1] and max_bin in [0, 9]");
  } else if (type == "bins") {
    spec.type = IntensitySpec::Type::Bins;
    auto masses = j.at("masses").get<std::vector<double>>();
    if (masses.size() != 10) throw ValidationError("intensity masses must have 10 entries");
    std::copy(masses.begin(), masses.end(), spec.masses.begin());
  } else {
    throw ValidationError("unknown intensity type '" + type + "'");
  }
  return spec;
}

std::unique_ptr<Degrader> degrader_from_spec(const std::string& spec_text, std::uint64_t seed) {
  std::string text = spec_text;
  if (!text.empty() && text[0] == '@') text = read_file(text.substr(1));
  json j = json::parse(text);
  std::string kind = j.value("kind", "");
  if (kind == "builtin")
    return std::make_unique<BuiltinDegrader>(intensity_from_json(j.at("intensity")), seed);
  if (kind == "model") {
    if (j.contains("path")) {
      NoiseModel model = model_from_string(read_file(j.at("path").get<std::string>()));
      return std::make_unique<ModelDegrader>(std::move(model), seed);
    }
    if (j.contains("vanilla_eta")) {
      std::string sigma = j.value(
          "alphabet", "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ");
      return std::make_unique<ModelDegrader>(
          vanilla_from_eta(j.at("vanilla_eta").get<double>(), Alphabet::from_utf8(sigma)),
          seed);
    }
    throw ValidationError("model degrader needs 'path' or 'vanilla_eta'");
  }
  if (kind == "external") {
    ExternalGenerator gen;
    gen.command.argv = j.at("command").get<std::vector<std::string>>();
    gen.command.timeout = std::chrono::milliseconds(j.value("timeout_ms", 60000));
    gen.mode = j.value("mode", "sentence") == "token" ? ExternalGenerator::Mode::Token
                                                      : ExternalGenerator::Mode::Sentence;
    return std::make_unique<ExternalDegrader>(std::move(gen));
  }
  throw ValidationError("unknown degrader kind '" + kind + "' (builtin|model|external)");
}

// Shards the batch over N workers. External degraders get one child process
// per shard; seeded degraders are index-keyed, so results match --jobs 1.
std::vector<DegradeOutcome> degrade_parallel(Degrader& degrader,
                                             const std::vector<std::string>& inputs,
                                             int jobs) {
  if (jobs <= 1 || inputs.size() < 2) return degrader.degrade(inputs, 0);
  std::size_t shards = std::min<std::size_t>(static_cast<std::size_t>(jobs), inputs.size());
  std::vector<DegradeOutcome> out(inputs.size());
  std::vector<std::thread> threads;
  std::vector<std::string> errors(shards);
  std::size_t chunk = (inputs.size() + shards - 1) / shards;
  for (std::size_t t = 0; t < shards; ++t) {
    threads.emplace_back([&, t] {
      std::size_t begin = t * chunk;
      std::size_t end = std::min(inputs.size(), begin + chunk);
      if (begin >= end) return;
      try {
        std::vector<std::string> shard(inputs.begin() + static_cast<std::ptrdiff_t>(begin),
                                       inputs.begin() + static_cast<std::ptrdiff_t>(end));
        std::vector<DegradeOutcome> part = degrader.degrade(shard, begin);
        for (std::size_t i = 0; i < part.size(); ++i) out[begin + i] = std::move(part[i]);
      } catch (const std::exception& e) {
        errors[t] = e.what();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& err : errors)
    if (!err.empty()) throw ProcessError(err);
  return out;
}

json skips_to_json(const std::vector<SkipRecord>& skips) {
  json arr = json::array();
  for (const auto& s : skips) arr.push_back({{"index", s.index}, {"reason", s.reason}});
  return arr;
}

json skips_to_json(const std::vector<PairSkip>& skips) {
  json arr = json::array();
  for (const auto& s : skips) arr.push_back({{"index", s.index}, {"reason", s.reason}});
  return arr;
}

NoiseModel load_model_flag(const std::string& model, double eta, std::size_t eta_count,
                           const std::vector<std::string>& alphabet_source) {
  if (model == "vanilla") {
    if (eta_count == 0)
      throw ValidationError("--model vanilla requires --eta (the rate has no default)");
    // Alphabet: the input's characters joined with a lowercase+space base, so
    // tiny inputs still satisfy the |Sigma| >= 2 invariant deterministically.
    std::u32string chars = utf8_decode("abcdefghijklmnopqrstuvwxyz ");
    for (const auto& line : alphabet_source) chars += utf8_decode(line);
    return vanilla_from_eta(eta, Alphabet::from_chars(chars));
  }
  return model_from_string(read_file(model));
}

std::string histogram_csv(const ErrorHistogram& h) {
  std::string out = "bin,percentage\n";
  for (int b = 0; b < 10; ++b) {
    char line[64];
    std::snprintf(line, sizeof line, "%d,%.6f\n", (b + 1) * 10,
                  h.bins[static_cast<std::size_t>(b)]);
    out += line;
  }
  return out;
}

json histogram_json(const ErrorHistogram& h) {
  json bins = json::array();
  for (int b = 0; b < 10; ++b)
    bins.push_back(
        {{"bin", (b + 1) * 10}, {"percentage", h.bins[static_cast<std::size_t>(b)]}});
  return bins;
}

std::vector<double> read_scores(const std::string& path) {
  std::vector<double> xs;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    xs.push_back(std::stod(line));
  }
  return xs;
}

// Noises a list of sentences with per-line derived seeds, optionally in
// parallel; output order is input order no matter the job count.
std::vector<std::string> perturb_lines(const NoiseModel& model,
                                       const std::vector<std::string>& lines,
                                       std::uint64_t seed, int jobs, bool token_level) {
  std::vector<std::string> out(lines.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (token_level) {
        std::vector<std::string> words = split_words_utf8(lines[i]);
        std::string joined;
        for (std::size_t w = 0; w < words.size(); ++w) {
          std::string noisy = perturb_token(model, words[w], mix_seed(seed, i, w));
          if (noisy.empty()) continue;
          if (!joined.empty()) joined += ' ';
          joined += noisy;
        }
        out[i] = joined;
      } else {
        out[i] = perturb(model, lines[i], mix_seed(seed, i));
      }
    }
  };
  if (jobs <= 1 || lines.size() < 2) {
    work(0, lines.size());
    return out;
  }
  std::size_t shards = std::min<std::size_t>(static_cast<std::size_t>(jobs), lines.size());
  std::size_t chunk = (lines.size() + shards - 1) / shards;
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < shards; ++t)
    threads.emplace_back(
        [&, t] { work(t * chunk, std::min(lines.size(), (t + 1) * chunk)); });
  for (auto& th : threads) th.join();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"character-level noise modeling, injection and measurement for "
               "sequence-labeling corpora"};
  app.require_subcommand(1);

  std::string config_path;

  // Shared flag storage (each subcommand binds the ones it uses).
  std::string in_path, out_path, report_path, parallel_path, model_path = "vanilla";
  std::string degrader_spec, table_path, command_str, gold_path, pred_path;
  std::string pairs_out, json_out, histogram_out, word_pairs_path;
  std::string scores_path, scores_b_path, task = "ner", mode = "token";
  double eta = 0.0, smoothing_k = 0.1, p_replace = 0.1;
  std::uint64_t seed_flag = 1, epoch = 1;
  int order = 3, jobs = 1, timeout_ms = 60000;
  int token_col = 0, source_col = -1, label_col = 1;
  bool drop_empty = false, fold_case = false, token_level = false;

  auto add_columns = [&](CLI::App* cmd, int def_token, int def_source, int def_label) {
    token_col = def_token;
    source_col = def_source;
    label_col = def_label;
    cmd->add_option("--token-col", token_col, "column of the token surface");
    cmd->add_option("--source-col", source_col,
                    "column of the clean counterpart (-1: absent)");
    cmd->add_option("--label-col", label_col, "column of the BIO/tag label");
  };

  CLI::App* align_cmd = app.add_subcommand(
      "align", "align a parallel corpus at the word level and extract word pairs");
  align_cmd->add_option("--parallel", parallel_path, "clean TAB noisy corpus")->required();
  align_cmd->add_option("--pairs-out", pairs_out, "word-pair TSV output");
  align_cmd->add_option("--report-out", report_path, "alignment report JSON");
  align_cmd->add_flag("--drop-empty", drop_empty, "omit pairs with an empty side");

  CLI::App* estimate_cmd = app.add_subcommand(
      "estimate", "estimate a confusion-matrix error model from aligned pairs");
  estimate_cmd->add_option("--parallel", parallel_path, "clean TAB noisy sentence corpus");
  estimate_cmd->add_option("--word-pairs", word_pairs_path, "clean TAB noisy word pairs");
  estimate_cmd->add_option("--smoothing-k", smoothing_k, "add-k row smoothing mass");
  estimate_cmd->add_option("--out", out_path, "model JSON output");

  CLI::App* train_cmd = app.add_subcommand(
      "train-channel", "train the context-conditioned channel error model");
  train_cmd->add_option("--parallel", parallel_path, "clean TAB noisy corpus")->required();
  train_cmd->add_option("--order", order, "context length (0..4)");
  train_cmd->add_option("--smoothing-k", smoothing_k, "add-k row smoothing mass");
  train_cmd->add_option("--out", out_path, "model JSON output");

  CLI::App* noise_cmd =
      app.add_subcommand("noise", "noise plain sentences (one per line) with a model");
  noise_cmd->add_option("input", in_path, "input text file")->required();
  noise_cmd->add_option("--model", model_path, "'vanilla' or a model JSON path");
  noise_cmd->add_option("--eta", eta, "vanilla noising factor in [0,1]");
  noise_cmd->add_option("--seed", seed_flag, "base seed");
  noise_cmd->add_option("--jobs", jobs, "worker threads");
  noise_cmd->add_flag("--token-level", token_level, "perturb each token independently");
  noise_cmd->add_option("--out", out_path, "output file (default: stdout)");

  CLI::App* gen_cmd = app.add_subcommand(
      "gen-parallel", "degrade seed sentences into a parallel corpus");
  gen_cmd->add_option("--input", in_path, "seed sentences, one per line")->required();
  gen_cmd->add_option("--degrader", degrader_spec, "degrader JSON spec or @file")->required();
  gen_cmd->add_option("--seed", seed_flag, "base seed");
  gen_cmd->add_option("--jobs", jobs, "worker threads / child processes");
  gen_cmd->add_option("--out", out_path, "parallel TSV output");
  gen_cmd->add_option("--report-out", report_path, "generation report JSON");

  CLI::App* synth_cmd = app.add_subcommand(
      "synth-benchmark", "degrade a labeled dataset and transfer its labels");
  synth_cmd->add_option("--input", in_path, "CoNLL input")->required();
  add_columns(synth_cmd, 0, -1, 1);
  synth_cmd->add_option("--degrader", degrader_spec, "degrader JSON spec or @file")->required();
  synth_cmd->add_option("--seed", seed_flag, "base seed");
  synth_cmd->add_option("--jobs", jobs, "worker threads / child processes");
  synth_cmd->add_option("--out", out_path, "noisy CoNLL output (noisy, clean, label)");
  synth_cmd->add_option("--report-out", report_path, "synthesis report JSON");

  CLI::App* typos_cmd = app.add_subcommand(
      "induce-typos", "replace tokens using a misspelling lookup table");
  typos_cmd->add_option("--input", in_path, "CoNLL input")->required();
  add_columns(typos_cmd, 0, -1, 1);
  typos_cmd->add_option("--table", table_path, "word TAB candidate... TSV")->required();
  typos_cmd->add_option("--p-replace", p_replace, "replacement probability");
  typos_cmd->add_option("--seed", seed_flag, "base seed");
  typos_cmd->add_option("--out", out_path, "noisy CoNLL output (noisy, clean, label)");

  CLI::App* augment_cmd = app.add_subcommand(
      "augment", "emit the noisy copy of a dataset for one training epoch");
  augment_cmd->add_option("--input", in_path, "CoNLL input")->required();
  add_columns(augment_cmd, 0, -1, 1);
  augment_cmd->add_option("--model", model_path, "'vanilla' or a model JSON path");
  augment_cmd->add_option("--eta", eta, "vanilla noising factor in [0,1]");
  augment_cmd->add_option("--base-seed,--seed", seed_flag, "base seed");
  augment_cmd->add_option("--epoch", epoch, "epoch number");
  augment_cmd->add_option("--mode", mode, "token | sentence")
      ->check(CLI::IsMember({"token", "sentence"}));
  augment_cmd->add_option("--out", out_path, "noisy CoNLL output (noisy, clean, label)");

  CLI::App* correct_cmd = app.add_subcommand(
      "correct", "run an external corrector over a noisy dataset");
  correct_cmd->add_option("--input", in_path, "CoNLL input")->required();
  add_columns(correct_cmd, 0, -1, 1);
  correct_cmd->add_option("--command", command_str, "corrector shell command")->required();
  correct_cmd->add_option("--timeout-ms", timeout_ms, "inactivity timeout");
  correct_cmd->add_option("--out", out_path, "corrected CoNLL output");

  CLI::App* stats_cmd = app.add_subcommand(
      "stats", "token error rates and error-rate histograms");
  stats_cmd->add_option("--input", in_path, "CoNLL input with a source column");
  int stats_token_col = 0, stats_source_col = 1, stats_label_col = 2;
  stats_cmd->add_option("--token-col", stats_token_col, "column of the token surface");
  stats_cmd->add_option("--source-col", stats_source_col,
                        "column of the clean counterpart (-1: absent)");
  stats_cmd->add_option("--label-col", stats_label_col, "column of the BIO/tag label");
  stats_cmd->add_option("--parallel", parallel_path, "clean TAB noisy corpus");
  stats_cmd->add_flag("--fold-case", fold_case, "compare tokens case-insensitively");
  stats_cmd->add_option("--histogram-out", histogram_out, "histogram CSV output");
  stats_cmd->add_option("--json-out", json_out, "stats JSON output (default: stdout)");

  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "evaluate predictions or summarize score lists");
  eval_cmd->add_option("--gold", gold_path, "gold CoNLL");
  eval_cmd->add_option("--pred", pred_path, "predicted CoNLL");
  add_columns(eval_cmd, 0, -1, 1);
  eval_cmd->add_option("--task", task, "ner | pos")->check(CLI::IsMember({"ner", "pos"}));
  eval_cmd->add_option("--summarize", scores_path, "score list file: mean and stddev");
  eval_cmd->add_option("--welch-a", scores_path, "sample A for Welch's t-test");
  eval_cmd->add_option("--welch-b", scores_b_path, "sample B for Welch's t-test");
  eval_cmd->add_option("--json-out", json_out, "result JSON output (default: stdout)");

  CLI::App* export_cmd = app.add_subcommand(
      "export-nlm-corpus", "export the noisy side of a parallel corpus");
  export_cmd->add_option("--parallel", parallel_path, "clean TAB noisy corpus")->required();
  export_cmd->add_option("--out", out_path, "text output, one sentence per line");

  for (CLI::App* sub : app.get_subcommands(nullptr))
    sub->add_option("--config", config_path, "JSON config supplying flag defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  RunContext ctx;
  try {
    if (!config_path.empty()) ctx.config = json::parse(read_file(config_path));

    if (app.got_subcommand(align_cmd)) {
      ctx.cmd = align_cmd;
      bool de = align_cmd->count("--drop-empty") ? drop_empty
                                                 : ctx.config.value("drop_empty", false);
      ctx.resolved["drop_empty"] = de;
      ParallelCorpus corpus = parse_parallel(read_file(parallel_path));
      WordPairExtraction ex = extract_word_pairs(corpus, de);
      std::string tsv;
      std::size_t inserted = 0, dropped = 0;
      for (const auto& p : ex.pairs) {
        if (p.clean.empty()) ++inserted;
        if (p.noisy.empty()) ++dropped;
        tsv += p.clean.empty() ? "¬" : p.clean;
        tsv += '\t';
        tsv += p.noisy.empty() ? "¦" : p.noisy;
        tsv += '\n';
      }
      emit(pairs_out, tsv);
      json report;
      report["pairs"] = ex.pairs.size();
      report["matches"] = ex.counts.matches;
      report["substitutions"] = ex.counts.substitutions;
      report["insertions"] = ex.counts.insertions;
      report["deletions"] = ex.counts.deletions;
      report["inserted_words"] = inserted;
      report["dropped_words"] = dropped;
      report["skipped_pairs"] = skips_to_json(ex.skips);
      if (!report_path.empty()) write_file_atomic(report_path, report.dump(2) + "\n");
      print_manifest("align", ctx,
                     {{"input_pairs", corpus.pairs.size()}, {"word_pairs", ex.pairs.size()}});
      return 0;
    }

    if (app.got_subcommand(estimate_cmd)) {
      ctx.cmd = estimate_cmd;
      double k = ctx.get("--smoothing-k", "smoothing_k", smoothing_k);
      std::vector<AlignedWordPair> pairs;
      const std::string& source = !word_pairs_path.empty() ? word_pairs_path : parallel_path;
      if (source.empty())
        throw ValidationError("estimate needs --parallel or --word-pairs");
      for (const auto& pp : parse_parallel(read_file(source)).pairs)
        pairs.push_back({pp.clean, pp.noisy});
      ConfusionModel model = estimate_confusion(pairs, k);
      emit(out_path, model_to_string(model));
      print_manifest("estimate", ctx,
                     {{"pairs", pairs.size()}, {"alphabet", model.alphabet.size()}});
      return 0;
    }

    if (app.got_subcommand(train_cmd)) {
      ctx.cmd = train_cmd;
      int n = ctx.get("--order", "order", order);
      double k = ctx.get("--smoothing-k", "smoothing_k", smoothing_k);
      ParallelCorpus corpus = parse_parallel(read_file(parallel_path));
      ChannelModel model = train_channel(corpus, n, k);
      std::size_t rows = 0;
      for (const auto& level : model.levels) rows += level.size();
      emit(out_path, model_to_string(model));
      print_manifest("train-channel", ctx,
                     {{"pairs", corpus.pairs.size()}, {"rows", rows}});
      return 0;
    }

    if (app.got_subcommand(noise_cmd)) {
      ctx.cmd = noise_cmd;
      std::uint64_t seed = ctx.seed("--seed", seed_flag);
      int njobs = ctx.get("--jobs", "jobs", jobs);
      std::string model_arg = ctx.get("--model", "model", model_path);
      double eta_v = ctx.get("--eta", "eta", eta);
      std::vector<std::string> lines = read_lines(in_path);
      NoiseModel model = load_model_flag(model_arg, eta_v, noise_cmd->count("--eta") +
                                             (ctx.config.contains("eta") ? 1u : 0u), lines);
      std::vector<std::string> noisy = perturb_lines(model, lines, seed, njobs, token_level);
      emit(out_path, join_lines(noisy));
      print_manifest("noise", ctx, {{"sentences", lines.size()}});
      return 0;
    }

    if (app.got_subcommand(gen_cmd)) {
      ctx.cmd = gen_cmd;
      std::uint64_t seed = ctx.seed("--seed", seed_flag);
      int njobs = ctx.get("--jobs", "jobs", jobs);
      std::string spec = ctx.get("--degrader", "degrader", degrader_spec);
      ctx.resolved["degrader"] = spec;
      std::vector<std::string> lines = read_lines(in_path);
      std::unique_ptr<Degrader> degrader = degrader_from_spec(spec, seed);
      GenerateReport report;
      ParallelCorpus corpus;
      {
        // placeholder screening mirrors generate_parallel, then shard
        std::vector<std::string> inputs;
        std::vector<std::size_t> positions;
        for (std::size_t i = 0; i < lines.size(); ++i) {
          if (contains_placeholder(lines[i])) {
            report.skips.push_back({i, "reserved placeholder in input"});
            continue;
          }
          inputs.push_back(lines[i]);
          positions.push_back(i);
        }
        std::vector<DegradeOutcome> outcomes = degrade_parallel(*degrader, inputs, njobs);
        for (std::size_t k = 0; k < outcomes.size(); ++k) {
          if (!outcomes[k].ok) {
            report.skips.push_back({positions[k], outcomes[k].error});
            continue;
          }
          corpus.pairs.push_back({inputs[k], outcomes[k].text});
          ++report.generated;
        }
      }
      emit(out_path, write_parallel(corpus));
      if (!report_path.empty()) {
        json r;
        r["generated"] = report.generated;
        r["skipped"] = skips_to_json(report.skips);
        write_file_atomic(report_path, r.dump(2) + "\n");
      }
      print_manifest("gen-parallel", ctx,
                     {{"sentences", lines.size()},
                      {"generated", report.generated},
                      {"skipped", report.skips.size()}});
      return 0;
    }

    if (app.got_subcommand(synth_cmd)) {
      ctx.cmd = synth_cmd;
      std::uint64_t seed = ctx.seed("--seed", seed_flag);
      int njobs = ctx.get("--jobs", "jobs", jobs);
      std::string spec = ctx.get("--degrader", "degrader", degrader_spec);
      ctx.resolved["degrader"] = spec;
      ColumnMap in_map{token_col, source_col, label_col};
      Dataset clean = parse_conll(read_file(in_path), in_map);
      std::unique_ptr<Degrader> base = degrader_from_spec(spec, seed);
      // Wrap the degrader so synthesis can still shard via degrade_parallel.
      class Sharded : public Degrader {
      public:
        Sharded(Degrader& inner, int jobs) : inner_(inner), jobs_(jobs) {}
        std::vector<DegradeOutcome> degrade(const std::vector<std::string>& in,
                                            std::size_t first) override {
          if (first != 0) return inner_.degrade(in, first);
          return degrade_parallel(inner_, in, jobs_);
        }

      private:
        Degrader& inner_;
        int jobs_;
      } sharded(*base, njobs);
      SynthReport report;
      Dataset noisy = synth_benchmark(clean, sharded, &report);
      emit(out_path, write_conll(noisy, ColumnMap{0, 1, 2}));
      if (!report_path.empty()) {
        json r;
        r["ter"] = report.ter;
        r["sentences"] = report.sentences;
        r["dropped_tokens"] = report.dropped_tokens;
        r["merged_tokens"] = report.merged_tokens;
        r["inserted_tokens"] = report.inserted_tokens;
        r["skipped"] = skips_to_json(report.skips);
        write_file_atomic(report_path, r.dump(2) + "\n");
      }
      print_manifest("synth-benchmark", ctx,
                     {{"sentences", clean.sentences.size()},
                      {"kept", report.sentences},
                      {"dropped_tokens", report.dropped_tokens}});
      return 0;
    }

    if (app.got_subcommand(typos_cmd)) {
      ctx.cmd = typos_cmd;
      std::uint64_t seed = ctx.seed("--seed", seed_flag);
      double p = ctx.get("--p-replace", "p_replace", p_replace);
      ColumnMap in_map{token_col, source_col, label_col};
      Dataset clean = parse_conll(read_file(in_path), in_map);
      MisspellingTable table = MisspellingTable::parse_tsv(read_file(table_path));
      Dataset noisy = induce_misspellings(clean, table, p, seed);
      emit(out_path, write_conll(noisy, ColumnMap{0, 1, 2}));
      print_manifest("induce-typos", ctx,
                     {{"sentences", clean.sentences.size()},
                      {"table_words", table.candidates.size()}});
      return 0;
    }

    if (app.got_subcommand(augment_cmd)) {
      ctx.cmd = augment_cmd;
      std::uint64_t seed = ctx.seed("--base-seed", seed_flag);
      std::uint64_t ep = ctx.get("--epoch", "epoch", epoch);
      std::string mode_v = ctx.get("--mode", "mode", mode);
      std::string model_arg = ctx.get("--model", "model", model_path);
      double eta_v = ctx.get("--eta", "eta", eta);
      ColumnMap in_map{token_col, source_col, label_col};
      Dataset clean = parse_conll(read_file(in_path), in_map);
      std::vector<std::string> texts;
      for (const auto& s : clean.sentences) texts.push_back(s.text());
      NoiseModel model = load_model_flag(model_arg, eta_v, augment_cmd->count("--eta") +
                                             (ctx.config.contains("eta") ? 1u : 0u), texts);
      Dataset noisy = augmentation_stream(clean, model, seed, ep,
                                          mode_v == "sentence" ? AugmentMode::Sentence
                                                               : AugmentMode::Token);
      emit(out_path, write_conll(noisy, ColumnMap{0, 1, 2}));
      print_manifest("augment", ctx,
                     {{"sentences", clean.sentences.size()}, {"epoch", ep}});
      return 0;
    }

    if (app.got_subcommand(correct_cmd)) {
      ctx.cmd = correct_cmd;
      int tmo = ctx.get("--timeout-ms", "timeout_ms", timeout_ms);
      ColumnMap in_map{token_col, source_col, label_col};
      Dataset noisy = parse_conll(read_file(in_path), in_map);
      CommandSpec cmd{{"/bin/sh", "-c", command_str}, std::chrono::milliseconds(tmo)};
      Dataset corrected = apply_corrector(cmd, noisy);
      emit(out_path, write_conll(corrected, ColumnMap{0, 1, 2}));
      print_manifest("correct", ctx, {{"sentences", noisy.sentences.size()}});
      return 0;
    }

    if (app.got_subcommand(stats_cmd)) {
      ctx.cmd = stats_cmd;
      bool fold = ctx.get("--fold-case", "fold_case", fold_case);
      json result;
      ErrorHistogram hist{};
      if (!in_path.empty()) {
        ColumnMap in_map{stats_token_col, stats_source_col, stats_label_col};
        Dataset ds = parse_conll(read_file(in_path), in_map);
        TerResult ter = token_error_rate_detail(ds, false, fold);
        TerResult eter = token_error_rate_detail(ds, true, fold);
        hist = error_rate_histogram(ds, fold);
        result["ter"] = ter.rate;
        result["tokens"] = ter.tokens;
        result["errors"] = ter.errors;
        result["entity_ter"] = eter.rate;
        result["entity_ter_empty"] = eter.empty_denominator;
        result["sentences"] = hist.sentences;
      } else if (!parallel_path.empty()) {
        ParallelCorpus corpus = parse_parallel(read_file(parallel_path));
        WordPairExtraction ex = extract_word_pairs(corpus);
        std::size_t errors = 0;
        for (const auto& p : ex.pairs) {
          bool same = fold ? fold_ascii_case(p.clean) == fold_ascii_case(p.noisy)
                           : p.clean == p.noisy;
          if (!same || p.clean.empty() || p.noisy.empty()) ++errors;
        }
        hist = error_rate_histogram(corpus, fold);
        result["ter"] =
            ex.pairs.empty() ? 0.0 : static_cast<double>(errors) / ex.pairs.size();
        result["tokens"] = ex.pairs.size();
        result["errors"] = errors;
        result["sentences"] = hist.sentences;
      } else {
        throw ValidationError("stats needs --input or --parallel");
      }
      result["histogram"] = histogram_json(hist);
      if (!histogram_out.empty()) write_file_atomic(histogram_out, histogram_csv(hist));
      emit(json_out, result.dump(2) + "\n");
      print_manifest("stats", ctx, {{"sentences", hist.sentences}});
      return 0;
    }

    if (app.got_subcommand(eval_cmd)) {
      ctx.cmd = eval_cmd;
      json result;
      if (!scores_path.empty() && !scores_b_path.empty()) {
        std::vector<double> a = read_scores(scores_path);
        std::vector<double> b = read_scores(scores_b_path);
        WelchResult w = welch_t_test(a, b);
        result["t"] = w.t;
        result["df"] = w.df;
        result["p"] = w.p;
        result["degenerate"] = w.degenerate;
      } else if (eval_cmd->count("--summarize")) {
        EvalSummary s = mean_stddev(read_scores(scores_path));
        result["mean"] = s.mean;
        result["stddev"] = s.stddev;
        result["n_runs"] = s.n_runs;
      } else if (!gold_path.empty() && !pred_path.empty()) {
        ColumnMap map{token_col, source_col, label_col};
        Dataset gold = parse_conll(read_file(gold_path), map);
        Dataset pred = parse_conll(read_file(pred_path), map);
        std::string task_v = ctx.get("--task", "task", task);
        if (task_v == "ner") {
          F1Result f1 = ner_f1_detail(gold, pred);
          result["f1"] = f1.f1;
          result["precision"] = f1.precision;
          result["recall"] = f1.recall;
          result["gold_spans"] = f1.gold_spans;
          result["pred_spans"] = f1.pred_spans;
        } else {
          result["accuracy"] = tagging_accuracy(gold, pred);
        }
      } else {
        throw ValidationError(
            "eval needs --gold/--pred, --summarize, or --welch-a/--welch-b");
      }
      emit(json_out, result.dump(2) + "\n");
      print_manifest("eval", ctx, {{"entries", result.size()}});
      return 0;
    }

    if (app.got_subcommand(export_cmd)) {
      ctx.cmd = export_cmd;
      ParallelCorpus corpus = parse_parallel(read_file(parallel_path));
      emit(out_path, join_lines(extract_target_side(corpus)));
      print_manifest("export-nlm-corpus", ctx, {{"sentences", corpus.pairs.size()}});
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
