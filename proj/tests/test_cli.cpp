// Apache License, Version 2.0, refer to LICENSE.txt

#include <catch2/catch.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "noisycorpus/corpus.hpp"

using namespace noisycorpus;

namespace {

std::string cli() { return NOISYCORPUS_CLI_PATH; }
std::string fixtures() { return NOISYCORPUS_FIXTURES; }

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/noisycorpus_test_XXXXXX";
    path = ::mkdtemp(tmpl);
  }
  ~TempDir() { std::system(("rm -rf " + path).c_str()); }
  std::string file(const std::string& name) const { return path + "/" + name; }
};

int run(const std::string& args, const TempDir& dir) {
  std::string cmd = cli() + " " + args + " >" + dir.file("stdout.txt") + " 2>" +
                    dir.file("stderr.txt");
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("noise with eta 0 copies the input and exits 0") {
  TempDir dir;
  int rc = run("noise --model vanilla --eta 0 " + fixtures() + "/sentences.txt --out " +
                   dir.file("out.txt"),
               dir);
  CHECK(rc == 0);
  CHECK(slurp(dir.file("out.txt")) == slurp(fixtures() + "/sentences.txt"));
}

TEST_CASE("vanilla noise requires --eta") {
  TempDir dir;
  int rc = run("noise --model vanilla " + fixtures() + "/sentences.txt", dir);
  CHECK(rc == 1);
  CHECK(slurp(dir.file("stderr.txt")).find("--eta") != std::string::npos);
}

TEST_CASE("stats on an all-clean dataset puts 100 in the first bin") {
  TempDir dir;
  // clean dataset: 2-column file read with the token column doubling as source
  int rc = run("stats --input " + fixtures() + "/tiny_clean.conll --token-col 0 " +
                   "--source-col 0 --label-col 1 --histogram-out " + dir.file("h.csv") +
                   " --json-out " + dir.file("s.json"),
               dir);
  REQUIRE(rc == 0);
  std::string csv = slurp(dir.file("h.csv"));
  CHECK(csv.find("bin,percentage\n10,100.000000\n") != std::string::npos);
}

TEST_CASE("synth-benchmark with the identity degrader round-trips the fixture") {
  TempDir dir;
  int rc = run("synth-benchmark --input " + fixtures() + "/tiny_clean.conll --degrader @" +
                   fixtures() + "/degrader_identity.json --out " + dir.file("a.conll"),
               dir);
  REQUIRE(rc == 0);
  // output carries (noisy, clean, label); with the identity degrader both
  // token columns equal the clean input
  Dataset out = parse_conll(slurp(dir.file("a.conll")), ColumnMap{0, 1, 2});
  Dataset in = parse_conll(slurp(fixtures() + "/tiny_clean.conll"), ColumnMap{0, -1, 1});
  REQUIRE(out.sentences.size() == in.sentences.size());
  CHECK(out.sentences[0].tokens == in.sentences[0].tokens);
  CHECK(out.sentences[0].sources == in.sentences[0].tokens);
  CHECK(out.sentences[0].labels == in.sentences[0].labels);

  // byte-identical on a repeated run
  int rc2 = run("synth-benchmark --input " + fixtures() + "/tiny_clean.conll --degrader @" +
                    fixtures() + "/degrader_identity.json --out " + dir.file("b.conll"),
                dir);
  REQUIRE(rc2 == 0);
  CHECK(slurp(dir.file("a.conll")) == slurp(dir.file("b.conll")));
}

TEST_CASE("same seed gives byte-identical noise, different seed differs") {
  TempDir dir;
  std::string base = "noise --model vanilla --eta 0.4 --seed 11 " + fixtures() +
                     "/sentences.txt --out ";
  REQUIRE(run(base + dir.file("a.txt"), dir) == 0);
  REQUIRE(run(base + dir.file("b.txt"), dir) == 0);
  CHECK(slurp(dir.file("a.txt")) == slurp(dir.file("b.txt")));
  REQUIRE(run("noise --model vanilla --eta 0.4 --seed 12 " + fixtures() +
                  "/sentences.txt --out " + dir.file("c.txt"),
              dir) == 0);
  CHECK(slurp(dir.file("a.txt")) != slurp(dir.file("c.txt")));
}

TEST_CASE("--jobs does not change the output") {
  TempDir dir;
  std::string base = "noise --model vanilla --eta 0.3 --seed 5 " + fixtures() +
                     "/sentences.txt ";
  REQUIRE(run(base + "--jobs 1 --out " + dir.file("a.txt"), dir) == 0);
  REQUIRE(run(base + "--jobs 4 --out " + dir.file("b.txt"), dir) == 0);
  CHECK(slurp(dir.file("a.txt")) == slurp(dir.file("b.txt")));
}

TEST_CASE("gen-parallel output is independent of the shard count") {
  TempDir dir;
  std::string base = "gen-parallel --input " + fixtures() + "/sentences.txt --degrader @" +
                     fixtures() + "/degrader_builtin15.json --seed 3 ";
  REQUIRE(run(base + "--jobs 1 --out " + dir.file("a.tsv"), dir) == 0);
  REQUIRE(run(base + "--jobs 3 --out " + dir.file("b.tsv"), dir) == 0);
  CHECK(slurp(dir.file("a.tsv")) == slurp(dir.file("b.tsv")));
}

TEST_CASE("NOISYCORPUS_SEED is the seed fallback") {
  TempDir dir;
  std::string cmd = "NOISYCORPUS_SEED=11 " + cli() + " noise --model vanilla --eta 0.4 " +
                    fixtures() + "/sentences.txt --out " + dir.file("env.txt") +
                    " 2>" + dir.file("stderr.txt");
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  REQUIRE(run("noise --model vanilla --eta 0.4 --seed 11 " + fixtures() +
                  "/sentences.txt --out " + dir.file("flag.txt"),
              dir) == 0);
  CHECK(slurp(dir.file("env.txt")) == slurp(dir.file("flag.txt")));
}

TEST_CASE("--config supplies defaults and flags override it") {
  TempDir dir;
  // config.json pins seed 7
  REQUIRE(run("noise --config " + fixtures() + "/config.json --model vanilla --eta 0.4 " +
                  fixtures() + "/sentences.txt --out " + dir.file("cfg.txt"),
              dir) == 0);
  CHECK(slurp(dir.file("stderr.txt")).find("\"seed\":7") != std::string::npos);
  REQUIRE(run("noise --config " + fixtures() + "/config.json --seed 3 --model vanilla "
              "--eta 0.4 " +
                  fixtures() + "/sentences.txt --out " + dir.file("cfg2.txt"),
              dir) == 0);
  CHECK(slurp(dir.file("stderr.txt")).find("\"seed\":3") != std::string::npos);
}

TEST_CASE("unknown subcommand exits 2, missing file exits 1") {
  TempDir dir;
  CHECK(run("frobnicate", dir) == 2);
  CHECK(run("noise --model vanilla --eta 0.1 /no/such/file.txt", dir) == 1);
  CHECK(slurp(dir.file("stderr.txt")).find("error:") != std::string::npos);
}

TEST_CASE("every subcommand appears in --help") {
  TempDir dir;
  REQUIRE(run("--help", dir) == 0);
  std::string help = slurp(dir.file("stdout.txt"));
  for (const char* name :
       {"align", "estimate", "train-channel", "noise", "gen-parallel", "synth-benchmark",
        "induce-typos", "augment", "correct", "stats", "eval", "export-nlm-corpus"})
    CHECK(help.find(name) != std::string::npos);
}

TEST_CASE("the manifest identifies the subcommand and counts") {
  TempDir dir;
  REQUIRE(run("export-nlm-corpus --parallel " + fixtures() + "/parallel.tsv --out " +
                  dir.file("nlm.txt"),
              dir) == 0);
  std::string manifest = slurp(dir.file("stderr.txt"));
  CHECK(manifest.find("\"subcommand\":\"export-nlm-corpus\"") != std::string::npos);
  CHECK(manifest.find("config_hash") != std::string::npos);
}

TEST_CASE("align subcommand writes word pairs and a report") {
  TempDir dir;
  REQUIRE(run("align --parallel " + fixtures() + "/parallel.tsv --pairs-out " +
                  dir.file("pairs.tsv") + " --report-out " + dir.file("report.json"),
              dir) == 0);
  std::string pairs = slurp(dir.file("pairs.tsv"));
  CHECK(pairs.find("York\tVork\n") != std::string::npos);
  CHECK(pairs.find("new\tnzw\n") != std::string::npos);
  std::string report = slurp(dir.file("report.json"));
  CHECK(report.find("\"substitutions\"") != std::string::npos);
}

TEST_CASE("induce-typos with p 1 replaces from the table deterministically") {
  TempDir dir;
  std::string cmd = "induce-typos --input " + fixtures() +
                    "/tiny_clean.conll --table " + fixtures() +
                    "/typos.tsv --p-replace 1 --seed 4 --out ";
  REQUIRE(run(cmd + dir.file("a.conll"), dir) == 0);
  REQUIRE(run(cmd + dir.file("b.conll"), dir) == 0);
  CHECK(slurp(dir.file("a.conll")) == slurp(dir.file("b.conll")));
  Dataset out = parse_conll(slurp(dir.file("a.conll")), ColumnMap{0, 1, 2});
  CHECK(out.sentences[0].tokens[1] != "new");   // replaced
  CHECK(out.sentences[0].sources[1] == "new");  // source kept
  CHECK(out.sentences[0].labels[6] == "I-LOC");
}
