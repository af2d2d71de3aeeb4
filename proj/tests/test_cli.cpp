#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "parcorp/text.hpp"
#include "parcorp/types.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using parcorp::json;
using parcorp::testing::TempDir;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
  json j() const { return json::parse(out); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

class Cli : public ::testing::Test {
 protected:
  TempDir dir;
  fs::path store() const { return dir.path() / "store"; }

  CliRun run(const std::vector<std::string>& args) {
    std::string cmd = quote(PARCORP_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    const auto out = dir.path() / "stdout";
    const auto err = dir.path() / "stderr";
    cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), {"--store", store().string(), "--json"});
    return run(args);
  }

  fs::path write(const std::string& name, const std::string& content) {
    const auto p = dir.path() / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

  fs::path write_lines(const std::string& name, const std::vector<std::string>& lines) {
    std::string s;
    for (const auto& l : lines) s += l + "\n";
    return write(name, s);
  }
};

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + " " + std::to_string(i) + ".");
  return out;
}

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"bleu"}).code, 2);
  EXPECT_EQ(run({"ingest", "a", "b", "--format", "csv"}).code, 2);
  const auto r = run({"export", "--store", store().string(), "--out", "x", "--ratios", "0.5,0.5,0.5"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: invalid_ratios: ", 0), 0u) << r.err;
}

TEST_F(Cli, BleuIdenticalFilesScoreOne) {
  const auto f = write_lines("cand.txt", {"the cat sat on the mat .", "inni mana isaa deeme ."});
  const auto r = cli({"bleu", f.string(), f.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.j()["score"], 1.0);
  const auto human = run({"bleu", f.string(), f.string()});
  EXPECT_EQ(human.out.rfind("BLEU = 100", 0), 0u) << human.out;
}

TEST_F(Cli, BleuShortCandidateAnchor) {
  const auto c = write_lines("c.txt", {"the cat sat on"});
  const auto r1 = write_lines("r1.txt", {"the cat sat on the mat"});
  const auto r = cli({"bleu", c.string(), r1.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(r.j()["score"].get<double>(), 0.6065306597, 1e-9);
  const auto lower = write_lines("l.txt", {"The Cat sat on the mat"});
  EXPECT_LT(cli({"bleu", lower.string(), r1.string()}).j()["score"].get<double>(), 1.0);
  EXPECT_EQ(cli({"bleu", "--lowercase", lower.string(), r1.string()}).j()["score"], 1.0);
  const auto smooth = cli({"bleu", "--smoothing", "add_epsilon", "--max-n", "2", c.string(), r1.string()});
  EXPECT_EQ(smooth.j()["precisions"].size(), 2u);
}

TEST_F(Cli, BleuLineMismatchIsDataError) {
  const auto c = write_lines("c.txt", {"a", "b"});
  const auto r = write_lines("r.txt", {"a"});
  const auto res = cli({"bleu", c.string(), r.string()});
  EXPECT_EQ(res.code, 3);
  EXPECT_EQ(res.err.rfind("error: line_count_mismatch: ", 0), 0u);
  EXPECT_EQ(std::count(res.err.begin(), res.err.end(), '\n'), 1);
}

TEST_F(Cli, IngestCountsDuplicates) {
  auto en = numbered("English line", 97);
  auto om = numbered("Sarara Oromoo", 97);
  for (int i = 0; i < 3; ++i) {
    en.push_back(en[i * 10]);
    om.push_back(om[i * 10]);
  }
  const auto r = cli({"ingest", write_lines("a.en", en).string(), write_lines("a.om", om).string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.j()["added"], 97);
  EXPECT_EQ(r.j()["duplicates"], 3);
  EXPECT_EQ(r.j()["lines"], 100);
}

TEST_F(Cli, IngestLineMismatch) {
  const auto r = cli({"ingest", write_lines("a.en", numbered("x", 100)).string(),
                      write_lines("a.om", numbered("y", 99)).string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("error: line_count_mismatch: ", 0), 0u);
}

TEST_F(Cli, UnreadableAndInvalidInput) {
  EXPECT_EQ(cli({"ingest", (dir.path() / "missing.en").string(), (dir.path() / "missing.om").string()}).code, 3);
  const auto bad = write("bad.en", std::string("ok\n\xff\xfe\n"));
  const auto good = write_lines("good.om", {"a", "b"});
  const auto r = cli({"ingest", bad.string(), good.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("error: invalid_utf8: ", 0), 0u);
}

TEST_F(Cli, StoreErrorExitsFour) {
  const auto file = write("not-a-dir", "x");
  const auto r = run({"--store", (file / "store").string(), "stats"});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(r.err.rfind("error: store_unavailable: ", 0), 0u) << r.err;
}

TEST_F(Cli, IngestConservationOnRandomFiles) {
  std::mt19937_64 rng(9);
  const std::vector<std::string> words = {"a", "bb", "ccc", "mana", "bishaan", "", " ", "the", "x y z"};
  for (int round = 0; round < 50; ++round) {
    TempDir local;
    const std::size_t n = rng() % 30;
    std::string en, om;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len_a = rng() % 6, len_b = rng() % 6;
      for (std::size_t k = 0; k < len_a; ++k) en += words[rng() % words.size()] + " ";
      for (std::size_t k = 0; k < len_b; ++k) om += words[rng() % words.size()] + " ";
      en += "\n";
      om += "\n";
    }
    const auto a = write("r.en", en);
    const auto b = write("r.om", om);
    const auto r = run({"--store", (local.path() / "s").string(), "--json", "ingest", a.string(), b.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = r.j();
    std::size_t dropped = 0;
    for (const auto& [_, c] : j["dropped"].items()) dropped += c.get<std::size_t>();
    ASSERT_EQ(j["added"].get<std::size_t>() + j["duplicates"].get<std::size_t>() + dropped, n);
  }
}

TEST_F(Cli, StatsCountsPairs) {
  ASSERT_EQ(cli({"ingest", write_lines("a.en", numbered("Line", 42)).string(),
                 write_lines("a.om", numbered("Sarara", 42)).string()}).code, 0);
  const auto r = cli({"stats"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.j()["pairs"]["total"], 42);
  EXPECT_EQ(r.j()["pairs"]["by_origin"]["imported"], 42);
  EXPECT_EQ(run({"--store", store().string(), "stats"}).out.rfind("pairs 42", 0), 0u);
}

TEST_F(Cli, AlignExportIngestRoundTrip) {
  const auto en = write("doc.en",
                        "The farmer went to the market. He sold two cows! Then he bought seeds for the "
                        "new season. Mr. Tola helped him carry the bags home. Everyone was happy.");
  const auto om = write("doc.om",
                        "Qotee bulaan gara gabaa deeme. Sa'a lama gurgure! Achii booda sanyii waqtii "
                        "haaraaf bitate. Obbo Tolaan borsaa mana geessuuf isa gargaare. Hundi gammade.");
  const auto staged = cli({"ingest", "--format", "docpair", en.string(), om.string()});
  ASSERT_EQ(staged.code, 0) << staged.err;
  const auto aligned = cli({"align", "--all"});
  ASSERT_EQ(aligned.code, 0) << aligned.err;
  EXPECT_EQ(aligned.j()[0]["added"], 5);
  EXPECT_EQ(cli({"align", staged.j()["staged"]}).code, 3);

  const auto out = dir.path() / "export";
  const auto ex = cli({"export", "--out", out.string(), "--status", "all", "--seed", "7"});
  ASSERT_EQ(ex.code, 0) << ex.err;
  EXPECT_EQ(ex.j()["total"], 5);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));

  // Re-ingest every split into a fresh store.
  TempDir fresh;
  std::size_t added = 0;
  for (const char* split : {"train", "dev", "test"}) {
    const auto r = run({"--store", (fresh.path() / "s").string(), "--json", "ingest",
                        (out / (std::string(split) + ".en")).string(),
                        (out / (std::string(split) + ".om")).string()});
    ASSERT_EQ(r.code, 0) << r.err;
    added += r.j()["added"].get<std::size_t>();
  }
  EXPECT_EQ(added, 5u);
  const auto out2 = dir.path() / "export2";
  ASSERT_EQ(run({"--store", (fresh.path() / "s").string(), "export", "--out", out2.string(), "--status", "all"}).code, 0);
  auto lines_of = [](const fs::path& d) {
    std::multiset<std::string> s;
    for (const char* split : {"train", "dev", "test"}) {
      std::istringstream a(slurp(d / (std::string(split) + ".en"))), b(slurp(d / (std::string(split) + ".om")));
      for (std::string x, y; std::getline(a, x) && std::getline(b, y);) s.insert(x + "\t" + y);
    }
    return s;
  };
  EXPECT_EQ(lines_of(out), lines_of(out2));
}

TEST_F(Cli, ExportIsDeterministic) {
  ASSERT_EQ(cli({"ingest", write_lines("a.en", numbered("Line", 30)).string(),
                 write_lines("a.om", numbered("Sarara", 30)).string()}).code, 0);
  const auto a = dir.path() / "a";
  const auto b = dir.path() / "b";
  ASSERT_EQ(cli({"export", "--out", a.string(), "--status", "verified+pending", "--seed", "5"}).code, 0);
  ASSERT_EQ(cli({"export", "--out", b.string(), "--status", "verified+pending", "--seed", "5"}).code, 0);
  for (const char* f : {"train.en", "train.om", "dev.en", "dev.om", "test.en", "test.om", "manifest.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  // Nothing is verified yet.
  const auto v = cli({"export", "--out", (dir.path() / "v").string()});
  EXPECT_EQ(v.j()["total"], 0);
}

TEST_F(Cli, AddSourcesAndSnapshot) {
  const auto r = cli({"add-sources", write_lines("s.en", {"One.", "Two.", "One.", ""}).string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.j()["added"], 2);
  EXPECT_EQ(r.j()["duplicates"], 1);
  EXPECT_EQ(cli({"snapshot"}).code, 0);
  EXPECT_TRUE(fs::exists(store() / "snapshot.json"));
  EXPECT_EQ(cli({"stats"}).j()["source_segments"], 2);
}

TEST_F(Cli, ConfigFileIsHonoured) {
  const auto cfg = write("cfg.json", R"({"store_path": ")" + (dir.path() / "cfgstore").string() +
                                         R"(", "filter": {"max_len_tokens": 3}})");
  const auto r = run({"--config", cfg.string(), "--json", "ingest",
                      write_lines("a.en", {"one two three four five", "short"}).string(),
                      write_lines("a.om", {"tokko lama sadii afur shan", "gabaabaa"}).string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.j()["added"], 1);
  EXPECT_EQ(r.j()["dropped"]["length"], 1);
  EXPECT_TRUE(fs::exists(dir.path() / "cfgstore" / "events.log"));
  EXPECT_EQ(run({"--config", write("bad.json", "{").string(), "stats"}).code, 3);
}
