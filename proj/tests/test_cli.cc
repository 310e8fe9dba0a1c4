#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ncc/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run ncc_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = ncc::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ncc_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void put(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t rows(const std::string& tsv) {
  std::size_t n = 0;
  for (char ch : tsv) n += ch == '\n';
  return n - 1;
}

fs::path balance_sheet_dir() {
  const fs::path d = scratch("balance_sheet_in");
  put(d / "e.txt", "balance\nsheet\nbalance sheet\n");
  put(d / "f.txt", "équilibre\nfeuille\nbilan\n");
  return d;
}

}  // namespace

TEST_CASE("discover on the balance sheet files finds balance_sheet") {
  const fs::path in = balance_sheet_dir();
  const fs::path out = scratch("balance_sheet_out");
  auto r = ncc_run({"discover", "--source", (in / "e.txt").string(), "--target", (in / "f.txt").string(),
                    "--objective", "i", "--iterations", "1", "--phi", "1", "--top-frequent", "0", "--out",
                    out.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string list = slurp(out / "ncc_list.tsv");
  CHECK(list.find("balance_sheet\tE\t1\t") != std::string::npos);
  for (const char* f : {"stop_list.tsv", "audit.tsv", "manifest.tsv", "models/model_0.tsv",
                        "models/trial_1.tsv", "candidates/iter_1.tsv"})
    CHECK_MESSAGE(fs::exists(out / f), f);
  const std::string manifest = slurp(out / "manifest.tsv");
  CHECK(manifest.find("objective\tI\n") != std::string::npos);
  CHECK(manifest.find("sha256:" + (in / "e.txt").string() + "\t") != std::string::npos);
}

TEST_CASE("zero iterations write empty outputs") {
  const fs::path in = balance_sheet_dir();
  const fs::path out = scratch("zero_out");
  auto r = ncc_run({"discover", "--source", (in / "e.txt").string(), "--target", (in / "f.txt").string(),
                    "--iterations", "0", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(rows(slurp(out / "ncc_list.tsv")) == 0);
  CHECK(rows(slurp(out / "stop_list.tsv")) == 0);
  CHECK(rows(slurp(out / "audit.tsv")) == 0);
}

TEST_CASE("a config file supplies defaults that flags override") {
  const fs::path in = balance_sheet_dir();
  const fs::path out = scratch("config_out");
  put(in / "run.conf", "# balance sheet example\nobjective = v\niterations = 0\nphi = 1\ntop-frequent = 0\n");
  auto r = ncc_run({"discover", "--config", (in / "run.conf").string(), "--source", (in / "e.txt").string(),
                    "--target", (in / "f.txt").string(), "--iterations", "1", "--out", out.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string manifest = slurp(out / "manifest.tsv");
  CHECK(manifest.find("objective\tV\n") != std::string::npos);
  CHECK(manifest.find("iterations\t1\n") != std::string::npos);
  CHECK(slurp(out / "ncc_list.tsv").find("balance_sheet") != std::string::npos);

  put(in / "bad.conf", "no-such-key = 3\n");
  CHECK(ncc_run({"discover", "--config", (in / "bad.conf").string(), "--source", (in / "e.txt").string(),
                 "--target", (in / "f.txt").string(), "--out", out.string()})
            .code != 0);
}

TEST_CASE("invalid configurations fail before running") {
  const fs::path in = balance_sheet_dir();
  const fs::path out = scratch("invalid_out");
  const std::vector<std::string> base{"discover", "--source", (in / "e.txt").string(), "--target",
                                      (in / "f.txt").string(), "--out", out.string()};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return ncc_run(a).code;
  };
  CHECK(with({}) == 0);
  CHECK(with({"--max-gap", "3"}) != 0);
  CHECK(with({"--held-out", "1.5"}) != 0);
  CHECK(with({"--objective", "x"}) != 0);
  CHECK(with({"--mode", "syllable"}) != 0);
  CHECK(with({"--function-words", (in / "missing.txt").string()}) != 0);
  CHECK(ncc_run({"discover", "--source", (in / "missing.txt").string(), "--target", (in / "f.txt").string()}).code != 0);
  CHECK(ncc_run({"nonsense"}).code != 0);
  CHECK(ncc_run({}).code != 0);
}

TEST_CASE("fuse leaves text without NCCs byte-identical") {
  const fs::path d = scratch("fuse_empty");
  const std::string text = "the  balance sheet ,ok\n\nlast line without newline";
  put(d / "in.txt", text);
  put(d / "list.tsv", "surface_form\tside\titeration\tdelta_actual_nats\tcount\n");
  auto r = ncc_run({"fuse", "--text", (d / "in.txt").string(), "--ncc-list", (d / "list.tsv").string(),
                    "--out", d.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(slurp(d / "fused.txt") == text);
}

TEST_CASE("fuse joins contiguous and gapped compounds") {
  const fs::path d = scratch("fuse_some");
  put(d / "in.txt", "the balance sheet is here\nhe will make up his mind\nsheet balance\n");
  put(d / "list.tsv",
      "surface_form\tside\titeration\tdelta_actual_nats\tcount\n"
      "balance_sheet\tE\t1\t0.6\t1\n"
      "make_up_<GAP>_mind\tE\t1\t0.2\t1\n"
      "bilan_x\tF\t1\t0.1\t1\n");
  auto r = ncc_run({"fuse", "--text", (d / "in.txt").string(), "--ncc-list", (d / "list.tsv").string(),
                    "--out", d.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(slurp(d / "fused.txt") ==
        "the balance_sheet is here\nhe will make_up_<GAP>_mind his\nsheet balance\n");

  put(d / "broken.tsv", "surface_form\tside\titeration\tdelta_actual_nats\tcount\nbalance_sheet\tE\n");
  CHECK(ncc_run({"fuse", "--text", (d / "in.txt").string(), "--ncc-list", (d / "broken.tsv").string(),
                 "--out", d.string()})
            .code != 0);
}

TEST_CASE("generate, induce, discover, evaluate end to end") {
  const fs::path d = scratch("pipeline");
  auto gen = ncc_run({"generate", "--segments", "300", "--source-vocab", "40", "--target-vocab", "40", "--seed",
                      "5", "--out", (d / "corpus").string()});
  REQUIRE_MESSAGE(gen.code == 0, gen.err);
  const std::string src = (d / "corpus" / "source.txt").string();
  const std::string tgt = (d / "corpus" / "target.txt").string();
  CHECK(slurp(d / "corpus" / "ground_truth.tsv") == "x\ty\tfiller\ttarget\n");

  auto again = ncc_run({"generate", "--segments", "300", "--source-vocab", "40", "--target-vocab", "40",
                        "--seed", "5", "--out", (d / "corpus2").string()});
  REQUIRE(again.code == 0);
  CHECK(slurp(d / "corpus2" / "source.txt") == slurp(src));

  auto ind = ncc_run({"induce", "--source", src, "--target", tgt, "--out", (d / "induced").string()});
  REQUIRE_MESSAGE(ind.code == 0, ind.err);
  CHECK(fs::exists(d / "induced" / "model.tsv"));
  CHECK(fs::exists(d / "induced" / "links.tsv"));

  auto disc = ncc_run({"discover", "--source", src, "--target", tgt, "--iterations", "1", "--refresh",
                       "--out", (d / "run").string()});
  REQUIRE_MESSAGE(disc.code == 0, disc.err);
  CHECK(rows(slurp(d / "run" / "ncc_list.tsv")) == 0);

  auto ev = ncc_run({"evaluate", "--source", src, "--target", tgt, "--model",
                     (d / "run" / "models" / "model_0.tsv").string(), "--model",
                     (d / "run" / "models" / "model_1.tsv").string(), "--ncc-list",
                     (d / "run" / "ncc_list.tsv").string(), "--out", (d / "eval").string()});
  REQUIRE_MESSAGE(ev.code == 0, ev.err);
  std::istringstream scores(slurp(d / "eval" / "scores.tsv"));
  std::string line;
  std::getline(scores, line);
  std::size_t n = 0;
  while (std::getline(scores, line)) {
    ++n;
    CHECK(line.substr(line.rfind('\t') + 1) == "1");
  }
  CHECK(n == 4);

  CHECK(ncc_run({"evaluate", "--source", src, "--target", tgt, "--model", (d / "nope.tsv").string(), "--out",
                 (d / "eval").string()})
            .code != 0);
}
