#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "testutil.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

CmdResult run_cli(const std::string& args) {
  static std::atomic<int> counter{0};
  static testutil::TempDir io;
  int n = counter.fetch_add(1);
  fs::path outp = io.file("out" + std::to_string(n));
  fs::path errp = io.file("err" + std::to_string(n));
  std::string cmd = std::string(SELFALIGN_CLI_PATH) + " " + args + " > " +
                    outp.string() + " 2> " + errp.string();
  int rc = std::system(cmd.c_str());
  CmdResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = testutil::read_file(outp);
  r.err = testutil::read_file(errp);
  return r;
}

const std::vector<std::string> kSynthFiles = {
    "x_names.tsv",      "y_names.tsv",      "x_triples.tsv",
    "y_triples.tsv",    "x_embeddings.tsv", "y_embeddings.tsv",
    "links_train.tsv",  "links_test.tsv",   "synth_config.txt"};

// Dataset shared by the smoke cases below; generated once.
const fs::path& shared_dataset() {
  static testutil::TempDir dir;
  static bool made = false;
  if (!made) {
    auto r = run_cli("synth --out " + dir.path().string() +
                     " --n-entities 240 --dim 16 --embed-sigma 0.6 --seed 5");
    REQUIRE(r.code == 0);
    made = true;
  }
  return dir.path();
}

double report_value(const fs::path& report, const std::string& split, int k) {
  std::istringstream is(testutil::read_file(report));
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string s, kk, value, n;
    std::getline(ls, s, '\t');
    std::getline(ls, kk, '\t');
    std::getline(ls, value, '\t');
    if (s == split && kk == std::to_string(k)) return std::stod(value);
  }
  FAIL("missing report row " << split << " k=" << k << " in "
                             << report.string());
  return -1.0;
}

std::size_t count_lines(const std::string& text, const std::string& needle) {
  std::size_t n = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth output is byte identical across reruns of a seed") {
  testutil::TempDir tmp;
  fs::path a = tmp.file("a"), b = tmp.file("b"), c = tmp.file("c");
  std::string args = " --n-entities 120 --dim 12 --seed 7";
  REQUIRE(run_cli("synth --out " + a.string() + args).code == 0);
  REQUIRE(run_cli("synth --out " + b.string() + args).code == 0);
  REQUIRE(run_cli("synth --out " + c.string() +
                  " --n-entities 120 --dim 12 --seed 8")
              .code == 0);
  bool any_differs_across_seeds = false;
  for (const auto& f : kSynthFiles) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(testutil::read_file(a / f) == testutil::read_file(b / f));
    if (testutil::read_file(a / f) != testutil::read_file(c / f)) {
      any_differs_across_seeds = true;
    }
  }
  CHECK(any_differs_across_seeds);
}

TEST_CASE("zero embedding noise gives perfect untrained retrieval") {
  testutil::TempDir tmp;
  fs::path data = tmp.file("data"), out = tmp.file("eval");
  REQUIRE(run_cli("synth --out " + data.string() +
                  " --n-entities 120 --dim 12 --embed-sigma 0 --seed 3")
              .code == 0);
  auto r = run_cli("eval " + data.string() + " --out " + out.string() +
                   " --candidates test");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("hit@1 1 ") != std::string::npos);
  CHECK(report_value(out / "eval_report.tsv", "test", 1) == 1.0);
  CHECK(report_value(out / "eval_report.tsv", "test", 10) == 1.0);
  CHECK(fs::exists(out / "neighbors.tsv"));
  CHECK(fs::exists(out / "resolved_config.txt"));
}

TEST_CASE("heavy embedding noise drops untrained retrieval to near chance") {
  testutil::TempDir tmp;
  fs::path data = tmp.file("data"), out = tmp.file("eval");
  REQUIRE(run_cli("synth --out " + data.string() +
                  " --n-entities 200 --dim 12 --embed-sigma 2.5 --seed 3")
              .code == 0);
  REQUIRE(run_cli("eval " + data.string() + " --out " + out.string() +
                  " --candidates test")
              .code == 0);
  // 140 test candidates: chance hit@1 is 0.007.
  CHECK(report_value(out / "eval_report.tsv", "test", 1) <= 0.1);
}

TEST_CASE("train smoke run writes metrics and checkpoints") {
  testutil::TempDir tmp;
  fs::path out = tmp.file("train");
  auto r = run_cli("train " + shared_dataset().string() + " --out " +
                   out.string() +
                   " --batch-size 16 --queue-k 2 --max-epochs 3 --seed 11");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "metrics.tsv"));
  CHECK(fs::exists(out / "checkpoint_best.bin"));
  CHECK(fs::exists(out / "checkpoint_final.bin"));
  std::string metrics = testutil::read_file(out / "metrics.tsv");
  CHECK(metrics.rfind("epoch\tstep\tloss\tdev_hit1\tdev_hit10\twall_ms", 0) ==
        0);
  CHECK(count_lines(metrics, "\n") == 4);  // header plus one row per epoch

  std::string resolved = testutil::read_file(out / "resolved_config.txt");
  CHECK(resolved.find("batch_size=16") != std::string::npos);
  CHECK(resolved.find("queue_k=2") != std::string::npos);
  CHECK(resolved.find("self_negatives=on") != std::string::npos);

  // The trained checkpoint must be consumable by eval, in both directions.
  fs::path eout = tmp.file("eval");
  auto e = run_cli("eval " + shared_dataset().string() + " --out " +
                   eout.string() + " --checkpoint " +
                   (out / "checkpoint_best.bin").string() +
                   " --candidates test --direction y2x");
  REQUIRE(e.code == 0);
  CHECK(report_value(eout / "eval_report.tsv", "test", 1) >= 0.0);
}

TEST_CASE("cross-KG negative mode runs end to end") {
  testutil::TempDir tmp;
  fs::path out = tmp.file("train");
  auto r = run_cli("train " + shared_dataset().string() + " --out " +
                   out.string() +
                   " --batch-size 16 --queue-k 2 --max-epochs 2"
                   " --self-negatives off --seed 11");
  REQUIRE(r.code == 0);
  std::string resolved = testutil::read_file(out / "resolved_config.txt");
  CHECK(resolved.find("self_negatives=off") != std::string::npos);
}

TEST_CASE("capacity violation is reported with the offending arithmetic") {
  testutil::TempDir tmp;
  fs::path out = tmp.file("train");
  auto r = run_cli("train " + shared_dataset().string() + " --out " +
                   out.string() + " --batch-size 64 --queue-k 64");
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.err.find("4160") != std::string::npos);  // (1+64)*64
  CHECK(r.err.find("240") != std::string::npos);   // entity count
}

TEST_CASE("every validation error is listed before exit") {
  testutil::TempDir tmp;
  auto r = run_cli("train " + tmp.file("nonexistent").string() + " --out " +
                   tmp.file("out").string() +
                   " --batch-size 0 --tau -0.5 --momentum 2");
  CHECK(r.code == 2);
  CHECK(count_lines(r.err, "error:") == 3);
  CHECK(r.err.find("batch_size") != std::string::npos);
  CHECK(r.err.find("tau") != std::string::npos);
  CHECK(r.err.find("momentum") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected") {
  testutil::TempDir tmp;
  fs::path cfg = tmp.file("synth.cfg");
  testutil::write_file(cfg, "n_entities=50\ntotally_bogus=1\n");
  auto r = run_cli("synth --config " + cfg.string() + " --out " +
                   tmp.file("out").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown config key 'totally_bogus'") != std::string::npos);
}

TEST_CASE("duplicate config keys are a parse error") {
  testutil::TempDir tmp;
  fs::path cfg = tmp.file("synth.cfg");
  testutil::write_file(cfg, "n_entities=50\nn_entities=60\n");
  auto r = run_cli("synth --config " + cfg.string() + " --out " +
                   tmp.file("out").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("duplicate key") != std::string::npos);
}

TEST_CASE("explicit flags override config file values") {
  testutil::TempDir tmp;
  fs::path cfg = tmp.file("synth.cfg");
  testutil::write_file(cfg, "n_entities=50\ndim=12\n");
  fs::path out = tmp.file("out");
  auto r = run_cli("synth --config " + cfg.string() + " --out " +
                   out.string() + " --n-entities 60");
  REQUIRE(r.code == 0);
  std::string echo = testutil::read_file(out / "synth_config.txt");
  CHECK(echo.find("n_entities=60") != std::string::npos);  // flag wins
  CHECK(echo.find("dim=12") != std::string::npos);         // file applies
  CHECK(count_lines(testutil::read_file(out / "x_names.tsv"), "\n") == 60);
}

TEST_CASE("stats reports link counts and structural agreement") {
  testutil::TempDir tmp;
  fs::path out = tmp.file("stats");
  auto r = run_cli("stats " + shared_dataset().string() + " --out " +
                   out.string());
  REQUIRE(r.code == 0);
  std::string stats = testutil::read_file(out / "stats.tsv");
  CHECK(stats.rfind("split\tn_links\tneighbor_similarity", 0) == 0);
  CHECK(stats.find("train\t72\t") != std::string::npos);  // 30% of 240
  CHECK(stats.find("test\t168\t") != std::string::npos);
  CHECK(stats.find("all\t240\t") != std::string::npos);
  // Identical graphs through the identity alignment.
  CHECK(r.out.find("neighbor_similarity(all) 1") != std::string::npos);
}

TEST_CASE("theory subcommand passes at reduced sizes") {
  testutil::TempDir tmp;
  fs::path out = tmp.file("theory");
  auto r = run_cli("theory --out " + out.string() +
                   " --sandwich-instances 2000 --decay-trials 1000"
                   " --decay-ref-samples 400000 --gap-pointwise-samples 20000");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("sandwich: PASS") != std::string::npos);
  CHECK(r.out.find("limit_decay: PASS") != std::string::npos);
  CHECK(r.out.find("source_gap: PASS") != std::string::npos);
  for (const char* f :
       {"theory_sandwich.tsv", "theory_decay.tsv", "theory_gap.tsv"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(out / f));
    std::string text = testutil::read_file(out / f);
    CHECK(text.rfind("check\ttau\tdim\tlambda\tm\testimate\tstd_err\tbound\t"
                     "decreased\tpass",
                     0) == 0);
  }
  std::string resolved = testutil::read_file(out / "resolved_config.txt");
  CHECK(resolved.find("gap_seed=23") != std::string::npos);
  CHECK(resolved.find("decay_seed=42") != std::string::npos);
}

}  // TEST_SUITE
