#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "chgh/common.hpp"

namespace fs = std::filesystem;

#ifndef CHGH_BIN
#error "CHGH_BIN must point at the CLI binary"
#endif

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(CHGH_BIN) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "chgh_cli_test";
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("usage and error exit codes") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("eval --ckpt /nonexistent/ckpt") == 1);
  CHECK(run("synth --spec /nonexistent/spec.cfg --out /tmp/chgh_nowhere") == 1);
}

TEST_CASE("end-to-end: synth, build-corpus, train, eval, report") {
  fs::path dir = work_dir();
  fs::remove_all(dir);
  fs::create_directories(dir);

  write_file(dir / "market.cfg",
             "n_skills = 12\n"
             "n_clusters_true = 3\n"
             "n_steps = 12\n"
             "docs_per_step = 60\n"
             "demand_supply_lag = 1\n"
             "seed = 5\n");
  REQUIRE(run("synth --spec " + (dir / "market.cfg").string() + " --out " +
              (dir / "raw").string()) == 0);
  REQUIRE(fs::exists(dir / "raw" / "jd.jsonl"));

  std::string build_args = "build-corpus --jd " + (dir / "raw" / "jd.jsonl").string() +
                           " --we " + (dir / "raw" / "we.jsonl").string() + " --out " +
                           (dir / "corpus").string() +
                           " --epsilon 0.1 --min-count 1 --train-end 10";
  REQUIRE(run(build_args) == 0);
  REQUIRE(fs::exists(dir / "corpus" / "vocabulary.csv"));

  // Idempotency: a second run rewrites the same artifacts.
  std::string before = chgh::read_text_file(dir / "corpus" / "demand_shares.csv");
  REQUIRE(run(build_args) == 0);
  CHECK(chgh::read_text_file(dir / "corpus" / "demand_shares.csv") == before);

  write_file(dir / "model.cfg",
             "d = 4\n"
             "clusters = 3\n"
             "heads = 2\n"
             "recurrent_layers = 2\n"
             "epochs = 4\n"
             "patience = 0\n"
             "n_classes = 3\n"
             "seed = 3\n");
  REQUIRE(run("train --config " + (dir / "model.cfg").string() + " --data " +
              (dir / "corpus").string() + " --out " + (dir / "ckpt").string()) == 0);
  REQUIRE(fs::exists(dir / "ckpt" / "params.bin"));
  REQUIRE(fs::exists(dir / "ckpt" / "manifest.json"));

  CHECK(run("eval --ckpt " + (dir / "ckpt").string() + " --split test") == 0);
  CHECK(fs::exists(dir / "ckpt" / "metrics_test.json"));
  CHECK(fs::exists(dir / "ckpt" / "labels_test.csv"));

  // Metrics-only report (no skills, no image).
  CHECK(run("report --ckpt " + (dir / "ckpt").string() + " --data " + (dir / "corpus").string() +
            " --table " + (dir / "metrics.csv").string()) == 0);
  std::string table = chgh::read_text_file(dir / "metrics.csv");
  CHECK(table.find("variant,acc,f1,auc,jacc") == 0);
  CHECK(!fs::exists(dir / "panels.svg"));

  // Panel report for two skills.
  CHECK(run("report --ckpt " + (dir / "ckpt").string() + " --data " + (dir / "corpus").string() +
            " --table " + (dir / "metrics2.csv").string() + " --skills skill_000,skill_001" +
            " --image " + (dir / "panels.svg").string()) == 0);
  std::string svg = chgh::read_text_file(dir / "panels.svg");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("skill_000") != std::string::npos);
  CHECK(svg.find("skill_001") != std::string::npos);

  // Unknown skill name: user error with suggestions.
  CHECK(run("report --ckpt " + (dir / "ckpt").string() + " --data " + (dir / "corpus").string() +
            " --table " + (dir / "metrics3.csv").string() + " --skills skil_000 --image " +
            (dir / "bad.svg").string()) == 1);

  // Unsupported image extension.
  CHECK(run("report --ckpt " + (dir / "ckpt").string() + " --data " + (dir / "corpus").string() +
            " --table " + (dir / "metrics4.csv").string() + " --skills skill_000 --image " +
            (dir / "panels.bmp").string()) == 1);
}

TEST_CASE("config file with an unknown key is rejected") {
  fs::path dir = work_dir();
  write_file(dir / "bad.cfg", "d = 4\nwibble = 2\n");
  CHECK(run("train --config " + (dir / "bad.cfg").string() + " --data " +
            (dir / "corpus").string() + " --out " + (dir / "ckpt2").string()) == 1);
}
