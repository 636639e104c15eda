#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/fixtures.hpp"
#include "tkgr/dataset.hpp"

using namespace tkgr;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const fs::path out_file =
      fs::temp_directory_path() / "tkgr_cli_capture.txt";
  const std::string command = std::string(TKGR_FORGE_BIN) + " " + args +
                              " > " + out_file.string() + " 2>&1";
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::ostringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  return result;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tkgr_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path tiny_dir() { return fs::path(TKGR_TEST_DATA_DIR) / "tiny"; }

/// Writes the small cluster fixture out as raw TSV splits so the CLI can
/// ingest and train on it.
fs::path materialized_cluster(const std::string& name, std::uint64_t seed) {
  const fs::path dir = scratch(name);
  const TkgDataset ds = testing::small_cluster_fixture(seed);
  for (Split split : {Split::train, Split::valid, Split::test}) {
    const char* base = split == Split::train
                           ? "train.txt"
                           : (split == Split::valid ? "valid.txt" : "test.txt");
    std::ofstream out(dir / base);
    for (const Quadruple& q : ds.split(split)) {
      out << ds.entities().label(q.subject) << "\t"
          << ds.relations().label(q.predicate) << "\t"
          << ds.entities().label(q.object) << "\t" << ds.raw_time(q.time)
          << "\n";
    }
  }
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("ingest prints the dataset statistics and writes the cache") {
  const fs::path out = scratch("ingest_out");
  const RunResult r = run_cli("ingest --data " + tiny_dir().string() +
                              " --interval 24 --interval-unit hours --out " +
                              out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("entities:   3") != std::string::npos);
  CHECK(r.output.find("relations:  2") != std::string::npos);
  CHECK(r.output.find("timestamps: 2") != std::string::npos);
  CHECK(r.output.find("train:      4") != std::string::npos);
  CHECK(fs::exists(out / "dataset.tkgd"));
  CHECK(fs::exists(out / "config.resolved"));

  const TkgDataset cached = TkgDataset::load_cache(out / "dataset.tkgd");
  CHECK(cached.num_entities() == 3);
}

TEST_CASE("re-ingesting an unchanged directory is byte-identical") {
  const fs::path out_a = scratch("ingest_a");
  const fs::path out_b = scratch("ingest_b");
  const std::string base = "ingest --data " + tiny_dir().string() +
                           " --interval 24 --out ";
  REQUIRE(run_cli(base + out_a.string()).exit_code == 0);
  REQUIRE(run_cli(base + out_b.string()).exit_code == 0);
  CHECK(file_bytes(out_a / "dataset.tkgd") ==
        file_bytes(out_b / "dataset.tkgd"));
}

TEST_CASE("a missing dataset path exits 2 and names the path") {
  const RunResult r = run_cli("ingest --data /nonexistent/nowhere --out " +
                              scratch("missing").string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("/nonexistent/nowhere") != std::string::npos);
}

TEST_CASE("a malformed dataset exits nonzero with the line number") {
  const fs::path dir = scratch("malformed_data");
  {
    std::ofstream out(dir / "train.txt");
    out << "a\tr\tb\t0\n"
        << "broken line\n";
  }
  const RunResult r = run_cli("ingest --data " + dir.string() + " --out " +
                              scratch("malformed_out").string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("train.txt:2") != std::string::npos);
}

TEST_CASE("unknown config keys and bad flags exit 2") {
  CHECK(run_cli("train --set no.such.key=1 --data x --out y").exit_code == 2);
  CHECK(run_cli("definitely-not-a-subcommand").exit_code == 2);
  CHECK(run_cli("analyze-shift --data " + tiny_dir().string() +
                " --window not_a_number --out " +
                scratch("badwin").string())
            .exit_code == 2);
}

TEST_CASE("training is reproducible: same config and seed, same bytes") {
  const fs::path data = materialized_cluster("train_data", 303);
  const fs::path out_a = scratch("train_a");
  const fs::path out_b = scratch("train_b");
  const std::string base =
      "train --data " + data.string() +
      " --set model.dim=8 --set train.max_epochs=2 --set train.batch_size=64"
      " --set train.val_queries=50 --seed 11 --out ";
  REQUIRE(run_cli(base + out_a.string()).exit_code == 0);
  REQUIRE(run_cli(base + out_b.string()).exit_code == 0);
  CHECK(file_bytes(out_a / "target.tkgm") == file_bytes(out_b / "target.tkgm"));
  CHECK(file_bytes(out_a / "target_metrics.jsonl") ==
        file_bytes(out_b / "target_metrics.jsonl"));
}

TEST_CASE("a tkgan run produces exactly three checkpoints") {
  const fs::path data = materialized_cluster("tkgan_data", 404);
  const fs::path out = scratch("tkgan_out");
  const RunResult r = run_cli(
      "train --data " + data.string() +
      " --strategy tkgan --set model.dim=8 --set train.max_epochs=2"
      " --set train.pretrain_epochs=1 --set train.batch_size=64"
      " --set train.candidates=8 --set train.val_queries=50 --seed 5 --out " +
      out.string());
  REQUIRE(r.exit_code == 0);
  std::size_t checkpoints = 0;
  for (const auto& entry : fs::directory_iterator(out)) {
    if (entry.path().extension() == ".tkgm") {
      ++checkpoints;
    }
  }
  CHECK(checkpoints == 3);
  CHECK(fs::exists(out / "generator.tkgm"));
  CHECK(fs::exists(out / "discriminator.tkgm"));
  CHECK(fs::exists(out / "target.tkgm"));
  CHECK(fs::exists(out / "metrics.jsonl"));
}

TEST_CASE("adapt with zero steps emits identical before and after reports") {
  const fs::path data = materialized_cluster("adapt_data", 505);
  const fs::path train_out = scratch("adapt_train");
  REQUIRE(run_cli("train --data " + data.string() +
                  " --set model.dim=8 --set train.max_epochs=2"
                  " --set train.batch_size=64 --set train.val_queries=50"
                  " --seed 3 --out " + train_out.string())
              .exit_code == 0);
  const fs::path fit_out = scratch("adapt_fit");
  REQUIRE(run_cli("fit-dist --data " + data.string() +
                  " --seq-len 4 --set ttt.hidden=8 --epochs 5 --seed 3"
                  " --out " + fit_out.string())
              .exit_code == 0);

  const fs::path adapt_out = scratch("adapt_run");
  const RunResult r = run_cli(
      "adapt --data " + data.string() + " --target " +
      (train_out / "target.tkgm").string() + " --predictor " +
      (fit_out / "predictor.tkgp").string() +
      " --steps 0 --set workers=2 --seed 3 --out " + adapt_out.string());
  REQUIRE(r.exit_code == 0);
  const std::string before = file_bytes(adapt_out / "eval_before.json");
  const std::string after = file_bytes(adapt_out / "eval_after.json");
  CHECK(before == after);
  CHECK_FALSE(before.empty());
  CHECK(fs::exists(adapt_out / "adapt_trace.jsonl"));

  // Reports follow the documented schema.
  CHECK(before.find("\"mrr\":") != std::string::npos);
  CHECK(before.find("\"hits1\":") != std::string::npos);
  CHECK(before.find("\"hits10\":") != std::string::npos);
  CHECK(before.find("\"query_count\":") != std::string::npos);
  CHECK(before.find("\"protocol\":") != std::string::npos);
}

TEST_CASE("a missing predictor exits 2") {
  const fs::path data = materialized_cluster("adapt_missing", 606);
  const RunResult r =
      run_cli("adapt --data " + data.string() +
              " --target /nonexistent/t.tkgm --predictor /nonexistent/p.tkgp"
              " --out " + scratch("adapt_missing_out").string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("/nonexistent") != std::string::npos);
}

TEST_CASE("eval writes a report for a saved checkpoint") {
  const fs::path data = materialized_cluster("eval_data", 707);
  const fs::path train_out = scratch("eval_train");
  REQUIRE(run_cli("train --data " + data.string() +
                  " --set model.dim=8 --set train.max_epochs=1"
                  " --set train.batch_size=64 --set train.val_queries=20"
                  " --seed 4 --out " + train_out.string())
              .exit_code == 0);
  const fs::path out = scratch("eval_out");
  const RunResult r = run_cli("eval --data " + data.string() +
                              " --checkpoint " +
                              (train_out / "target.tkgm").string() +
                              " --split test --protocol raw --out " +
                              out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("\"protocol\":\"raw\"") != std::string::npos);
  CHECK(fs::exists(out / "eval.json"));
}

TEST_CASE("analyze-shift flags the rotation boundary in its CSV") {
  const fs::path dir = scratch("shift_data");
  const TkgDataset ds = testing::rotation_fixture(20, 10);
  {
    std::ofstream out(dir / "train.txt");
    for (const Quadruple& q : ds.split(Split::train)) {
      out << ds.entities().label(q.subject) << "\t"
          << ds.relations().label(q.predicate) << "\t"
          << ds.entities().label(q.object) << "\t" << ds.raw_time(q.time)
          << "\n";
    }
  }
  const fs::path out = scratch("shift_out");
  const RunResult r = run_cli("analyze-shift --data " + dir.string() +
                              " --window 5 --out " + out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(out / "shift.csv"));
  const std::string csv = file_bytes(out / "shift.csv");
  CHECK(csv.find("window_a,window_b,D,p_ks,U,p_u") == 0);
  CHECK(csv.find("t5-t9,t10-t14,") != std::string::npos);
}

TEST_CASE("a single-window spec exits 2") {
  const RunResult r = run_cli("analyze-shift --data " + tiny_dir().string() +
                              " --window 100 --out " +
                              scratch("shift_single").string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("sample-neg emits provenance-tagged TSV candidates") {
  const RunResult r = run_cli("sample-neg --data " + tiny_dir().string() +
                              " --set data.interval=24 --limit 2 --k 2"
                              " --seed 9 --out " +
                              scratch("neg_out").string());
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.output);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) {
      continue;
    }
    ++rows;
    std::size_t tabs = 0;
    for (char c : line) {
      tabs += c == '\t' ? 1 : 0;
    }
    CHECK(tabs == 4);
    const std::string tag = line.substr(line.rfind('\t') + 1);
    CHECK((tag == "head" || tag == "tail"));
  }
  CHECK(rows == 4);  // 2 positives x 2 candidates
}

TEST_CASE("TKGR_FORGE_DATA provides the default dataset root") {
  const fs::path out = scratch("env_out");
  const std::string command =
      "TKGR_FORGE_DATA=" + fs::path(TKGR_TEST_DATA_DIR).string() +
      " " + std::string(TKGR_FORGE_BIN) + " ingest --data tiny --interval 24"
      " --out " + out.string() + " > " + (out / "log.txt").string() + " 2>&1";
  REQUIRE(std::system(command.c_str()) == 0);
  CHECK(fs::exists(out / "dataset.tkgd"));
}

}  // TEST_SUITE
