#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tkgr/errors.hpp"
#include "tkgr/run_config.hpp"

using namespace tkgr;
namespace fs = std::filesystem;

TEST_SUITE("config") {

TEST_CASE("defaults pin the documented training constants") {
  const RunConfig config;
  CHECK(config.batch_size == 512);
  CHECK(config.max_epochs == 1000);
  CHECK(config.candidates == 64);
  CHECK(config.ttt_seq_len == 20);
  CHECK(config.margin == doctest::Approx(1.0));
  CHECK(config.generator_lr == doctest::Approx(0.001));
  CHECK(config.discriminator_lr == doctest::Approx(0.001));
  CHECK(config.selection == NegativeSelection::categorical);
  CHECK(config.pretrain_epochs == 5);
  CHECK(config.patience == 3);
  CHECK(config.protocol == RankingProtocol::time_aware_filtered);
  CHECK(config.ttt_subset == TttConfig::Subset::entity_embeddings);
  CHECK(config.ttt_mode == CountMode::object_only);
  CHECK(config.ttt_include_valid);
  CHECK(config.bern);
  CHECK_FALSE(config.filter_known);
  config.validate();
}

TEST_CASE("unknown keys are rejected") {
  RunConfig config;
  CHECK_THROWS_AS(config.set("train.margn", "1.0"), ConfigError);
  CHECK_THROWS_AS(config.set("", "x"), ConfigError);
}

TEST_CASE("unparsable values are rejected with the key named") {
  RunConfig config;
  try {
    config.set("train.margin", "wide");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("train.margin") != std::string::npos);
  }
  CHECK_THROWS_AS(config.set("model.kind", "resnet"), ConfigError);
  CHECK_THROWS_AS(config.set("train.bern", "maybe"), ConfigError);
  CHECK_THROWS_AS(config.set("seed", "-1"), ConfigError);
}

TEST_CASE("range validation rejects out-of-range fields") {
  RunConfig config;
  config.margin = -1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.dim = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.interval = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = {};
  config.workers = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("config files parse comments, blanks, and padding") {
  const fs::path file =
      fs::temp_directory_path() / "tkgr_test_config" / "run.conf";
  fs::create_directories(file.parent_path());
  {
    std::ofstream out(file);
    out << "# experiment setup\n"
        << "\n"
        << "model.kind = trilinear-time\n"
        << "  train.margin=2.5  \n"
        << "train.strategy = tkgan\n";
  }
  RunConfig config;
  config.load_file(file);
  CHECK(config.model_kind == ModelKind::trilinear_time);
  CHECK(config.margin == doctest::Approx(2.5));
  CHECK(config.strategy == SamplingStrategy::tkgan);
}

TEST_CASE("malformed config lines carry their line number") {
  const fs::path file =
      fs::temp_directory_path() / "tkgr_test_config" / "bad.conf";
  fs::create_directories(file.parent_path());
  {
    std::ofstream out(file);
    out << "model.dim = 8\n"
        << "no equals sign here\n";
  }
  RunConfig config;
  try {
    config.load_file(file);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("later assignments override earlier ones") {
  RunConfig config;
  config.set("model.dim", "16");
  config.set("model.dim", "32");
  CHECK(config.dim == 32);
}

TEST_CASE("the resolved echo reproduces the configuration") {
  RunConfig config;
  config.set("train.margin", "2.0");
  config.set("model.kind", "diachronic");
  config.set("seed", "7");
  const std::string text = config.resolved();

  // Feed every line back through the parser; the result must match.
  RunConfig replayed;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t eq = line.find(" = ");
    REQUIRE(eq != std::string::npos);
    replayed.set(line.substr(0, eq), line.substr(eq + 3));
  }
  CHECK(replayed.resolved() == text);
  CHECK(replayed.margin == doctest::Approx(2.0));
  CHECK(replayed.model_kind == ModelKind::diachronic);
  CHECK(replayed.seed == 7);
}

TEST_CASE("derived sub-configs carry the shared fields") {
  RunConfig config;
  config.set("train.margin", "3.0");
  config.set("train.candidates", "17");
  config.set("train.selection", "argmax");
  config.set("ttt.steps", "4");
  config.set("ttt.subset", "all");

  const AdversarialConfig adv = config.adversarial();
  CHECK(adv.margin == doctest::Approx(3.0));
  CHECK(adv.candidate_count == 17);
  CHECK(adv.selection == NegativeSelection::argmax);

  const TttConfig ttt = config.ttt();
  CHECK(ttt.steps == 4);
  CHECK(ttt.subset == TttConfig::Subset::all_parameters);
}

}  // TEST_SUITE
