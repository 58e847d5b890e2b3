#include <sstream>

#include "doctest.h"
#include "hsprobe/cli.hpp"
#include "hsprobe/run.hpp"
#include "support.hpp"

using namespace hsprobe;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = HSPROBE_FIXTURES;

struct Cli {
  std::string run_dir;
  std::ostringstream out, err;

  int operator()(std::vector<std::string> args) {
    out.str("");
    err.str("");
    args.insert(args.begin(), {"--run-dir", run_dir});
    return cli::run(args, out, err);
  }
};

// Every file under `dir` with its content, relative paths as keys.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = run::read_file(e.path());
  }
  return files;
}

}  // namespace

TEST_CASE("prepare and augment on the fixture corpus") {
  TempDir dir;
  Cli cli{dir.path().string()};
  REQUIRE(cli({"prepare", "--dataset", (kFixtures / "mini_muserc.jsonl").string()}) == 0);
  CHECK(cli.out.str() == "2 examples / 2 pairs\n9 answers\n");
  const auto report = run::read_json(dir / "prepare/selection_report.json");
  for (const char* k : {"group_sizes", "min_words", "length_balance", "digits"}) {
    CHECK(report["rejected_by_first_failure"][k] == 1);
  }
  // Rerunning a stage needs --overwrite.
  CHECK(cli({"prepare", "--dataset", (kFixtures / "mini_muserc.jsonl").string()}) == 1);

  REQUIRE(cli({"augment", "--rewrites", (kFixtures / "mini_rewrites.json").string()}) == 0);
  CHECK(cli.out.str().starts_with("removed 0 examples\n"));
  const auto d = corpus::load_dataset(dir / "augment/dataset.json");
  for (const auto& ex : d)
    for (const auto& p : ex.pairs) {
      CHECK(p.group(true).size() == 5);
      CHECK(p.group(false).size() == 5);
    }

  // One group without variants: capacity error naming it.
  auto rewrites = run::read_json(kFixtures / "mini_rewrites.json");
  rewrites["rewrites"].erase(3);
  run::write_json(dir / "starved.json", rewrites);
  CHECK(cli({"--overwrite", "augment", "--rewrites", (dir / "starved.json").string()}) == 3);
  CHECK(cli.err.str().find("2-0/false") != std::string::npos);
}

TEST_CASE("already complete groups pass through augment unchanged") {
  TempDir dir;
  Cli cli{dir.path().string()};
  REQUIRE(cli({"synth", "--pairs", "4"}) == 0);
  REQUIRE(cli({"prepare", "--dataset", (dir / "synth/dataset.json").string()}) == 0);
  REQUIRE(cli({"augment"}) == 0);
  CHECK(run::read_file(dir / "augment/dataset.json") == run::read_file(dir / "prepare/dataset.json"));
  CHECK(run::read_file(dir / "prepare/dataset.json") == run::read_file(dir / "synth/dataset.json"));
}

TEST_CASE("exit codes") {
  TempDir dir;
  Cli cli{dir.path().string()};
  run::write_file(dir / "empty.jsonl", "");
  CHECK(cli({"prepare", "--dataset", (dir / "empty.jsonl").string()}) == 2);
  CHECK(cli.err.str().find("no examples parsed") != std::string::npos);
  CHECK(cli({"prepare", "--dataset", (dir / "absent.jsonl").string()}) == 1);
  CHECK(cli({"synth", "--no-such-flag"}) == 2);
  CHECK(cli({"synth", "--layers", "0"}) == 2);

  // Bundle and dataset from different generators disagree.
  REQUIRE(cli({"synth", "--pairs", "3"}) == 0);
  run::write_file(dir / "other.json", run::read_file(dir / "synth/dataset.json"));
  auto d = run::read_json(dir / "other.json");
  d[1]["questions"][0]["pair_id"] = "renamed";
  run::write_json(dir / "other.json", d);
  CHECK(cli({"analyze", "--dataset", (dir / "other.json").string()}) == 4);
  CHECK(cli.err.str().find("1-0") != std::string::npos);
  CHECK(cli.err.str().find("renamed") != std::string::npos);

  // Two pairs are too few for the tests.
  REQUIRE(cli({"--overwrite", "synth", "--pairs", "2"}) == 0);
  REQUIRE(cli({"analyze"}) == 0);
  CHECK(cli({"test"}) == 5);
  CHECK(cli({"layers", "--occurrence-first", "0"}) == 2);
}

TEST_CASE("single-pair bundle: categories equal the pair averages") {
  TempDir dir;
  Cli cli{dir.path().string()};
  REQUIRE(cli({"synth", "--pairs", "1", "--separation", "1"}) == 0);
  REQUIRE(cli({"analyze"}) == 0);
  const auto j = run::read_json(dir / "analyze/similarity.json");
  const auto& av = j["pairs"][0]["averages"];
  const auto& c = j["categories"];
  CHECK(c["own_true"] == av["own_true"]);
  CHECK(c["own_false"] == av["own_false"]);
  CHECK(c["cross"].get<double>() ==
        doctest::Approx(0.5 * (av["cross_true_to_false"].get<double>() +
                               av["cross_false_to_true"].get<double>())));
}

TEST_CASE("delta=4 synthetic run: own groups beat cross, tests reject") {
  TempDir dir;
  Cli cli{dir.path().string()};
  REQUIRE(cli({"synth", "--separation", "4"}) == 0);
  REQUIRE(cli({"analyze"}) == 0);
  const auto c = run::read_json(dir / "analyze/similarity.json")["categories"];
  CHECK(c["own_true"].get<double>() > c["cross"].get<double>());
  CHECK(c["own_false"].get<double>() > c["cross"].get<double>());
  REQUIRE(cli({"test"}) == 0);
  for (const auto& r : run::read_json(dir / "test/test_report.json")["reports"]) {
    CHECK(r["t_test"]["p"].get<double>() < 0.001);
  }
}

TEST_CASE("config file keys mirror the options and are kept verbatim") {
  TempDir dir;
  const std::string toml = "[synth]\npairs = 5\nlayers = 3\nseparation = 1.5\n";
  run::write_file(dir / "run.toml", toml);
  Cli cli{dir.path().string()};
  REQUIRE(cli({"--config", (dir / "run.toml").string(), "synth"}) == 0);
  const auto m = run::read_json(dir / "synth/stage_manifest.json");
  CHECK(m["config"]["num_pairs"] == 5);
  CHECK(m["config"]["layers"] == 3);
  CHECK(m["config"]["separation"] == 1.5);
  CHECK(run::read_file(dir / "synth/input_config.toml") == toml);
}

TEST_CASE("thread count never changes output bytes") {
  TempDir a, b;
  for (auto [dir, threads] : {std::pair{&a, "1"}, std::pair{&b, "5"}}) {
    Cli cli{dir->path().string()};
    for (std::vector<std::string> stage :
         {std::vector<std::string>{"synth", "--pairs", "30", "--separation", "0.7"},
          {"analyze"}, {"test"}, {"layers"}, {"report"}}) {
      stage.insert(stage.begin(), {"--threads", threads, "--seed", "42"});
      REQUIRE(cli(stage) == 0);
    }
  }
  CHECK(snapshot(a.path()) == snapshot(b.path()));
}
