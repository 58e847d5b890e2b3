#include "doctest.h"
#include "hsprobe/error.hpp"
#include "hsprobe/run.hpp"
#include "support.hpp"

using namespace hsprobe;

TEST_CASE("sha256 reference vectors") {
  CHECK(run::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(run::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("stage directories and manifests") {
  TempDir dir;
  const auto stage = dir / "stage";
  run::prepare_stage_dir(stage, false);
  run::write_file(stage / "sub/b.txt", "bee");
  run::write_file(stage / "a.txt", "ay");
  CHECK(run::list_files(stage) == std::vector<std::string>{"a.txt", "sub/b.txt"});
  CHECK_THROWS_AS(run::prepare_stage_dir(stage, false), IoError);

  run::write_file(dir / "input.json", "{}");
  run::write_stage_manifest(dir.path(), stage, "demo", {{"input", dir / "input.json"}},
                            {{"k", 1}});
  const auto m = run::read_json(stage / run::kStageManifest);
  CHECK(m["stage"] == "demo");
  CHECK(m["tool_version"] == run::kToolVersion);
  CHECK(m["inputs"][0]["path"] == "input.json");
  CHECK(m["inputs"][0]["sha256"] == run::sha256_hex("{}"));
  CHECK(m["outputs"].size() == 2);
  CHECK(m["outputs"][0]["sha256"] == run::sha256_hex("ay"));
  CHECK(run::list_files(stage).size() == 2);

  run::prepare_stage_dir(stage, true);
  CHECK(run::list_files(stage).empty());
  CHECK_THROWS_AS(run::read_json(dir / "missing.json"), IoError);
  run::write_file(dir / "bad.json", "{");
  CHECK_THROWS_AS(run::read_json(dir / "bad.json"), FormatError);
}
