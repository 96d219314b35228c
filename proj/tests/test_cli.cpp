#include <doctest.h>

#include <sstream>

#include "artic/cli.hpp"
#include "artic/trackio.hpp"
#include "support.hpp"

using namespace artic;
using namespace testing;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Json summary(const Run& r) { return Json::parse(r.out); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth then infer from poses writes a graph") {
    const auto dir = scratch_dir("cli_infer");
    REQUIRE(run({"synth", "--scene", "drawer", "--out", (dir / "scene").string()}).code == 0);
    const auto r = run({"infer", "--poses", (dir / "scene" / "poses.json").string(), "--out",
                        (dir / "graph.json").string(), "--report",
                        (dir / "report.json").string()});
    CHECK(r.code == 0);
    const auto g = load_graph(dir / "graph.json");
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].type() == ModelType::Prismatic);
    CHECK(std::filesystem::exists(dir / "report.json"));

    const auto e = run({"eval", "--estimate", (dir / "report.json").string(), "--truth",
                        (dir / "scene" / "truth.json").string(), "--class", "drawer"});
    CHECK(e.code == 0);
    CHECK(e.out.find("drawer") != std::string::npos);
  }

  TEST_CASE("dot output") {
    const auto dir = scratch_dir("cli_dot");
    REQUIRE(run({"synth", "--scene", "door", "--out", dir.string()}).code == 0);
    const auto r = run({"infer", "--poses", (dir / "poses.json").string(), "--format", "dot"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("graph", 0) == 0);
    CHECK(r.out.find("rotational") != std::string::npos);
  }

  TEST_CASE("a missing input file exits 2 and names the path") {
    const auto r = run({"infer", "--poses", "/no/such/poses.json"});
    CHECK(r.code == 2);
    CHECK(r.err.find("/no/such/poses.json") != std::string::npos);
  }

  TEST_CASE("validation failures exit 1") {
    CHECK(run({"infer"}).code == 1);
    CHECK(run({"synth", "--scene", "spaceship", "--out", scratch_dir("cli_bad").string()}).code ==
          1);
    CHECK(run({"bogus-command"}).code == 1);
    CHECK(run({"synth", "--frames", "abc"}).code == 1);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("synth is byte-identical across runs") {
    const auto a = scratch_dir("cli_same_a"), b = scratch_dir("cli_same_b");
    for (const auto& d : {a, b})
      REQUIRE(run({"synth", "--scene", "chair", "--sigma-track", "0.002", "--seed", "9", "--out",
                   d.string()})
                  .code == 0);
    for (const char* f : {"tracks.jsonl", "poses.json", "truth.json", "labels.json"})
      CHECK(read_file(a / f) == read_file(b / f));
  }

  TEST_CASE("flags override the config file, which overrides defaults") {
    const auto dir = scratch_dir("cli_layers");
    write_file(dir / "cfg.json", R"({"format_version": 1, "frames": 30, "scene": "door"})");
    const auto defaults = run({"synth", "--out", (dir / "a").string()});
    const auto file = run({"synth", "--config", (dir / "cfg.json").string(), "--out",
                           (dir / "b").string()});
    const auto flag = run({"synth", "--config", (dir / "cfg.json").string(), "--frames", "12",
                           "--out", (dir / "c").string()});
    REQUIRE(defaults.code == 0);
    REQUIRE(file.code == 0);
    REQUIRE(flag.code == 0);
    CHECK(summary(defaults)["frames"] == 100);
    CHECK(summary(file)["frames"] == 30);
    CHECK(summary(flag)["frames"] == 12);
    CHECK(summary(flag)["scene"] == "door");
  }

  TEST_CASE("unknown config keys are rejected") {
    const auto dir = scratch_dir("cli_unknown");
    write_file(dir / "cfg.json", R"({"format_version": 1, "frame_count": 30})");
    const auto r = run({"synth", "--config", (dir / "cfg.json").string(), "--out",
                        (dir / "x").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("frame_count") != std::string::npos);
  }

  TEST_CASE("segment reports one cluster per part") {
    const auto dir = scratch_dir("cli_segment");
    REQUIRE(run({"synth", "--scene", "cabinet", "--out", dir.string()}).code == 0);
    const auto r = run({"segment", "--tracks", (dir / "tracks.jsonl").string()});
    REQUIRE(r.code == 0);
    CHECK(summary(r)["n_clusters"] == 3);
  }
}
