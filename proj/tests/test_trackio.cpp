#include <doctest.h>

#include <fstream>

#include "artic/error.hpp"
#include "artic/trackio.hpp"
#include "support.hpp"

using namespace artic;
using namespace testing;

namespace {

std::vector<FeatureTrack> random_tracks(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_tracks(0, 6), n_frames(1, 8), gap(1, 3);
  std::bernoulli_distribution with_normal(0.5);
  std::vector<FeatureTrack> tracks;
  const int n = n_tracks(rng);
  for (int k = 0; k < n; ++k) {
    FeatureTrack tr;
    tr.track_id = k * 7 - 3;
    int t = gap(rng) - 2;
    const int m = n_frames(rng);
    const bool normals = with_normal(rng);
    for (int f = 0; f < m; ++f) {
      TrackFrame fr;
      fr.t = t;
      fr.point = random_points(rng, 1, 10.0).front();
      if (normals) fr.normal = random_unit(rng);
      tr.frames.push_back(fr);
      t += gap(rng);
    }
    tracks.push_back(std::move(tr));
  }
  return tracks;
}

bool tracks_equal(const std::vector<FeatureTrack>& a, const std::vector<FeatureTrack>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].track_id != b[k].track_id || a[k].frames.size() != b[k].frames.size()) return false;
    for (std::size_t f = 0; f < a[k].frames.size(); ++f) {
      const auto &x = a[k].frames[f], &y = b[k].frames[f];
      if (x.t != y.t || x.point != y.point || x.normal.has_value() != y.normal.has_value())
        return false;
      if (x.normal && *x.normal != *y.normal) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("trackio") {
  TEST_CASE("empty tracks file gives no tracks") {
    CHECK(parse_tracks("").empty());
    CHECK(parse_tracks("\n\n").empty());
  }

  TEST_CASE("one two-frame track") {
    const auto t = parse_tracks(
        R"({"track_id": 4, "frames": [{"t": 0, "p": [0,0,0]}, {"t": 1, "p": [1,2,3], "n": [0,0,1]}]})"
        "\n");
    REQUIRE(t.size() == 1);
    CHECK(t[0].track_id == 4);
    REQUIRE(t[0].frames.size() == 2);
    CHECK(t[0].frames[1].point == Vec3(1, 2, 3));
    CHECK(!t[0].frames[0].normal);
    CHECK(*t[0].frames[1].normal == Vec3(0, 0, 1));
  }

  TEST_CASE("duplicate track id is a schema error") {
    const std::string line = R"({"track_id": 1, "frames": [{"t": 0, "p": [0,0,0]}]})";
    CHECK_THROWS_AS(parse_tracks(line + "\n" + line + "\n"), SchemaError);
  }

  TEST_CASE("syntax errors report their line") {
    const std::string ok = R"({"track_id": 1, "frames": [{"t": 0, "p": [0,0,0]}]})";
    try {
      parse_tracks(ok + "\n\n{\"track_id\": 2, \n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("track schema violations name the field") {
    auto fails_on = [](const std::string& text, const std::string& field) {
      try {
        parse_tracks(text);
      } catch (const SchemaError& e) {
        return std::string(e.what()).find(field) != std::string::npos;
      }
      return false;
    };
    CHECK(fails_on(R"({"frames": []})", "track_id"));
    CHECK(fails_on(R"({"track_id": 1})", "frames"));
    CHECK(fails_on(R"({"track_id": 1, "frames": [{"t": 2, "p": [0,0,0]}, {"t": 2, "p": [0,0,0]}]})",
                   "t"));
    CHECK(fails_on(R"({"track_id": 1, "frames": [{"t": 0, "p": [0,0]}]})", "p"));
    CHECK(fails_on(R"({"track_id": 1, "frames": [{"t": 0, "p": [0,0,0], "n": [0,0,2]}]})", "n"));
  }

  TEST_CASE("missing file is an I/O error naming the path") {
    try {
      load_tracks("/nonexistent/dir/tracks.jsonl");
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("/nonexistent/dir/tracks.jsonl") != std::string::npos);
      CHECK(e.is_io());
    }
  }

  TEST_CASE("tracks round-trip bit-exactly through a file") {
    std::mt19937_64 rng(31);
    const auto dir = scratch_dir("tracks_rt");
    for (int k = 0; k < 100; ++k) {
      const auto tracks = random_tracks(rng);
      save_tracks(tracks, dir / "t.jsonl");
      const auto back = load_tracks(dir / "t.jsonl");
      CHECK(tracks_equal(tracks, back));
      // One line per track: nothing dropped.
      std::ifstream in(dir / "t.jsonl");
      std::size_t lines = 0;
      for (std::string l; std::getline(in, l);) lines += !l.empty();
      CHECK(lines == tracks.size());
    }
  }

  TEST_CASE("single part with identity poses is accepted") {
    const auto parts = parse_pose_trajectories(
        R"({"format_version": 1, "parts": [{"part_id": 0, "poses": [
            {"t": 0, "q": [1,0,0,0], "p": [0,0,0]}, {"t": 1, "q": [1,0,0,0], "p": [0,0,0]}]}]})");
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].poses.size() == 2);
    CHECK(parts[0].poses[1].pose == Pose::identity());
  }

  TEST_CASE("quaternion norm tolerance is 1e-3") {
    auto doc = [](double w) {
      return R"({"parts": [{"part_id": 0, "poses": [{"t": 0, "q": [)" + std::to_string(w) +
             R"(,0,0,0], "p": [0,0,0]}]}]})";
    };
    CHECK_NOTHROW(parse_pose_trajectories(doc(1.0009)));
    CHECK_THROWS_AS(parse_pose_trajectories(doc(1.002)), SchemaError);
    CHECK_THROWS_AS(parse_pose_trajectories(doc(0.99)), SchemaError);
  }

  TEST_CASE("unsupported format version is rejected") {
    CHECK_THROWS_AS(parse_pose_trajectories(R"({"format_version": 2, "parts": []})"),
                    SchemaError);
  }

  TEST_CASE("pose trajectories round-trip bit-exactly") {
    std::mt19937_64 rng(32);
    const auto dir = scratch_dir("poses_rt");
    std::uniform_int_distribution<int> n(0, 4), m(0, 6);
    for (int k = 0; k < 100; ++k) {
      std::vector<PartTrajectory> parts;
      const int np = n(rng);
      for (int p = 0; p < np; ++p) {
        PartTrajectory tr;
        tr.part_id = p * 3 + 1;
        const int nm = m(rng);
        for (int t = 0; t < nm; ++t) tr.poses.push_back({t * 2, random_pose(rng, 4.0)});
        parts.push_back(std::move(tr));
      }
      save_pose_trajectories(parts, dir / "p.json");
      const auto back = load_pose_trajectories(dir / "p.json");
      REQUIRE(back.size() == parts.size());
      for (std::size_t p = 0; p < parts.size(); ++p) {
        CHECK(back[p].part_id == parts[p].part_id);
        REQUIRE(back[p].poses.size() == parts[p].poses.size());
        for (std::size_t t = 0; t < parts[p].poses.size(); ++t) {
          CHECK(back[p].poses[t].t == parts[p].poses[t].t);
          CHECK(back[p].poses[t].pose == parts[p].poses[t].pose);
        }
      }
    }
  }

  TEST_CASE("empty and two-node graphs round-trip") {
    const auto dir = scratch_dir("graph_small");
    KinematicGraph empty;
    save_graph(empty, dir / "e.json");
    CHECK(graphs_equal(load_graph(dir / "e.json"), empty));

    KinematicGraph two;
    two.parts = {0, 1};
    two.edges.push_back({0, 1, PrismaticParams{Pose::identity(), Vec3::UnitY(), 0.0, 0.3}});
    two.labels = {{0, "cabinet"}, {1, "drawer"}};
    save_graph(two, dir / "two.json");
    CHECK(graphs_equal(load_graph(dir / "two.json"), two));
  }

  TEST_CASE("random graphs round-trip losslessly") {
    std::mt19937_64 rng(33);
    const auto dir = scratch_dir("graph_rt");
    for (int k = 0; k < 100; ++k) {
      KinematicGraph g = random_graph(rng, 1 + k % 7);
      if (k % 2) {
        for (int p : g.parts) g.labels[p] = "type" + std::to_string(p % 3);
        for (int t = 0; t < 10; ++t) g.track_parts[t] = g.parts[std::size_t(t) % g.parts.size()];
      }
      save_graph(g, dir / "g.json");
      CHECK(graphs_equal(load_graph(dir / "g.json"), g));
    }
  }

  TEST_CASE("DOT output lists every part and every linkage once") {
    std::mt19937_64 rng(34);
    for (int k = 0; k < 100; ++k) {
      const KinematicGraph g = random_graph(rng, 1 + k % 6);
      const std::string dot = graph_to_dot(g);
      for (int p : g.parts) {
        const std::string node = "  p" + std::to_string(p) + " [label=";
        CHECK(dot.find(node) != std::string::npos);
      }
      std::size_t edges = 0;
      for (std::size_t pos = dot.find(" -- "); pos != std::string::npos;
           pos = dot.find(" -- ", pos + 1))
        ++edges;
      CHECK(edges == g.edges.size());
      for (const auto& e : g.edges)
        CHECK(dot.find("p" + std::to_string(e.i) + " -- p" + std::to_string(e.j) + " [label=\"" +
                       to_string(e.type()) + "\"]") != std::string::npos);
    }
  }

  TEST_CASE("graphs that are not spanning trees are rejected") {
    Json j = {{"parts", {0, 1, 2}},
              {"edges",
               {{{"i", 0}, {"j", 1}, {"model", "rigid"},
                 {"params", {{"q", {1, 0, 0, 0}}, {"p", {0, 0, 0}}}}}}}};
    CHECK_THROWS_AS(graph_from_json(j), SchemaError);
  }

  TEST_CASE("unknown model names are rejected") {
    Json j = {{"parts", {0, 1}},
              {"edges", {{{"i", 0}, {"j", 1}, {"model", "helical"}, {"params", Json::object()}}}}};
    CHECK_THROWS_AS(graph_from_json(j), Error);
  }

  TEST_CASE("label maps round-trip") {
    const auto dir = scratch_dir("labels");
    const PartLabelMap labels = {{0, "cabinet"}, {3, "drawer"}};
    save_labels(labels, dir / "l.json");
    CHECK(load_labels(dir / "l.json") == labels);
    CHECK_THROWS_AS(labels_from_json(Json{{"cluster_labels", {{"x", "door"}}}}), SchemaError);
  }
}
