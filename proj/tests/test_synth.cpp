#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "artic/error.hpp"
#include "artic/posegraph.hpp"
#include "artic/synth.hpp"
#include "support.hpp"

using namespace artic;
using namespace testing;

namespace {

PartSpec box_part(int id, const std::string& type, const Vec3& half, const Vec3& at) {
  PartSpec p;
  p.id = id;
  p.type = type;
  p.anchors = box_anchors(half);
  p.normals = box_normals(p.anchors);
  p.origin = Pose::translation(at);
  return p;
}

/// Root box plus one child on a prismatic track along x.
SceneSpec slider(int frames, std::vector<std::pair<double, double>> profile) {
  SceneSpec s;
  s.name = "slider";
  s.frames = frames;
  s.parts = {box_part(0, "base", {0.3, 0.3, 0.3}, {0, 0, 0}),
             box_part(1, "block", {0.1, 0.1, 0.1}, {0, 0, 0.5})};
  EdgeSpec e;
  e.parent = 0;
  e.child = 1;
  e.model = ModelType::Prismatic;
  e.axis = Vec3::UnitX();
  e.profile = std::move(profile);
  e.q_min = 0.0;
  e.q_max = 1.0;
  s.edges = {e};
  return s;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("no motion and no noise gives constant tracks") {
    const auto scene = generate(slider(20, {}));
    REQUIRE(!scene.tracks.empty());
    for (const auto& tr : scene.tracks) {
      CHECK(tr.frames.size() == 20);
      for (const auto& f : tr.frames) {
        CHECK(f.point == tr.frames.front().point);
        CHECK(*f.normal == *tr.frames.front().normal);
      }
    }
  }

  TEST_CASE("a prismatic ramp of 1 mm per frame moves 0.1 m by frame 100") {
    const auto scene = generate(slider(101, {{0.0, 0.0}, {1.0, 0.1}}));
    for (const auto& tr : scene.tracks) {
      const Vec3 d = tr.frames[100].point - tr.frames[0].point;
      if (scene.truth.track_parts.at(tr.track_id) == 1) {
        CHECK((d - Vec3(0.1, 0, 0)).norm() < 1e-12);
        CHECK((tr.frames[37].point - tr.frames[0].point - Vec3(0.037, 0, 0)).norm() < 1e-12);
      } else {
        CHECK(d.norm() == 0.0);
      }
    }
  }

  TEST_CASE("builtin scenes have the expected parts") {
    const auto scenes = builtin_scenes();
    CHECK(scenes.size() == 5);
    CHECK(generate(builtin_scene("door")).truth.parts.size() == 2);
    CHECK(generate(builtin_scene("cabinet")).truth.parts.size() == 3);
    CHECK(generate(builtin_scene("chair")).truth.parts.size() == 3);
    CHECK_THROWS_AS(builtin_scene("spaceship"), SpecError);
  }

  TEST_CASE("builtin scenes validate and their anchors span 3D") {
    for (const auto& [name, spec] : builtin_scenes()) {
      CAPTURE(name);
      CHECK_NOTHROW(validate(spec));
      for (const auto& p : spec.parts) {
        CHECK(p.anchors.size() >= 8);
        Vec3 c = Vec3::Zero();
        for (const auto& a : p.anchors) c += a;
        c /= double(p.anchors.size());
        CHECK(c.norm() < 1e-12);
        Mat3 cov = Mat3::Zero();
        for (const auto& a : p.anchors) cov += (a - c) * (a - c).transpose();
        Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
        CHECK(es.eigenvalues()(0) > 1e-6);
        CHECK(p.normals.size() == p.anchors.size());
      }
    }
  }

  TEST_CASE("invalid scenes are rejected") {
    auto fails = [](SceneSpec s) {
      try {
        validate(s);
      } catch (const SpecError&) {
        return true;
      }
      return false;
    };
    const SceneSpec ok = slider(10, {{0, 0}, {1, 0.5}});
    CHECK(!fails(ok));
    {
      SceneSpec s = ok;
      s.parts.clear();
      s.edges.clear();
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.frames = 0;
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.sigma_track = -1;
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.parts[1].id = 0;
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.parts[1].anchors.resize(2);
      s.parts[1].normals.resize(2);
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.parts[1].normals.pop_back();
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.parts[1].normals[0] *= 2.0;
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.edges.push_back(s.edges[0]);
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.edges[0].child = 7;
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      std::swap(s.edges[0].parent, s.edges[0].child);
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.edges[0].axis = Vec3::Zero();
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.edges[0].q_min = 2.0;
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.edges[0].profile = {{0.5, 0}, {0.5, 0.1}};
      CHECK(fails(s));
    }
    {
      SceneSpec s = ok;
      s.edges[0].profile = {{0, 0}, {1, 1.5}};
      CHECK(fails(s));
    }
  }

  TEST_CASE("generation is deterministic per seed") {
    SceneSpec s = builtin_scene("cabinet");
    s.sigma_track = 0.003;
    s.sigma_pose_pos = 0.001;
    s.sigma_pose_rot = 0.001;
    s.seed = 5;
    const auto a = generate(s), b = generate(s);
    CHECK(a.tracks_text() == b.tracks_text());
    CHECK(a.poses_text() == b.poses_text());
    s.seed = 6;
    CHECK(generate(s).tracks_text() != a.tracks_text());
  }

  TEST_CASE("tracks are numbered part by part, root first") {
    const auto spec = builtin_scene("chair");
    const auto scene = generate(spec);
    int id = 0;
    for (const auto& p : spec.parts)
      for (std::size_t k = 0; k < p.anchors.size(); ++k, ++id) {
        CHECK(scene.tracks[std::size_t(id)].track_id == id);
        CHECK(scene.truth.track_parts.at(id) == p.id);
      }
    CHECK(scene.tracks.size() == std::size_t(id));
    for (const auto& p : spec.parts) CHECK(scene.labels.at(p.id) == p.type);
  }

  TEST_CASE("truth parameters reproduce the generated relative motion") {
    for (const auto& [name, spec] : builtin_scenes()) {
      CAPTURE(name);
      const auto scene = generate(spec);
      CHECK(scene.truth.is_spanning_tree());
      std::map<int, const PartTrajectory*> by_id;
      for (const auto& p : scene.poses) by_id[p.part_id] = &p;
      for (const auto& e : scene.truth.edges) {
        const auto d = relative_transform_sequence(by_id.at(e.i)->poses, by_id.at(e.j)->poses);
        const auto q = configurations(e.params, d);
        for (std::size_t t = 0; t < d.size(); ++t)
          CHECK(pose_gap(predict(e.params, q[t]), d[t].delta) < 1e-9);
      }
    }
  }

  TEST_CASE("pose files start at the first-frame anchor centroid") {
    const auto spec = builtin_scene("drawer");
    const auto scene = generate(spec);
    for (const auto& part : scene.poses) {
      Vec3 c = Vec3::Zero();
      int n = 0;
      for (const auto& tr : scene.tracks)
        if (scene.truth.track_parts.at(tr.track_id) == part.part_id) {
          c += tr.frames.front().point;
          ++n;
        }
      c /= double(n);
      CHECK(pose_gap(part.poses.front().pose, Pose::translation(c)) < 1e-12);
    }
  }

  TEST_CASE("profiles interpolate linearly and hold at the ends") {
    EdgeSpec e;
    e.profile = {{0.2, 1.0}, {0.6, 3.0}};
    CHECK(e.q_at(0.0) == 1.0);
    CHECK(e.q_at(0.4) == doctest::Approx(2.0));
    CHECK(e.q_at(1.0) == 3.0);
    CHECK(normalized_time(0, 1) == 0.0);
    CHECK(normalized_time(99, 100) == 1.0);
  }

  TEST_CASE("box helpers") {
    const auto a = box_anchors({1, 2, 3});
    CHECK(a.size() == 20);
    const auto n = box_normals(a);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(std::abs(n[k].norm() - 1.0) < 1e-12);
      CHECK(n[k].dot(a[k]) > 0.0);
    }
  }
}
