#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "artic/error.hpp"
#include "artic/segmentation.hpp"
#include "support.hpp"

using namespace artic;
using namespace testing;

namespace {

FeatureTrack make_track(int id, int frames, const std::function<Vec3(int)>& at) {
  FeatureTrack tr;
  tr.track_id = id;
  for (int t = 0; t < frames; ++t) tr.frames.push_back({t, at(t), std::nullopt});
  return tr;
}

/// Each part follows its own random per-frame pose; tracks are numbered part
/// by part with `per_part` members each.
std::vector<FeatureTrack> random_scene(std::mt19937_64& rng, int parts, int per_part,
                                       int frames, double noise, bool normals = false) {
  std::normal_distribution<double> n(0.0, noise > 0 ? noise : 1.0);
  std::vector<FeatureTrack> tracks;
  for (int p = 0; p < parts; ++p) {
    std::vector<Pose> motion;
    for (int t = 0; t < frames; ++t) motion.push_back(p == 0 ? Pose() : random_pose(rng, 0.5));
    const auto pts = random_points(rng, std::size_t(per_part), 0.3);
    for (int k = 0; k < per_part; ++k) {
      FeatureTrack tr;
      tr.track_id = p * per_part + k;
      const Vec3 nrm = random_unit(rng);
      for (int t = 0; t < frames; ++t) {
        TrackFrame f{t, motion[std::size_t(t)].apply(pts[std::size_t(k)]), std::nullopt};
        if (noise > 0) f.point += Vec3(n(rng), n(rng), n(rng));
        if (normals) f.normal = motion[std::size_t(t)].quat() * nrm;
        tr.frames.push_back(f);
      }
      tracks.push_back(std::move(tr));
    }
  }
  return tracks;
}

std::set<std::set<int>> partition(const ClusterAssignment& a) {
  std::set<std::set<int>> out;
  for (const auto& m : a.members()) out.emplace(m.begin(), m.end());
  return out;
}

}  // namespace

TEST_SUITE("segmentation") {
  TEST_CASE("affinity is symmetric and a track is fully consistent with itself") {
    std::mt19937_64 rng(41);
    const auto tracks = random_scene(rng, 2, 3, 10, 0.002, true);
    for (const auto& a : tracks) {
      CHECK(pairwise_affinity(a, a, 0.005, 0.1).score() == 1.0);
      for (const auto& b : tracks)
        CHECK(pairwise_affinity(a, b, 0.005, 0.1).score() ==
              pairwise_affinity(b, a, 0.005, 0.1).score());
    }
  }

  TEST_CASE("tracks separating at 1 cm per frame score below 1e-3") {
    const int frames = 100;
    const auto a = make_track(0, frames, [](int) { return Vec3(0, 0, 0); });
    const auto b = make_track(1, frames, [](int t) { return Vec3(0.1 + 0.01 * t, 0, 0); });
    const double s = pairwise_affinity(a, b, 0.005, 0.1).score();
    // Population variance of an arithmetic sequence: h^2 (N^2 - 1) / 12.
    const double var = 0.01 * 0.01 * (frames * frames - 1) / 12.0;
    const double expected = std::exp(-var / (2 * 0.005 * 0.005));
    CHECK(s < 1e-3);
    CHECK(s == doctest::Approx(expected).epsilon(1e-9));

    const auto c = make_track(2, 2, [](int t) { return Vec3(0, 0.003 * t, 0); });
    const auto d = make_track(3, 2, [](int) { return Vec3(0, 0, 0); });
    // Distances 0 and 0.003: variance 2.25e-6.
    CHECK(pairwise_affinity(c, d, 0.005, 0.1).displacement ==
          doctest::Approx(std::exp(-2.25e-6 / 5e-5)).epsilon(1e-12));
  }

  TEST_CASE("normal factor only when both tracks carry normals") {
    FeatureTrack a = make_track(0, 3, [](int) { return Vec3(0, 0, 0); });
    FeatureTrack b = make_track(1, 3, [](int) { return Vec3(1, 0, 0); });
    CHECK(!pairwise_affinity(a, b, 0.005, 0.1).normal_angle);
    const std::vector<double> ang = {0.0, 0.1, 0.2};
    for (int t = 0; t < 3; ++t) {
      a.frames[std::size_t(t)].normal = Vec3::UnitZ();
      b.frames[std::size_t(t)].normal =
          Vec3(std::sin(ang[std::size_t(t)]), 0, std::cos(ang[std::size_t(t)]));
    }
    const auto r = pairwise_affinity(a, b, 0.005, 0.1);
    REQUIRE(r.normal_angle);
    // Angles 0, 0.1, 0.2 rad: population variance 0.02 / 3.
    CHECK(*r.normal_angle == doctest::Approx(std::exp(-(0.02 / 3) / (2 * 0.01))).epsilon(1e-9));
    CHECK(r.score() == doctest::Approx(*r.normal_angle));
  }

  TEST_CASE("a single shared frame is insufficient overlap") {
    const auto a = make_track(0, 3, [](int) { return Vec3::Zero(); });
    FeatureTrack b;
    b.track_id = 1;
    b.frames = {{2, Vec3::UnitX(), std::nullopt}, {5, Vec3::UnitX(), std::nullopt}};
    CHECK_THROWS_AS(pairwise_affinity(a, b, 0.005, 0.1), InsufficientOverlap);
    // The dense matrix scores such pairs 0.
    const std::vector<FeatureTrack> both = {a, b};
    CHECK(affinity_matrix(both, 0.005, 0.1)(0, 1) == 0.0);
  }

  TEST_CASE("a single track with min_pts 1 forms one cluster") {
    const std::vector<FeatureTrack> one = {make_track(7, 5, [](int) { return Vec3::Zero(); })};
    const auto a = cluster_tracks(one, {0.005, 0.1, 0.6, 1});
    CHECK(a.n_clusters == 1);
    CHECK(a.cluster_of.at(7) == 0);
    // With the default min_pts the lone track is noise.
    CHECK(cluster_tracks(one).cluster_of.at(7) == kNoise);
  }

  TEST_CASE("two rigid groups of 20 tracks give two clusters") {
    std::mt19937_64 rng(42);
    const auto tracks = random_scene(rng, 2, 20, 30, 0.0005);
    const auto a = cluster_tracks(tracks);
    CHECK(a.n_clusters == 2);
    for (const auto& tr : tracks) CHECK(a.cluster_of.at(tr.track_id) == tr.track_id / 20);
  }

  TEST_CASE("an all-static scene is one cluster") {
    std::mt19937_64 rng(43);
    const auto tracks = random_scene(rng, 1, 15, 20, 0.0);
    const auto a = cluster_tracks(tracks);
    CHECK(a.n_clusters == 1);
    for (const auto& [id, c] : a.cluster_of) CHECK(c == 0);
  }

  TEST_CASE("clustering is invariant to input order") {
    std::mt19937_64 rng(44);
    std::uniform_int_distribution<int> parts(1, 4), per(3, 8);
    for (int k = 0; k < 100; ++k) {
      auto tracks = random_scene(rng, parts(rng), per(rng), 8, 0.001);
      const auto ref = cluster_tracks(tracks);
      std::shuffle(tracks.begin(), tracks.end(), rng);
      const auto perm = cluster_tracks(tracks);
      CHECK(perm.cluster_of == ref.cluster_of);
      CHECK(perm.n_clusters == ref.n_clusters);
    }
  }

  TEST_CASE("cluster count never exceeds the track count") {
    std::mt19937_64 rng(45);
    std::uniform_int_distribution<int> parts(1, 6), per(1, 5), min_pts(1, 4);
    std::uniform_real_distribution<double> eps(0.05, 0.95);
    for (int k = 0; k < 100; ++k) {
      const auto tracks = random_scene(rng, parts(rng), per(rng), 6, 0.003);
      const auto a = cluster_tracks(tracks, {0.005, 0.1, eps(rng), min_pts(rng)});
      CHECK(a.n_clusters <= int(tracks.size()));
      CHECK(a.cluster_of.size() == tracks.size());
      std::size_t members = 0;
      for (const auto& m : a.members()) {
        CHECK(!m.empty());
        CHECK(std::is_sorted(m.begin(), m.end()));
        members += m.size();
      }
      std::size_t noise = 0;
      for (const auto& [id, c] : a.cluster_of) noise += c == kNoise;
      CHECK(members + noise == tracks.size());
    }
  }

  TEST_CASE("zero-noise rigid groups are mutually fully consistent") {
    std::mt19937_64 rng(46);
    for (int k = 0; k < 100; ++k) {
      const auto tracks = random_scene(rng, 2, 4, 12, 0.0, true);
      const auto m = affinity_matrix(tracks, 0.005, 0.1);
      for (std::size_t i = 0; i < m.n; ++i) {
        CHECK(m(i, i) == 1.0);
        for (std::size_t j = 0; j < m.n; ++j) {
          CHECK(m(i, j) == m(j, i));
          CHECK(m(i, j) >= 0.0);
          CHECK(m(i, j) <= 1.0);
          if (i / 4 == j / 4) CHECK(m(i, j) > 1.0 - 1e-9);
        }
      }
    }
  }

  TEST_CASE("parallel affinity matrix equals the serial reference") {
    std::mt19937_64 rng(47);
    for (int k = 0; k < 20; ++k) {
      const auto tracks = random_scene(rng, 3, 12, 15, 0.002, k % 2 == 0);
      const auto a = affinity_matrix(tracks, 0.005, 0.1);
      const auto b = affinity_matrix_serial(tracks, 0.005, 0.1);
      CHECK(a.values == b.values);
      CHECK(partition(cluster_with_affinity(tracks, a, {})) ==
            partition(cluster_with_affinity(tracks, b, {})));
    }
  }
}
