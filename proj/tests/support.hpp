#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "artic/geometry.hpp"
#include "artic/kinfit.hpp"
#include "artic/trackio.hpp"

namespace testing {

using artic::Pose;
using artic::Quat;
using artic::Vec3;

inline constexpr double kPi = std::numbers::pi;

inline double deg(double rad) { return rad * 180.0 / kPi; }

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(g(rng), g(rng), g(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Pose random_pose(std::mt19937_64& rng, double trans_scale = 1.0) {
  std::uniform_real_distribution<double> ang(0.0, kPi);
  std::uniform_real_distribution<double> u(-trans_scale, trans_scale);
  const Quat q(Eigen::AngleAxisd(ang(rng), random_unit(rng)));
  return Pose(q, Vec3(u(rng), u(rng), u(rng)));
}

inline std::vector<Vec3> random_points(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Vec3> pts;
  for (std::size_t k = 0; k < n; ++k) pts.emplace_back(u(rng), u(rng), u(rng));
  return pts;
}

inline std::vector<Vec3> transform(const Pose& p, const std::vector<Vec3>& pts) {
  std::vector<Vec3> out;
  for (const auto& x : pts) out.push_back(p.apply(x));
  return out;
}

/// Rotation angle plus translation distance between two poses.
inline double pose_gap(const Pose& a, const Pose& b) {
  return artic::rotation_distance(a.quat(), b.quat()) + (a.trans() - b.trans()).norm();
}

/// Relative-transform sequence from a closure over frame index.
template <class F>
std::vector<artic::RelativeTransform> deltas_from(int n, F&& f) {
  std::vector<artic::RelativeTransform> d;
  for (int t = 0; t < n; ++t) d.push_back({f(t), t});
  return d;
}

/// Axis comparison that ignores direction, in degrees.
inline double axis_gap_deg(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return deg(std::acos(c));
}

}  // namespace testing

namespace testing {

inline bool params_equal(const artic::ModelParams& a, const artic::ModelParams& b) {
  using namespace artic;
  if (a.index() != b.index()) return false;
  if (auto* x = std::get_if<RigidParams>(&a)) return x->fixed == std::get<RigidParams>(b).fixed;
  if (auto* x = std::get_if<PrismaticParams>(&a)) {
    const auto& y = std::get<PrismaticParams>(b);
    return x->origin == y.origin && x->axis == y.axis && x->q_min == y.q_min &&
           x->q_max == y.q_max;
  }
  const auto& x = std::get<RotationalParams>(a);
  const auto& y = std::get<RotationalParams>(b);
  return x.center == y.center && x.axis == y.axis && x.radius == y.radius &&
         x.phase == y.phase && x.q_min == y.q_min && x.q_max == y.q_max;
}

}  // namespace testing

#include <algorithm>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "artic/graph.hpp"

namespace testing {

inline artic::ModelParams random_params(std::mt19937_64& rng, artic::ModelType m) {
  using namespace artic;
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double a = u(rng), b = u(rng);
  if (a > b) std::swap(a, b);
  switch (m) {
    case ModelType::Rigid: return RigidParams{random_pose(rng)};
    case ModelType::Prismatic: return PrismaticParams{random_pose(rng), random_unit(rng), a, b};
    case ModelType::Rotational:
      return RotationalParams{random_pose(rng).trans(), random_unit(rng), std::abs(u(rng)),
                              random_pose(rng), a, b};
  }
  return RigidParams{};
}

/// Random spanning tree over `n` distinct part ids with random linkages.
inline artic::KinematicGraph random_graph(std::mt19937_64& rng, int n) {
  using namespace artic;
  KinematicGraph g;
  std::uniform_int_distribution<int> id_gap(1, 5), type(0, 2);
  int id = std::uniform_int_distribution<int>(0, 3)(rng);
  for (int k = 0; k < n; ++k) {
    g.parts.push_back(id);
    id += id_gap(rng);
  }
  std::shuffle(g.parts.begin(), g.parts.end(), rng);
  for (int k = 1; k < n; ++k) {
    const int parent = g.parts[std::uniform_int_distribution<int>(0, k - 1)(rng)];
    g.edges.push_back({parent, g.parts[std::size_t(k)],
                       random_params(rng, kModelTypes[std::size_t(type(rng))])});
  }
  return g;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("artic_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline bool graphs_equal(const artic::KinematicGraph& a, const artic::KinematicGraph& b) {
  if (a.parts != b.parts || a.labels != b.labels || a.track_parts != b.track_parts ||
      a.edges.size() != b.edges.size())
    return false;
  for (std::size_t k = 0; k < a.edges.size(); ++k)
    if (a.edges[k].i != b.edges[k].i || a.edges[k].j != b.edges[k].j ||
        !params_equal(a.edges[k].params, b.edges[k].params))
      return false;
  return true;
}

}  // namespace testing
