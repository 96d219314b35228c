#include "artic/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <set>

#include "artic/error.hpp"

namespace artic {

double EdgeSpec::q_at(double u) const {
  if (profile.empty()) return 0.0;
  if (u <= profile.front().first) return profile.front().second;
  if (u >= profile.back().first) return profile.back().second;
  for (std::size_t k = 1; k < profile.size(); ++k) {
    const auto [u1, q1] = profile[k];
    if (u > u1) continue;
    const auto [u0, q0] = profile[k - 1];
    return q0 + (q1 - q0) * (u - u0) / (u1 - u0);
  }
  return profile.back().second;
}

double normalized_time(int t, int frames) {
  return frames > 1 ? double(t) / double(frames - 1) : 0.0;
}

namespace {

Pose joint_motion(const EdgeSpec& e, double q) {
  switch (e.model) {
    case ModelType::Rigid: return Pose::identity();
    case ModelType::Prismatic: return Pose::translation(q * e.axis.normalized());
    case ModelType::Rotational: return Pose::about_axis(e.pivot, e.axis.normalized(), q);
  }
  return Pose::identity();
}

// Edges in breadth-first order from the root.
std::vector<const EdgeSpec*> tree_order(const SceneSpec& spec) {
  std::vector<const EdgeSpec*> order;
  std::queue<int> frontier;
  frontier.push(spec.parts.front().id);
  while (!frontier.empty()) {
    const int p = frontier.front();
    frontier.pop();
    for (const auto& e : spec.edges)
      if (e.parent == p) {
        order.push_back(&e);
        frontier.push(e.child);
      }
  }
  return order;
}

const PartSpec& part_by_id(const SceneSpec& spec, int id) {
  for (const auto& p : spec.parts)
    if (p.id == id) return p;
  throw SpecError("unknown part " + std::to_string(id));
}

}  // namespace

void validate(const SceneSpec& spec) {
  if (spec.parts.empty()) throw SpecError("scene has no parts");
  if (spec.frames < 1) throw SpecError("frames must be >= 1");
  if (!(spec.sigma_track >= 0.0) || !(spec.sigma_pose_pos >= 0.0) ||
      !(spec.sigma_pose_rot >= 0.0))
    throw SpecError("noise levels must be non-negative");

  std::set<int> ids;
  for (const auto& p : spec.parts) {
    if (!ids.insert(p.id).second) throw SpecError("duplicate part id " + std::to_string(p.id));
    if (p.anchors.size() < 3)
      throw SpecError("part " + std::to_string(p.id) + " needs at least 3 anchors");
    if (!p.normals.empty() && p.normals.size() != p.anchors.size())
      throw SpecError("part " + std::to_string(p.id) + " has " +
                      std::to_string(p.normals.size()) + " normals for " +
                      std::to_string(p.anchors.size()) + " anchors");
    for (const auto& n : p.normals)
      if (std::abs(n.norm() - 1.0) > 1e-9)
        throw SpecError("part " + std::to_string(p.id) + " has a non-unit normal");
  }
  if (spec.edges.size() + 1 != spec.parts.size())
    throw SpecError("a tree over " + std::to_string(spec.parts.size()) + " parts needs " +
                    std::to_string(spec.parts.size() - 1) + " edges");

  std::set<int> children;
  for (const auto& e : spec.edges) {
    if (!ids.count(e.parent) || !ids.count(e.child))
      throw SpecError("edge refers to an unknown part");
    if (e.child == spec.parts.front().id) throw SpecError("the root part cannot be a child");
    if (!children.insert(e.child).second)
      throw SpecError("part " + std::to_string(e.child) + " has two parents");
    if (e.model != ModelType::Rigid && !(e.axis.norm() > 0.0))
      throw SpecError("edge " + std::to_string(e.parent) + "-" + std::to_string(e.child) +
                      " has a zero axis");
    if (e.q_min > e.q_max) throw SpecError("edge range has q_min > q_max");
    for (std::size_t k = 1; k < e.profile.size(); ++k)
      if (!(e.profile[k].first > e.profile[k - 1].first))
        throw SpecError("profile keyframes must be strictly increasing in time");
    for (int t = 0; t < spec.frames; ++t) {
      const double q = e.q_at(normalized_time(t, spec.frames));
      if (!(q >= e.q_min && q <= e.q_max))
        throw SpecError("edge " + std::to_string(e.parent) + "-" + std::to_string(e.child) +
                        ": q = " + std::to_string(q) + " at frame " + std::to_string(t) +
                        " leaves range [" + std::to_string(e.q_min) + ", " +
                        std::to_string(e.q_max) + "]");
    }
  }
  if (tree_order(spec).size() != spec.edges.size())
    throw SpecError("edges do not form a tree rooted at part " +
                    std::to_string(spec.parts.front().id));
}

std::map<int, Pose> part_world_poses(const SceneSpec& spec, int t) {
  const double u = normalized_time(t, spec.frames);
  std::map<int, Pose> world;
  const PartSpec& root = spec.parts.front();
  world[root.id] = root.origin;
  for (const EdgeSpec* e : tree_order(spec)) {
    const Pose rest =
        compose(part_by_id(spec, e->parent).origin.inverse(), part_by_id(spec, e->child).origin);
    world[e->child] = compose(world.at(e->parent), compose(joint_motion(*e, e->q_at(u)), rest));
  }
  return world;
}

GeneratedScene generate(const SceneSpec& spec) {
  validate(spec);
  GeneratedScene out;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::map<int, Pose>> world(std::size_t(spec.frames));
  for (int t = 0; t < spec.frames; ++t) world[std::size_t(t)] = part_world_poses(spec, t);
  const auto& first = world.front();

  int next_track = 0;
  for (const auto& part : spec.parts) {
    for (std::size_t k = 0; k < part.anchors.size(); ++k) {
      FeatureTrack tr;
      tr.track_id = next_track++;
      for (int t = 0; t < spec.frames; ++t) {
        const Pose& x = world[std::size_t(t)].at(part.id);
        Vec3 p = x.apply(part.anchors[k]);
        if (spec.sigma_track > 0.0)
          for (int c = 0; c < 3; ++c) p(c) += spec.sigma_track * gauss(rng);
        std::optional<Vec3> n;
        if (!part.normals.empty()) n = (x.quat() * part.normals[k]).normalized();
        tr.frames.push_back({t, p, n});
      }
      out.truth.track_parts[tr.track_id] = part.id;
      out.tracks.push_back(std::move(tr));
    }
  }

  // Part frames as the estimator sees them: anchored at the first-frame
  // centroid with world-aligned axes.
  std::map<int, Pose> frame0;
  for (const auto& part : spec.parts) {
    const Pose& x0 = first.at(part.id);
    frame0[part.id] = compose(x0.inverse(), Pose::translation(x0.trans()));
  }
  for (const auto& part : spec.parts) {
    PartTrajectory traj;
    traj.part_id = part.id;
    for (int t = 0; t < spec.frames; ++t) {
      Pose g = compose(world[std::size_t(t)].at(part.id), frame0.at(part.id));
      if (spec.sigma_pose_pos > 0.0 || spec.sigma_pose_rot > 0.0) {
        Vec3 dr, dp;
        for (int k = 0; k < 3; ++k) dr(k) = spec.sigma_pose_rot * gauss(rng);
        for (int k = 0; k < 3; ++k) dp(k) = spec.sigma_pose_pos * gauss(rng);
        g = Pose(quat_from_rotation_vector(dr) * g.quat(), g.trans() + dp);
      }
      traj.poses.push_back({t, g});
    }
    out.poses.push_back(std::move(traj));
  }

  for (const auto& part : spec.parts) {
    out.truth.parts.push_back(part.id);
    out.truth.labels[part.id] = part.type;
    out.labels[part.id] = part.type;
  }

  const double u0 = normalized_time(0, spec.frames);
  for (const auto& e : spec.edges) {
    const Pose& xp = first.at(e.parent);
    const Mat3 rp = xp.rot();
    const Vec3 d = first.at(e.child).trans() - xp.trans();
    const double q0 = e.q_at(u0);
    std::vector<double> s;
    for (int t = 0; t < spec.frames; ++t)
      s.push_back(e.q_at(normalized_time(t, spec.frames)) - q0);

    KinematicEdge edge{e.parent, e.child, RigidParams{Pose::translation(d)}};
    if (e.model != ModelType::Rigid) {
      const Vec3 axis_w = rp * e.axis.normalized();
      const Vec3 axis = canonical_sign(axis_w);
      const double sign = axis.dot(axis_w) >= 0.0 ? 1.0 : -1.0;
      double lo = 0.0, hi = 0.0;
      for (double v : s) {
        lo = std::min(lo, sign * v);
        hi = std::max(hi, sign * v);
      }
      if (e.model == ModelType::Prismatic) {
        edge.params = PrismaticParams{Pose::translation(d), axis, lo, hi};
      } else {
        const Vec3 pivot = rp * e.pivot;
        const Vec3 center = pivot + axis * axis.dot(d - pivot);
        edge.params = RotationalParams{center, axis, (d - center).norm(),
                                       Pose::translation(d), lo, hi};
      }
    }
    out.truth.edges.push_back(std::move(edge));
  }
  return out;
}

std::vector<Vec3> box_anchors(const Vec3& h) {
  std::vector<Vec3> pts;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y)
      for (int z = -1; z <= 1; ++z)
        if (std::abs(x) + std::abs(y) + std::abs(z) >= 2)
          pts.emplace_back(x * h.x(), y * h.y(), z * h.z());
  return pts;
}

std::vector<Vec3> box_normals(const std::vector<Vec3>& anchors) {
  std::vector<Vec3> out;
  for (const auto& a : anchors) {
    Vec3 s;
    for (int k = 0; k < 3; ++k) s(k) = a(k) > 0.0 ? 1.0 : (a(k) < 0.0 ? -1.0 : 0.0);
    out.push_back(s.normalized());
  }
  return out;
}

namespace {

PartSpec part(int id, std::string type, const Vec3& half, const Vec3& origin) {
  auto anchors = box_anchors(half);
  auto normals = box_normals(anchors);
  return {id, std::move(type), std::move(anchors), std::move(normals), Pose::translation(origin)};
}

SceneSpec door() {
  SceneSpec s;
  s.name = "door";
  s.parts = {part(0, "frame", {0.3, 0.05, 0.5}, {-0.55, 0.0, 1.0}),
             part(1, "door", {0.35, 0.02, 0.5}, {0.55, 0.0, 1.0})};
  EdgeSpec hinge;
  hinge.parent = 0;
  hinge.child = 1;
  hinge.model = ModelType::Rotational;
  hinge.axis = Vec3::UnitZ();
  hinge.pivot = {0.55, 0.0, 0.0};
  hinge.profile = {{0.0, 0.0}, {1.0, std::numbers::pi / 2}};
  hinge.q_min = 0.0;
  hinge.q_max = std::numbers::pi / 2;
  s.edges = {hinge};
  return s;
}

EdgeSpec slide(int parent, int child, const Vec3& axis, double u0, double u1, double travel) {
  EdgeSpec e;
  e.parent = parent;
  e.child = child;
  e.model = ModelType::Prismatic;
  e.axis = axis.normalized();
  e.profile = {{u0, 0.0}, {u1, travel}};
  e.q_min = 0.0;
  e.q_max = travel;
  return e;
}

SceneSpec drawer() {
  SceneSpec s;
  s.name = "drawer";
  s.parts = {part(0, "cabinet", {0.3, 0.3, 0.4}, {0.0, 0.0, 0.4}),
             part(1, "drawer", {0.25, 0.25, 0.08}, {0.0, 0.05, 0.5})};
  s.edges = {slide(0, 1, Vec3::UnitY(), 0.0, 1.0, 0.4)};
  return s;
}

// Drawers open one after the other along non-parallel rails so that the
// drawer-drawer motion is not itself a clean slide.
SceneSpec cabinet() {
  SceneSpec s;
  s.name = "cabinet";
  s.parts = {part(0, "cabinet", {0.3, 0.3, 0.4}, {0.0, 0.0, 0.4}),
             part(1, "drawer", {0.25, 0.25, 0.08}, {0.0, 0.05, 0.6}),
             part(2, "drawer", {0.25, 0.25, 0.08}, {0.0, 0.05, 0.25})};
  s.edges = {slide(0, 1, Vec3::UnitY(), 0.0, 0.5, 0.4),
             slide(0, 2, Vec3(0.35, 1.0, 0.0), 0.5, 1.0, 0.4)};
  return s;
}

SceneSpec chair() {
  SceneSpec s;
  s.name = "chair";
  s.parts = {part(0, "base", {0.3, 0.3, 0.03}, {0.0, 0.0, 0.03}),
             part(1, "lift", {0.08, 0.08, 0.2}, {0.0, 0.0, 0.3}),
             part(2, "seat", {0.2, 0.2, 0.03}, {0.32, 0.0, 0.55})};
  EdgeSpec swivel;
  swivel.parent = 1;
  swivel.child = 2;
  swivel.model = ModelType::Rotational;
  swivel.axis = Vec3::UnitZ();
  swivel.pivot = Vec3::Zero();
  swivel.profile = {{0.4, 0.0}, {1.0, 5 * std::numbers::pi / 6}};
  swivel.q_min = 0.0;
  swivel.q_max = 5 * std::numbers::pi / 6;
  s.edges = {slide(0, 1, Vec3::UnitZ(), 0.0, 0.4, 0.2), swivel};
  return s;
}

SceneSpec static_pair() {
  SceneSpec s;
  s.name = "static_pair";
  s.parts = {part(0, "table", {0.5, 0.3, 0.02}, {0.0, 0.0, 0.75}),
             part(1, "lamp", {0.05, 0.05, 0.2}, {0.3, 0.1, 0.97})};
  EdgeSpec fixed;
  fixed.parent = 0;
  fixed.child = 1;
  fixed.model = ModelType::Rigid;
  s.edges = {fixed};
  return s;
}

}  // namespace

std::map<std::string, SceneSpec> builtin_scenes() {
  std::map<std::string, SceneSpec> m;
  for (auto s : {door(), drawer(), cabinet(), chair(), static_pair()}) m[s.name] = s;
  return m;
}

SceneSpec builtin_scene(const std::string& name) {
  const auto all = builtin_scenes();
  auto it = all.find(name);
  if (it == all.end()) {
    std::string names;
    for (const auto& [k, v] : all) names += (names.empty() ? "" : ", ") + k;
    throw SpecError("unknown scene '" + name + "' (known: " + names + ")");
  }
  return it->second;
}

}  // namespace artic
