#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "artic/graph.hpp"
#include "artic/trackio.hpp"

namespace artic {

struct PartSpec {
  int id = 0;
  std::string type;
  /// Anchor points in the part frame; their centroid should be the origin.
  std::vector<Vec3> anchors;
  /// Optional unit surface normal per anchor, in the part frame.
  std::vector<Vec3> normals;
  /// World pose of the part frame with every joint at q = 0.
  Pose origin;
};

/// Linkage from `parent` to `child`. Axis and pivot are in the parent frame.
struct EdgeSpec {
  int parent = 0;
  int child = 0;
  ModelType model = ModelType::Rigid;
  Vec3 axis = Vec3::UnitX();
  Vec3 pivot = Vec3::Zero();
  /// (u, q) keyframes over normalised time u in [0, 1], linearly
  /// interpolated and held constant outside. Empty means q = 0 throughout.
  std::vector<std::pair<double, double>> profile;
  double q_min = 0.0, q_max = 0.0;

  double q_at(double u) const;
};

struct SceneSpec {
  std::string name;
  std::vector<PartSpec> parts;  // parts[0] is the root (static background)
  std::vector<EdgeSpec> edges;
  int frames = 100;
  double sigma_track = 0.0;     // meters, per coordinate
  double sigma_pose_pos = 0.0;  // noise on the pose-file output
  double sigma_pose_rot = 0.0;
  std::uint64_t seed = 0;
};

struct GeneratedScene {
  std::vector<FeatureTrack> tracks;
  /// Part poses in the convention the estimator produces: origin at the
  /// first-frame anchor centroid, world-aligned axes at frame 0.
  std::vector<PartTrajectory> poses;
  GroundTruthGraph truth;
  PartLabelMap labels;

  std::string tracks_text() const { return dump_tracks(tracks); }
  std::string poses_text() const { return dump_pose_trajectories(poses); }
};

/// Throws SpecError for invalid trees, unknown parts, bad axes or a profile
/// leaving its declared range.
void validate(const SceneSpec& spec);

/// Forward kinematics from the root through the tree, anchors mapped to
/// world and perturbed by Gaussian noise. Deterministic for a given seed.
GeneratedScene generate(const SceneSpec& spec);

/// World pose of every part at frame t (noise free).
std::map<int, Pose> part_world_poses(const SceneSpec& spec, int t);

/// Normalised time of frame t in a sequence of `frames` frames.
double normalized_time(int t, int frames);

/// 20 anchors on a box with the given half extents: corners and edge
/// midpoints. Centroid at the origin. Face centres are left out because
/// their normals are parallel to a box axis, which hides rotation about it.
std::vector<Vec3> box_anchors(const Vec3& half_extents);
/// Outward normals matching box_anchors: the normalised sign pattern.
std::vector<Vec3> box_normals(const std::vector<Vec3>& anchors);

/// door, drawer, cabinet, chair, static_pair.
std::map<std::string, SceneSpec> builtin_scenes();
/// Throws SpecError for an unknown name.
SceneSpec builtin_scene(const std::string& name);

}  // namespace artic
