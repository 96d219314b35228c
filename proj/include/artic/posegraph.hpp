#pragma once

#include <span>
#include <vector>

#include "artic/geometry.hpp"
#include "artic/trackio.hpp"

namespace artic {

/// Motion of one cluster relative to its first observed frame: the pose at
/// the first frame is identity and p(t) = pose(t) * p(t0) for member points.
struct ClusterTrajectory {
  int cluster_id = 0;
  std::vector<TimedPose> poses;
  /// Consensus size of the alignment that produced each pose (0 for the
  /// first frame).
  std::vector<int> inliers;
  bool converged = true;
};

struct PoseGraphConfig {
  RansacConfig ransac;
  /// Levenberg-Marquardt refinement settings.
  int max_iterations = 50;
  double initial_damping = 1e-3;
  double relative_tolerance = 1e-10;
};

/// Chains RANSAC alignments between consecutive observed frames.
/// Throws DegenerateGeometry for fewer than 3 tracks and GapTooLarge when
/// two consecutive frames share fewer than 3 tracks.
ClusterTrajectory estimate_trajectory(std::span<const FeatureTrack> tracks,
                                      const PoseGraphConfig& cfg = {},
                                      int cluster_id = 0);

/// Pose-graph constraint: measured pose of frame `to` in frame `from`.
struct PoseConstraint {
  std::size_t from = 0;  // index into the trajectory
  std::size_t to = 0;
  Pose measured;
};

/// Consecutive constraints plus skip links (strides 2, 4, 8, ... and back
/// to the first frame) wherever at least 3 tracks are shared.
std::vector<PoseConstraint> build_constraints(const ClusterTrajectory& traj,
                                              std::span<const FeatureTrack> tracks,
                                              const RansacConfig& ransac);

/// Sum over constraints of squared translation (m) and rotation (rad)
/// residual norms.
double pose_graph_residual(std::span<const TimedPose> poses,
                           std::span<const PoseConstraint> constraints);

/// Damped Gauss-Newton over all constraints with the first pose pinned.
/// Never returns a trajectory with a larger residual than its input.
ClusterTrajectory refine_trajectory(const ClusterTrajectory& traj,
                                    std::span<const FeatureTrack> tracks,
                                    const PoseGraphConfig& cfg = {});

/// Same optimizer on explicit constraints; `residual_trace` receives the
/// accepted residual after every iteration (first entry = input).
ClusterTrajectory optimize_pose_graph(const ClusterTrajectory& traj,
                                      std::span<const PoseConstraint> constraints,
                                      const PoseGraphConfig& cfg,
                                      std::vector<double>* residual_trace = nullptr);

/// inverse(x_i(t)) * x_j(t) over shared frames. Throws InsufficientOverlap
/// when fewer than 2 frames are shared.
std::vector<RelativeTransform> relative_transform_sequence(
    std::span<const TimedPose> traj_i, std::span<const TimedPose> traj_j);

/// Re-expresses a cluster trajectory as part poses whose frame origin is the
/// centroid of the member points at the first frame (identity rotation).
PartTrajectory anchor_trajectory(const ClusterTrajectory& traj,
                                 std::span<const FeatureTrack> tracks);

}  // namespace artic
