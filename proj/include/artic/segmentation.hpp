#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "artic/trackio.hpp"

namespace artic {

/// Motion-consistency likelihood of two tracks belonging to one rigid part.
struct RigidityAffinity {
  int track_a = 0;
  int track_b = 0;
  double displacement = 1.0;          // in (0, 1]
  std::optional<double> normal_angle; // in (0, 1], when both carry normals

  /// Product of the available factors.
  double score() const { return displacement * normal_angle.value_or(1.0); }
};

struct SegmentationConfig {
  double sigma_d = 0.005;  // meters
  double sigma_n = 0.1;    // radians
  double epsilon = 0.6;    // affinity threshold in (0, 1)
  int min_pts = 3;
};

/// Scores a pair of tracks on their common frames: Gaussian likelihood of
/// the variance of their separation (and of their inter-normal angle).
/// Throws InsufficientOverlap when fewer than 2 frames are shared.
RigidityAffinity pairwise_affinity(const FeatureTrack& a, const FeatureTrack& b,
                                   double sigma_d, double sigma_n);

/// Dense symmetric matrix of pairwise scores, row-major n x n. Pairs that do
/// not overlap score 0; the diagonal is 1.
struct AffinityMatrix {
  std::size_t n = 0;
  std::vector<double> values;
  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

AffinityMatrix affinity_matrix(std::span<const FeatureTrack> tracks,
                               double sigma_d, double sigma_n);
/// Single-threaded reference for affinity_matrix.
AffinityMatrix affinity_matrix_serial(std::span<const FeatureTrack> tracks,
                                      double sigma_d, double sigma_n);

inline constexpr int kNoise = -1;

/// track_id -> cluster id, or kNoise.
struct ClusterAssignment {
  std::map<int, int> cluster_of;
  int n_clusters = 0;
  /// Track ids per cluster, ascending.
  std::vector<std::vector<int>> members() const;
};

/// DBSCAN over the affinity graph: b neighbours a iff score >= epsilon.
/// Tracks are visited in ascending track_id order, so cluster ids are
/// numbered by their smallest member.
ClusterAssignment cluster_tracks(std::span<const FeatureTrack> tracks,
                                 const SegmentationConfig& cfg = {});

/// DBSCAN on a precomputed matrix whose rows follow `tracks` order.
ClusterAssignment cluster_with_affinity(std::span<const FeatureTrack> tracks,
                                        const AffinityMatrix& affinity,
                                        const SegmentationConfig& cfg);

}  // namespace artic
